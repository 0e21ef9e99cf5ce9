//! Built-in and formula-defined increasing integer sequences.

mod dsl;
pub mod sieve;

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::finite_set::{FiniteSet, MAX_ELEMENT};

pub use dsl::{parse_spec, BinOp, Expr, Func};

/// Largest term accepted from a floating-point formula.
pub const FLOAT_EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

/// Largest prefix the prime generator will produce.
pub const MAX_PRIME_COUNT: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SequenceError {
    #[error("parse error at position {position}: expected {}, found {found}", expected.join(" or "))]
    Parse {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown builtin `{name}`")]
    UnknownBuiltin { name: String },
    #[error("`{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("term {index} = {value} is not above the previous term {previous:?} or not positive")]
    MonotonicityViolation {
        index: usize,
        value: f64,
        previous: Option<i64>,
    },
    #[error("term {index} = {value} is not an integer (wrap the formula in floor)")]
    NonIntegerTerm { index: usize, value: f64 },
    #[error("term {index} is not a finite number")]
    NonFiniteTerm { index: usize },
    #[error("term {index} exceeds the representable range")]
    Overflow { index: usize },
    #[error("`{name}` has no closed form; generate a prefix instead")]
    NoClosedForm { name: String },
    #[error("count {count} outside 1..={max}")]
    CountOutOfRange { count: usize, max: usize },
}

impl SequenceError {
    pub(crate) fn shifted(self, by: usize) -> Self {
        match self {
            SequenceError::Parse {
                position,
                expected,
                found,
            } => SequenceError::Parse {
                position: position + by,
                expected,
                found,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Primes,
    /// `2^n`, `n ≥ 1`.
    Pow2,
    /// Sums of distinct even powers of 2 (the Moser–de Bruijn sequence).
    EvenPow2Sums,
    /// Sums of distinct odd powers of 2.
    OddPow2Sums,
    Multiples(i64),
    /// `⌊10^(n^α)⌋`.
    FloorExp10Alpha(f64),
    /// `⌊10^(n / ln n)⌋`.
    FloorExp10NLogN,
}

impl Builtin {
    const NAMES: [(&'static str, usize); 7] = [
        ("primes", 0),
        ("pow2", 0),
        ("even-pow2-sums", 0),
        ("odd-pow2-sums", 0),
        ("multiples", 1),
        ("floor-exp10-alpha", 1),
        ("floor-exp10-nlogn", 0),
    ];

    pub(crate) fn arity(name: &str) -> Option<usize> {
        Builtin::NAMES.iter().find(|(n, _)| *n == name).map(|&(_, a)| a)
    }

    pub(crate) fn from_parts(name: &str, args: &[f64]) -> Result<Builtin, SequenceError> {
        let invalid = |reason: &str| SequenceError::InvalidParameter {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        Ok(match name {
            "primes" => Builtin::Primes,
            "pow2" => Builtin::Pow2,
            "even-pow2-sums" => Builtin::EvenPow2Sums,
            "odd-pow2-sums" => Builtin::OddPow2Sums,
            "multiples" => {
                let m = args[0];
                if m.fract() != 0.0 || m < 1.0 || m > MAX_ELEMENT as f64 {
                    return Err(invalid("m must be a positive integer"));
                }
                Builtin::Multiples(m as i64)
            }
            "floor-exp10-alpha" => {
                let a = args[0];
                if !(a > 0.0 && a.is_finite()) {
                    return Err(invalid("alpha must be positive"));
                }
                Builtin::FloorExp10Alpha(a)
            }
            "floor-exp10-nlogn" => Builtin::FloorExp10NLogN,
            _ => {
                return Err(SequenceError::UnknownBuiltin {
                    name: name.to_string(),
                })
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Primes => "primes",
            Builtin::Pow2 => "pow2",
            Builtin::EvenPow2Sums => "even-pow2-sums",
            Builtin::OddPow2Sums => "odd-pow2-sums",
            Builtin::Multiples(_) => "multiples",
            Builtin::FloorExp10Alpha(_) => "floor-exp10-alpha",
            Builtin::FloorExp10NLogN => "floor-exp10-nlogn",
        }
    }

    /// The real-valued formula behind the exponential builtins.
    fn float_term(&self, n: usize) -> Option<f64> {
        let x = n as f64;
        match self {
            Builtin::FloorExp10Alpha(a) => Some(10f64.powf(x.powf(*a)).floor()),
            Builtin::FloorExp10NLogN => Some(10f64.powf(x / x.ln()).floor()),
            _ => None,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Multiples(m) => write!(f, "multiples({m})"),
            Builtin::FloorExp10Alpha(a) => write!(f, "floor-exp10-alpha({a})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A parsed sequence description.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    Builtin(Builtin),
    Formula(Expr),
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Builtin(b) => b.fmt(f),
            SequenceSpec::Formula(e) => e.fmt(f),
        }
    }
}

impl Serialize for SequenceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for SequenceSpec {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, SequenceError> {
        parse_spec(s)
    }
}

/// A term the repair policy had to change.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Repair {
    /// 1-based term index.
    pub index: usize,
    /// The raw value the formula produced; `null` in JSON when not finite.
    pub formula_value: f64,
    pub emitted_value: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationReport {
    pub set: FiniteSet,
    pub repairs: Vec<Repair>,
}

/// Random access to the `n`-th term (1-based) where a closed form exists.
pub fn builtin_term(builtin: &Builtin, n: u64) -> Result<i64, SequenceError> {
    let index = n as usize;
    let exact = |v: Option<i128>| {
        v.filter(|&v| v <= MAX_ELEMENT as i128)
            .map(|v| v as i64)
            .ok_or(SequenceError::Overflow { index })
    };
    if n == 0 {
        return Err(SequenceError::InvalidParameter {
            name: builtin.name().to_string(),
            reason: "terms are indexed from 1".to_string(),
        });
    }
    match builtin {
        Builtin::Primes => Err(SequenceError::NoClosedForm {
            name: "primes".to_string(),
        }),
        Builtin::Pow2 => exact((n < 63).then(|| 1i128 << n)),
        Builtin::EvenPow2Sums => exact(Some(binary_as_base4(n))),
        Builtin::OddPow2Sums => exact(Some(2 * binary_as_base4(n))),
        Builtin::Multiples(m) => exact((*m as i128).checked_mul(n as i128)),
        Builtin::FloorExp10Alpha(_) | Builtin::FloorExp10NLogN => {
            let v = builtin.float_term(index).unwrap();
            if !v.is_finite() {
                return Err(SequenceError::NonFiniteTerm { index });
            }
            if v > FLOAT_EXACT_LIMIT {
                return Err(SequenceError::Overflow { index });
            }
            Ok(v as i64)
        }
    }
}

/// Reads the binary digits of `n` as base-4 digits.
fn binary_as_base4(n: u64) -> i128 {
    (0..64)
        .filter(|b| n >> b & 1 == 1)
        .map(|b| 1i128 << (2 * b))
        .sum()
}

enum Raw {
    Exact(i64),
    Float(f64),
}

fn raw_term(spec: &SequenceSpec, n: usize) -> Result<Raw, SequenceError> {
    match spec {
        SequenceSpec::Formula(e) => Ok(Raw::Float(e.eval(n as f64))),
        SequenceSpec::Builtin(b) => match b.float_term(n) {
            Some(v) => Ok(Raw::Float(v)),
            None => builtin_term(b, n as u64).map(Raw::Exact),
        },
    }
}

/// Applies the term acceptance rules; yields `(emitted, repair)`.
struct Acceptor {
    repair: bool,
    previous: Option<i64>,
}

impl Acceptor {
    fn accept(&mut self, index: usize, raw: Raw) -> Result<(i64, Option<Repair>), SequenceError> {
        let (value, shown) = match raw {
            Raw::Exact(v) => (Some(v), v as f64),
            Raw::Float(v) if !v.is_finite() => {
                if !self.repair {
                    return Err(SequenceError::NonFiniteTerm { index });
                }
                (None, v)
            }
            Raw::Float(v) => {
                if v.abs() > FLOAT_EXACT_LIMIT {
                    return Err(SequenceError::Overflow { index });
                }
                if v.fract() != 0.0 {
                    return Err(SequenceError::NonIntegerTerm { index, value: v });
                }
                (Some(v as i64), v)
            }
        };
        let floor = self.previous.map_or(1, |p| p + 1);
        let emitted = match value {
            Some(v) if v >= floor => v,
            _ if self.repair => floor,
            _ => {
                return Err(SequenceError::MonotonicityViolation {
                    index,
                    value: shown,
                    previous: self.previous,
                })
            }
        };
        if emitted > MAX_ELEMENT {
            return Err(SequenceError::Overflow { index });
        }
        self.previous = Some(emitted);
        let repair = (value != Some(emitted)).then_some(Repair {
            index,
            formula_value: shown,
            emitted_value: emitted,
        });
        Ok((emitted, repair))
    }
}

/// The first `count` terms of `spec`.
///
/// With `repair`, each emitted term is `max(previous + 1, raw, 1)` and every
/// change is logged; without it, a raw term that is not strictly above its
/// predecessor (or not positive) is an error.
pub fn generate(spec: &SequenceSpec, count: usize, repair: bool) -> Result<GenerationReport, SequenceError> {
    if let SequenceSpec::Builtin(Builtin::Primes) = spec {
        if count == 0 || count > MAX_PRIME_COUNT {
            return Err(SequenceError::CountOutOfRange {
                count,
                max: MAX_PRIME_COUNT,
            });
        }
        let set = FiniteSet::from_elements(sieve::first_primes(count)).expect("primes are increasing");
        return Ok(GenerationReport { set, repairs: vec![] });
    }
    if count == 0 {
        return Err(SequenceError::CountOutOfRange {
            count,
            max: usize::MAX,
        });
    }
    let mut acc = Acceptor {
        repair,
        previous: None,
    };
    let mut terms = Vec::with_capacity(count);
    let mut repairs = Vec::new();
    for n in 1..=count {
        let (v, r) = acc.accept(n, raw_term(spec, n)?)?;
        terms.push(v);
        repairs.extend(r);
    }
    let set = FiniteSet::from_elements(terms).expect("acceptor emits increasing positive terms");
    Ok(GenerationReport { set, repairs })
}

/// All terms `≤ max_value`, at most `max_count` of them. Generation stops
/// early (without error) once a term overflows, as long as `max_value` is
/// below the float-exact limit.
pub fn generate_upto(
    spec: &SequenceSpec,
    max_value: i64,
    max_count: usize,
    repair: bool,
) -> Result<GenerationReport, SequenceError> {
    let mut terms = Vec::new();
    let mut repairs = Vec::new();
    if let SequenceSpec::Builtin(Builtin::Primes) = spec {
        terms = sieve::primes_up_to(max_value.max(0) as u64);
        terms.truncate(max_count);
    } else {
        let mut acc = Acceptor {
            repair,
            previous: None,
        };
        for n in 1..=max_count {
            let step = raw_term(spec, n).and_then(|raw| acc.accept(n, raw));
            let (v, r) = match step {
                Ok(ok) => ok,
                Err(SequenceError::Overflow { .. }) if (max_value as f64) < FLOAT_EXACT_LIMIT => break,
                Err(e) => return Err(e),
            };
            if v > max_value {
                break;
            }
            terms.push(v);
            repairs.extend(r);
        }
    }
    if terms.is_empty() {
        return Err(SequenceError::CountOutOfRange {
            count: 0,
            max: max_count,
        });
    }
    let set = FiniteSet::from_elements(terms).expect("generated terms are increasing");
    Ok(GenerationReport { set, repairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gen(text: &str, count: usize, repair: bool) -> Result<GenerationReport, SequenceError> {
        generate(&parse_spec(text).unwrap(), count, repair)
    }

    fn elems(text: &str, count: usize) -> Vec<i64> {
        gen(text, count, false).unwrap().set.into_elements()
    }

    /// Sums of distinct powers `4^k`, enumerated by brute force.
    fn even_sums_oracle(limit: i64) -> Vec<i64> {
        (1..=limit)
            .filter(|v| (0..63).all(|b| v >> b & 1 == 0 || b % 2 == 0))
            .collect()
    }

    #[test]
    fn power_sum_builtins() {
        assert_eq!(elems("even-pow2-sums", 5), vec![1, 4, 5, 16, 17]);
        assert_eq!(elems("odd-pow2-sums", 5), vec![2, 8, 10, 32, 34]);
        assert_eq!(elems("pow2", 4), vec![2, 4, 8, 16]);
        assert_eq!(elems("multiples(3)", 3), vec![3, 6, 9]);
        let oracle = even_sums_oracle(5_000);
        assert_eq!(elems("even-pow2-sums", oracle.len()), oracle);
    }

    #[test]
    fn closed_forms() {
        assert_eq!(builtin_term(&Builtin::EvenPow2Sums, 7), Ok(21));
        assert_eq!(builtin_term(&Builtin::Pow2, 10), Ok(1024));
        for k in 1..=30u32 {
            let n = (1u64 << k) - 1;
            let expected = ((1i64 << (2 * k)) - 1) / 3;
            assert_eq!(builtin_term(&Builtin::EvenPow2Sums, n), Ok(expected));
        }
        assert_eq!(builtin_term(&Builtin::EvenPow2Sums, 15), Ok(85));
        assert!(matches!(
            builtin_term(&Builtin::Primes, 3),
            Err(SequenceError::NoClosedForm { .. })
        ));
        assert!(matches!(builtin_term(&Builtin::Pow2, 63), Err(SequenceError::Overflow { .. })));
        assert_eq!(builtin_term(&Builtin::Pow2, 62), Ok(1 << 62));
    }

    #[test]
    fn moser_de_bruijn_ratio_near_one_third() {
        for k in 4..=12u32 {
            let n = (1u64 << k) - 1;
            let a = builtin_term(&Builtin::EvenPow2Sums, n).unwrap() as f64;
            let ratio = a / (n as f64 * n as f64);
            let closed = ((1u64 << k) + 1) as f64 / (3.0 * n as f64);
            assert!((ratio - closed).abs() < 1e-15);
            assert!((ratio - 1.0 / 3.0).abs() <= 2f64.powi(1 - k as i32));
        }
    }

    #[test]
    fn repair_policy() {
        let report = gen("floor(0.38 * n^1.5)", 4, true).unwrap();
        assert_eq!(report.set.elements(), &[1, 2, 3, 4]);
        let raws: Vec<(usize, f64)> = report.repairs.iter().map(|r| (r.index, r.formula_value)).collect();
        assert_eq!(raws, vec![(1, 0.0), (2, 1.0), (3, 1.0), (4, 3.0)]);
        assert!(matches!(
            gen("floor(0.38 * n^1.5)", 4, false),
            Err(SequenceError::MonotonicityViolation { index: 1, .. })
        ));
        let clean = gen("n^2 + 1", 6, false).unwrap();
        assert!(clean.repairs.is_empty());
        assert_eq!(clean.set.elements(), &[2, 5, 10, 17, 26, 37]);
    }

    #[test]
    fn formula_term_errors() {
        assert!(matches!(gen("n / 2", 3, true), Err(SequenceError::NonIntegerTerm { index: 1, .. })));
        assert!(matches!(gen("10^n", 20, false), Err(SequenceError::Overflow { index: 16 })));
        assert!(matches!(gen("floor(1/(n-1))", 2, false), Err(SequenceError::NonFiniteTerm { index: 1 })));
        let repaired = gen("floor(1/(n-1))", 3, true).unwrap();
        assert_eq!(repaired.set.elements(), &[1, 2, 3]);
    }

    #[test]
    fn exponential_builtins_need_repair_at_the_head() {
        assert!(gen("floor-exp10-nlogn", 5, false).is_err());
        let r = gen("floor-exp10-nlogn", 20, true).unwrap();
        assert_eq!(r.set.nth(1), Some(1));
        assert_eq!(r.set.nth(20), Some(10f64.powf(20.0 / 20f64.ln()).floor() as i64));
        let alpha = gen("floor-exp10-alpha(0.5)", 10, false).unwrap();
        assert_eq!(alpha.set.elements()[..4], [10, 25, 53, 100]);
    }

    #[test]
    fn bounded_generation() {
        let r = generate_upto(&parse_spec("pow2").unwrap(), 1000, 100, false).unwrap();
        assert_eq!(r.set.elements(), &[2, 4, 8, 16, 32, 64, 128, 256, 512]);
        let r = generate_upto(&parse_spec("primes").unwrap(), 30, 100, false).unwrap();
        assert_eq!(r.set.len(), 10);
        let r = generate_upto(&parse_spec("10^n").unwrap(), 1_000_000, 100, false).unwrap();
        assert_eq!(r.set.len(), 6);
    }

    #[test]
    fn prime_count_limits() {
        assert!(matches!(gen("primes", 0, false), Err(SequenceError::CountOutOfRange { .. })));
        assert!(matches!(
            gen("primes", MAX_PRIME_COUNT + 1, false),
            Err(SequenceError::CountOutOfRange { .. })
        ));
        let trial = |n: i64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0);
        let oracle: Vec<i64> = (2..).filter(|&n| trial(n)).take(10_000).collect();
        assert_eq!(elems("primes", 10_000), oracle);
    }

    proptest! {
        #[test]
        fn odd_sums_are_twice_even_sums(n in 1u64..1_000_000_000) {
            prop_assert_eq!(
                builtin_term(&Builtin::OddPow2Sums, n).unwrap(),
                2 * builtin_term(&Builtin::EvenPow2Sums, n).unwrap()
            );
        }

        #[test]
        fn increasing_formulas_need_no_repair(c in 1u32..50, p in 1u32..4) {
            let text = format!("{c} * n^{p} + n");
            let r = gen(&text, 50, false).unwrap();
            prop_assert!(r.repairs.is_empty());
            let r2 = gen(&text, 50, true).unwrap();
            prop_assert!(r2.repairs.is_empty());
            prop_assert_eq!(r.set, r2.set);
        }
    }
}
