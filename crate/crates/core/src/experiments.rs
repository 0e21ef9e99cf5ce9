//! Canned, deterministic runs of the worked examples.
//!
//! | name               | what it checks                                                   |
//! |--------------------|------------------------------------------------------------------|
//! | `erdos-freud`      | disjoint distance sets for binary-in-base-4 numbers and doubles   |
//! | `primes-pow2`      | two distinct `2^m − 2^n` realized by at least `k` prime pairs     |
//! | `sum-reciprocal`   | lemma witnesses for `⌊(n+1)ln(n+1)⌋` against `⌊10^{n^α}⌋`         |
//! | `power-constants`  | the power-growth constant test plus a direct `R_k(A) ∩ Δ(B)` search |
//! | `prime-khintchine` | a shift with at least `⌈(n/ln n)(1−ε)⌉` prime pairs below `p_n`    |

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::diagnostics::{power_constant_check, DiagnosticError, PowerVerdict};
use crate::finite_set::{sorted_intersection, FiniteSet, SetError};
use crate::rational::Rational;
use crate::report::to_json_document;
use crate::sequence::{self, generate, generate_upto, parse_spec, sieve, Builtin, SequenceError, SequenceSpec};
use crate::witness::{khintchine_scan, LemmaScanner, WitnessError, WitnessReport, SAMPLE_PAIRS};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}` (expected one of: erdos-freud, primes-pow2, sum-reciprocal, power-constants, prime-khintchine)")]
    UnknownExperiment(String),
    #[error("parameter `{name}` = {value} out of range: {range}")]
    ParamOutOfRange {
        name: &'static str,
        value: String,
        range: String,
    },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Diagnostic(#[from] DiagnosticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ErdosFreud,
    PrimesPow2,
    SumReciprocal,
    PowerConstants,
    PrimeKhintchine,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::ErdosFreud,
        Experiment::PrimesPow2,
        Experiment::SumReciprocal,
        Experiment::PowerConstants,
        Experiment::PrimeKhintchine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ErdosFreud => "erdos-freud",
            Experiment::PrimesPow2 => "primes-pow2",
            Experiment::SumReciprocal => "sum-reciprocal",
            Experiment::PowerConstants => "power-constants",
            Experiment::PrimeKhintchine => "prime-khintchine",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, ExperimentError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ExperimentError::UnknownExperiment(s.to_string()))
    }
}

/// Overrides for experiment defaults; unset fields take the per-experiment
/// default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentParams {
    /// Prefix length (`erdos-freud`) or prime index (`prime-khintchine`).
    pub n: Option<u64>,
    pub prime_limit: Option<u64>,
    pub k: Option<u64>,
    pub count: Option<u64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    /// Growth constant of `A`.
    pub k_const: Option<f64>,
    /// Growth constant of `B`.
    pub m_const: Option<f64>,
    pub b_spec: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: Value,
    pub findings: Value,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    /// Pretty JSON with floats rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        to_json_document(self).expect("report serialization is infallible")
    }
}

fn out_of_range(name: &'static str, value: impl ToString, range: &str) -> ExperimentError {
    ExperimentError::ParamOutOfRange {
        name,
        value: value.to_string(),
        range: range.to_string(),
    }
}

fn int_param(name: &'static str, value: Option<u64>, default: u64, lo: u64, hi: u64) -> Result<u64, ExperimentError> {
    let v = value.unwrap_or(default);
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(out_of_range(name, v, &format!("[{lo}, {hi}]")))
    }
}

/// A real parameter in the open interval `(lo, hi)`.
fn real_param(name: &'static str, value: Option<f64>, default: f64, lo: f64, hi: f64) -> Result<f64, ExperimentError> {
    let v = value.unwrap_or(default);
    if v > lo && v < hi {
        Ok(v)
    } else {
        Err(out_of_range(name, v, &format!("({lo}, {hi})")))
    }
}

pub fn run_experiment(name: &str, params: &ExperimentParams) -> Result<ExperimentReport, ExperimentError> {
    let experiment: Experiment = name.parse()?;
    let start = Instant::now();
    let (parameters, findings, pass) = match experiment {
        Experiment::ErdosFreud => erdos_freud(params)?,
        Experiment::PrimesPow2 => primes_pow2(params)?,
        Experiment::SumReciprocal => sum_reciprocal(params)?,
        Experiment::PowerConstants => power_constants(params)?,
        Experiment::PrimeKhintchine => prime_khintchine(params)?,
    };
    Ok(ExperimentReport {
        name: experiment.name().to_string(),
        parameters,
        findings,
        pass,
        wall_time: start.elapsed(),
    })
}

type Outcome = (Value, Value, bool);

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("finding serialization is infallible")
}

// erdos-freud

#[derive(Serialize)]
struct SumRatio {
    k: u32,
    n: u64,
    value: f64,
    expected: Rational,
    matches: bool,
}

#[derive(Serialize)]
struct ErdosFreudFindings {
    a_max: i64,
    b_max: i64,
    delta_a_size: usize,
    delta_b_size: usize,
    common_distances: Vec<i64>,
    disjoint: bool,
    doubling_holds: bool,
    ratios: Vec<SumRatio>,
}

/// Terms `1..=n` of a builtin; cheaper and exact compared with the generic
/// path.
fn builtin_prefix(builtin: &Builtin, n: u64) -> Result<FiniteSet, ExperimentError> {
    let terms = (1..=n)
        .map(|i| sequence::builtin_term(builtin, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FiniteSet::from_elements(terms)?)
}

fn erdos_freud(p: &ExperimentParams) -> Result<Outcome, ExperimentError> {
    let n = int_param("N", p.n, 1024, 2, 8192)?;
    let a = builtin_prefix(&Builtin::EvenPow2Sums, n)?;
    let b = builtin_prefix(&Builtin::OddPow2Sums, n)?;
    let (da, db) = (a.delta_set()?, b.delta_set()?);
    let common = sorted_intersection(da.elements(), db.elements());
    let doubling_holds = a.elements().iter().zip(b.elements()).all(|(&x, &y)| y == 2 * x);
    // n = 2^k − 1 gives a_n + b_n = 4^k − 1 = (2^k − 1)(2^k + 1)
    let ratios: Vec<SumRatio> = (1..)
        .map(|k| (k, (1u64 << k) - 1))
        .take_while(|&(_, m)| m <= n)
        .map(|(k, m)| {
            let sum = (a.nth(m as usize).unwrap() + b.nth(m as usize).unwrap()) as i128;
            let mm = m as i128;
            let value = Rational::new(sum, mm * mm).unwrap().to_f64();
            let expected = Rational::new((1i128 << k) + 1, (1i128 << k) - 1).unwrap();
            let matches = (value - expected.to_f64()).abs() <= 1e-12 * expected.to_f64();
            SumRatio {
                k,
                n: m,
                value,
                expected,
                matches,
            }
        })
        .collect();
    let disjoint = common.is_empty();
    let pass = disjoint && doubling_holds && ratios.iter().all(|r| r.matches);
    let findings = ErdosFreudFindings {
        a_max: a.max(),
        b_max: b.max(),
        delta_a_size: da.len(),
        delta_b_size: db.len(),
        common_distances: common.into_iter().take(SAMPLE_PAIRS).collect(),
        disjoint,
        doubling_holds,
        ratios,
    };
    Ok((serde_json::json!({ "N": n }), to_value(&findings), pass))
}

// primes-pow2

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerDifferenceWitness {
    pub x: i64,
    /// `x = 2^high − 2^low`.
    pub high: u32,
    pub low: u32,
    pub multiplicity: u64,
    pub pairs: Vec<(i64, i64)>,
}

/// `x = 2^m − 2^n` with `m > n ≥ 0` as `(m, n)`, if `x` has that form.
pub fn power_difference(x: i64) -> Option<(u32, u32)> {
    if x <= 0 {
        return None;
    }
    let low = x.trailing_zeros();
    let top = x.checked_add(1i64 << low)?;
    (top.count_ones() == 1).then(|| (top.trailing_zeros(), low))
}

/// Smallest `x ∈ Δ(B)` with `|A ∩ (A + x)| ≥ k`.
fn smallest_recurrent_shift(a: &FiniteSet, b: &FiniteSet, k: u64) -> Result<Option<PowerDifferenceWitness>, ExperimentError> {
    if b.len() < 2 {
        return Ok(None);
    }
    let shifts = b.delta_set()?.into_elements();
    let counts: Vec<u64> = shifts.par_iter().map(|&x| a.shift_intersect_count(x)).collect();
    Ok(shifts.iter().zip(&counts).find(|&(_, &c)| c >= k).map(|(&x, &c)| {
        let (high, low) = power_difference(x).expect("Δ(B) of powers of two");
        PowerDifferenceWitness {
            x,
            high,
            low,
            multiplicity: c,
            pairs: a
                .elements()
                .iter()
                .filter(|&&v| a.contains(v + x))
                .take(SAMPLE_PAIRS)
                .map(|&v| (v, v + x))
                .collect(),
        }
    }))
}

#[derive(Serialize)]
struct PrimesPow2Findings {
    prime_count: usize,
    powers: Vec<i64>,
    first: Option<PowerDifferenceWitness>,
    removed_power: Option<i64>,
    second: Option<PowerDifferenceWitness>,
    distinct: bool,
}

fn primes_pow2(p: &ExperimentParams) -> Result<Outcome, ExperimentError> {
    let limit = int_param("prime_limit", p.prime_limit, 100_000, 10, 10_000_000)?;
    let k = int_param("k", p.k, 10, 1, 1_000_000)?;
    let a = FiniteSet::from_elements(sieve::primes_up_to(limit))?;
    let b = generate_upto(&SequenceSpec::Builtin(Builtin::Pow2), limit as i64, 62, false)?.set;
    let first = smallest_recurrent_shift(&a, &b, k)?;
    let (removed_power, second) = match &first {
        Some(w) => {
            let removed = 1i64 << w.low;
            let rest: Vec<i64> = b.elements().iter().copied().filter(|&v| v != removed).collect();
            let second = match FiniteSet::from_elements(rest) {
                Ok(rest) => smallest_recurrent_shift(&a, &rest, k)?,
                Err(_) => None,
            };
            (Some(removed), second)
        }
        None => (None, None),
    };
    let distinct = matches!((&first, &second), (Some(f), Some(s)) if f.x != s.x);
    let findings = PrimesPow2Findings {
        prime_count: a.len(),
        powers: b.elements().to_vec(),
        first,
        removed_power,
        second,
        distinct,
    };
    Ok((
        serde_json::json!({ "prime_limit": limit, "k": k }),
        to_value(&findings),
        distinct,
    ))
}

// sum-reciprocal

const SUM_RECIPROCAL_A: &str = "floor((n + 1) * log(n + 1))";

#[derive(Serialize)]
struct SumReciprocalFindings {
    a_spec: &'static str,
    b_spec: String,
    a_max: i64,
    reciprocal_sum: f64,
    b_terms: Vec<i64>,
    witnesses: Vec<(u64, WitnessReport)>,
    all_bounds_met: bool,
    best_multiplicity: u64,
}

fn sum_reciprocal(p: &ExperimentParams) -> Result<Outcome, ExperimentError> {
    let alpha = real_param("alpha", p.alpha, 0.5, 0.0, 1.0)?;
    let eps = real_param("eps", p.eps, 0.25, 0.0, 1.0)?;
    if alpha >= 1.0 - eps {
        return Err(out_of_range("alpha", alpha, &format!("(0, 1 - eps) = (0, {})", 1.0 - eps)));
    }
    let count = int_param("count", p.count, 2000, 10, 100_000)?;
    let k = int_param("k", p.k, 3, 1, 1_000_000)?;
    let a = generate(&parse_spec(SUM_RECIPROCAL_A)?, count as usize, false)?.set;
    let b_spec = SequenceSpec::Builtin(Builtin::FloorExp10Alpha(alpha));
    let b = generate_upto(&b_spec, a.max(), count as usize, false)?.set;
    let reciprocal_sum = a.elements().iter().map(|&v| 1.0 / v as f64).sum();
    let mut witnesses = Vec::new();
    if b.len() >= 2 {
        let scanner = LemmaScanner::new(&a, &b)?;
        let mut h = 1;
        while 2 * h <= b.len() as u64 {
            witnesses.push((h, scanner.witness(h)?));
            h *= 2;
        }
    }
    let all_bounds_met = !witnesses.is_empty() && witnesses.iter().all(|(_, w)| w.bound_met);
    let best_multiplicity = witnesses.iter().map(|(_, w)| w.multiplicity).max().unwrap_or(0);
    let pass = all_bounds_met && best_multiplicity >= k;
    let findings = SumReciprocalFindings {
        a_spec: SUM_RECIPROCAL_A,
        b_spec: b_spec.to_string(),
        a_max: a.max(),
        reciprocal_sum,
        b_terms: b.elements().to_vec(),
        witnesses,
        all_bounds_met,
        best_multiplicity,
    };
    Ok((
        serde_json::json!({ "alpha": alpha, "eps": eps, "count": count, "k": k }),
        to_value(&findings),
        pass,
    ))
}

// power-constants

#[derive(Serialize)]
struct ShiftCount {
    x: i64,
    multiplicity: u64,
}

#[derive(Serialize)]
struct PowerConstantsFindings {
    a_spec: String,
    b_spec: String,
    repairs: usize,
    a_max: i64,
    b_terms_used: usize,
    verdict: PowerVerdict,
    common_count: usize,
    common: Vec<ShiftCount>,
}

fn power_constants(p: &ExperimentParams) -> Result<Outcome, ExperimentError> {
    let k_const = real_param("K", p.k_const, 0.3, 0.0, f64::INFINITY)?;
    let m_const = real_param("M", p.m_const, 1.0, 0.0, f64::INFINITY)?;
    let alpha = p.alpha.unwrap_or(0.5);
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(out_of_range("alpha", alpha, "(0, 1]"));
    }
    let beta = real_param("beta", p.beta, 2.0, 0.0, f64::INFINITY)?;
    let count = int_param("count", p.count, 2000, 10, 20_000)?;
    let k = int_param("k", p.k, 3, 1, 1_000_000)?;
    let verdict = power_constant_check(k_const, alpha, m_const, beta)?;

    let a_spec = format!("floor({k_const} * n ^ {})", 1.0 + alpha);
    let b_spec = format!("floor({m_const} * n ^ {})", 1.0 + beta);
    let a_report = generate(&parse_spec(&a_spec)?, count as usize, true)?;
    let a = a_report.set;
    if a.max() > crate::finite_set::INDICATOR_LIMIT {
        return Err(out_of_range("count", count, "a_N must stay below 10^9"));
    }
    let b = generate_upto(&parse_spec(&b_spec)?, a.max(), count as usize, true)?.set;
    let mut common = Vec::new();
    if b.len() >= 2 {
        let recurrent = a.recursion_set(k, a.max());
        let shifts = sorted_intersection(&recurrent, b.delta_set()?.elements());
        common = shifts
            .into_iter()
            .map(|x| ShiftCount {
                x,
                multiplicity: a.shift_intersect_count(x),
            })
            .collect();
    }
    let pass = verdict.satisfied && !common.is_empty();
    let findings = PowerConstantsFindings {
        a_spec,
        b_spec,
        repairs: a_report.repairs.len(),
        a_max: a.max(),
        b_terms_used: b.len(),
        verdict,
        common_count: common.len(),
        common: common.into_iter().take(SAMPLE_PAIRS).collect(),
    };
    Ok((
        serde_json::json!({
            "K": k_const, "alpha": alpha, "M": m_const, "beta": beta, "count": count, "k": k
        }),
        to_value(&findings),
        pass,
    ))
}

// prime-khintchine

#[derive(Serialize)]
struct PrimeKhintchineFindings {
    p_n: i64,
    b_terms_used: usize,
    x: i64,
    count: u64,
    target: u64,
    density: Rational,
    reference: Rational,
}

/// `⌈(n / ln n)(1 − ε)⌉`.
pub fn khintchine_target(n: u64, eps: f64) -> u64 {
    let nf = n as f64;
    (nf / nf.ln() * (1.0 - eps)).ceil() as u64
}

fn prime_khintchine(p: &ExperimentParams) -> Result<Outcome, ExperimentError> {
    let n = int_param("n", p.n, 2000, 10, 1_000_000)?;
    let eps = real_param("eps", p.eps, 0.5, 0.0, 1.0)?;
    let b_text = p.b_spec.clone().unwrap_or_else(|| "pow2".to_string());
    let a = FiniteSet::from_elements(sieve::first_primes(n as usize))?;
    let p_n = a.max();
    let b = generate_upto(&parse_spec(&b_text)?, p_n, 1_000_000, true)?.set;
    if b.len() < 2 {
        return Err(out_of_range("b_spec", &b_text, "needs two terms not exceeding p_n"));
    }
    let point = khintchine_scan(&a, &b, &[p_n])?.remove(0);
    let target = khintchine_target(n, eps);
    let findings = PrimeKhintchineFindings {
        p_n,
        b_terms_used: b.len(),
        x: point.x,
        count: point.count,
        target,
        density: point.density,
        reference: point.reference,
    };
    Ok((
        serde_json::json!({ "n": n, "eps": eps, "b_spec": b_text }),
        to_value(&findings),
        point.count >= target,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(name: &str, p: ExperimentParams) -> ExperimentReport {
        run_experiment(name, &p).unwrap()
    }

    #[test]
    fn power_difference_decomposition() {
        assert_eq!(power_difference(6), Some((3, 1)));
        assert_eq!(power_difference(2), Some((2, 1)));
        assert_eq!(power_difference(1), Some((1, 0)));
        assert_eq!(power_difference(5), None);
        assert_eq!(power_difference(0), None);
    }

    #[test]
    fn erdos_freud_small() {
        let r = run("erdos-freud", ExperimentParams {
            n: Some(64),
            ..Default::default()
        });
        assert!(r.pass);
        assert_eq!(r.findings["ratios"].as_array().unwrap().len(), 6);
    }

    #[test]
    fn primes_pow2_small() {
        let r = run("primes-pow2", ExperimentParams {
            prime_limit: Some(1000),
            k: Some(5),
            ..Default::default()
        });
        assert!(r.pass);
        assert_eq!(r.findings["first"]["x"], 2);
        assert_eq!(r.findings["removed_power"], 2);
        assert_eq!(r.findings["second"]["x"], 4);
    }

    #[test]
    fn khintchine_target_values() {
        assert_eq!(khintchine_target(2000, 0.5), 132);
    }

    #[test]
    fn other_experiments_run() {
        assert!(run("sum-reciprocal", ExperimentParams::default()).pass);
        assert!(run("power-constants", ExperimentParams::default()).pass);
        assert!(run("prime-khintchine", ExperimentParams {
            n: Some(500),
            ..Default::default()
        })
        .pass);
    }

    #[test]
    fn bad_input() {
        assert!(matches!(
            run_experiment("nope", &ExperimentParams::default()),
            Err(ExperimentError::UnknownExperiment(_))
        ));
        assert!(matches!(
            run_experiment("erdos-freud", &ExperimentParams {
                n: Some(1),
                ..Default::default()
            }),
            Err(ExperimentError::ParamOutOfRange { name: "N", .. })
        ));
        assert!(matches!(
            run_experiment("sum-reciprocal", &ExperimentParams {
                alpha: Some(0.9),
                ..Default::default()
            }),
            Err(ExperimentError::ParamOutOfRange { name: "alpha", .. })
        ));
    }
}
