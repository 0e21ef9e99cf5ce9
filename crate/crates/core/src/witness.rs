//! Finite witnesses for intersections of distance sets.
//!
//! * [`pigeonhole_witness`]: a common distance from a sumset collision when
//!   some prefixes satisfy `a_N + b_ν ≤ N·ν`.
//! * [`lemma_witness`]: a shift `x ∈ Δ(B)`, `x ≥ h`, with
//!   `|A ∩ (A + x)| ≥ N²/(a_N + b_ν) − N(2h − 1)/ν`.
//! * [`khintchine_scan`]: best relative density of `A ∩ (A + x)` over
//!   `x ∈ Δ(B)` at chosen cut-offs.

use std::cmp::Reverse;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::finite_set::{sorted_intersection, FiniteSet, SetError};
use crate::histogram::{distance_histogram, Backend};
use crate::rational::Rational;

/// Sample pairs kept in witness reports.
pub const SAMPLE_PAIRS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("h = {h} outside 1..=ν/2 for ν = {nu}")]
    HOutOfRange { h: u64, nu: u64 },
    #[error("invalid bound input: {0}")]
    InvalidInput(String),
    #[error("no element of Δ(B) is at least {h}")]
    NoEligibleShift { h: u64 },
    #[error("no prefixes with a_N + b_ν ≤ N·ν")]
    HypothesisNotSatisfied {
        /// Smallest common distance of the full sets, if there is one.
        fallback: Option<Box<CommonDistanceReport>>,
    },
    #[error("grid point {n} outside [1, {max}]")]
    GridOutOfRange { n: i64, max: i64 },
    #[error("arithmetic overflow computing the bound")]
    Overflow,
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LemmaBound {
    pub bound: Rational,
    /// False exactly in the equality case `h = 1`, `N·ν = a_N + b_ν`.
    pub strict_expected: bool,
}

/// `N²/(a_N + b_ν) − N(2h − 1)/ν`, exactly.
pub fn lemma_bound(n: u64, a_n: i64, nu: u64, b_nu: i64, h: u64) -> Result<LemmaBound, WitnessError> {
    if h < 1 || 2 * h > nu {
        return Err(WitnessError::HOutOfRange { h, nu });
    }
    if n < 1 {
        return Err(WitnessError::InvalidInput("N must be at least 1".into()));
    }
    if a_n < n as i64 || b_nu < nu as i64 {
        return Err(WitnessError::InvalidInput(
            "largest elements must satisfy a_N ≥ N and b_ν ≥ ν".into(),
        ));
    }
    let (n, nu, h) = (n as i128, nu as i128, h as i128);
    let sum = a_n as i128 + b_nu as i128;
    // (N²ν − N(2h−1)(a_N + b_ν)) / ((a_N + b_ν)ν)
    let num = n
        .checked_mul(n)
        .and_then(|v| v.checked_mul(nu))
        .and_then(|lhs| {
            n.checked_mul(2 * h - 1)
                .and_then(|v| v.checked_mul(sum))
                .and_then(|rhs| lhs.checked_sub(rhs))
        })
        .ok_or(WitnessError::Overflow)?;
    let den = sum.checked_mul(nu).ok_or(WitnessError::Overflow)?;
    let bound = Rational::new(num, den).expect("positive denominator");
    let strict_expected = !(h == 1 && n * nu == sum);
    Ok(LemmaBound {
        bound,
        strict_expected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub x: i64,
    /// `|A ∩ (A + x)|`.
    pub multiplicity: u64,
    pub bound: Rational,
    pub bound_met: bool,
    pub strict_expected: bool,
    /// Up to [`SAMPLE_PAIRS`] pairs `(a, a + x)` inside `A`.
    pub pairs: Vec<(i64, i64)>,
    /// Up to [`SAMPLE_PAIRS`] pairs `(b_s, b_t)` of `B` with `b_s − b_t = x`.
    pub provenance: Vec<(i64, i64)>,
}

impl WitnessReport {
    /// Whether the multiplicity strictly exceeds the bound.
    pub fn strictly_above(&self) -> bool {
        self.bound.cmp_int(self.multiplicity as i128).is_lt()
    }
}

fn sample_pairs(set: &FiniteSet, x: i64, high_first: bool) -> Vec<(i64, i64)> {
    set.elements()
        .iter()
        .filter(|&&v| set.contains(v + x))
        .take(SAMPLE_PAIRS)
        .map(|&v| if high_first { (v + x, v) } else { (v, v + x) })
        .collect()
}

/// Multiplicities of `A` along `Δ(B)` with suffix maxima, so that the best
/// shift `x ≥ h` is a lookup for every `h`.
pub struct LemmaScanner<'a> {
    a: &'a FiniteSet,
    b: &'a FiniteSet,
    shifts: Vec<i64>,
    multiplicities: Vec<u64>,
    /// Index of the best shift among `shifts[i..]`, smallest shift on ties.
    best_from: Vec<usize>,
}

impl<'a> LemmaScanner<'a> {
    pub fn new(a: &'a FiniteSet, b: &'a FiniteSet) -> Result<Self, WitnessError> {
        if b.len() < 2 {
            return Err(WitnessError::HOutOfRange {
                h: 1,
                nu: b.len() as u64,
            });
        }
        let shifts = b.delta_set()?.into_elements();
        // one histogram of A costs ~N²/2, per-shift merging ~|Δ(B)|·N
        let multiplicities: Vec<u64> = if a.len() / 2 < shifts.len() {
            let hist = distance_histogram(a, Backend::preferred(a))?;
            shifts.iter().map(|&x| hist.get(x)).collect()
        } else {
            shifts.par_iter().map(|&x| a.shift_intersect_count(x)).collect()
        };
        let mut best_from = vec![0; shifts.len()];
        let mut best = shifts.len() - 1;
        for i in (0..shifts.len()).rev() {
            if multiplicities[i] >= multiplicities[best] {
                best = i;
            }
            best_from[i] = best;
        }
        Ok(LemmaScanner {
            a,
            b,
            shifts,
            multiplicities,
            best_from,
        })
    }

    pub fn witness(&self, h: u64) -> Result<WitnessReport, WitnessError> {
        let nu = self.b.len() as u64;
        let lb = lemma_bound(self.a.len() as u64, self.a.max(), nu, self.b.max(), h)?;
        let start = self.shifts.partition_point(|&x| x < h as i64);
        if start == self.shifts.len() {
            return Err(WitnessError::NoEligibleShift { h });
        }
        let i = self.best_from[start];
        let (x, multiplicity) = (self.shifts[i], self.multiplicities[i]);
        Ok(WitnessReport {
            x,
            multiplicity,
            bound: lb.bound,
            bound_met: lb.bound.cmp_int(multiplicity as i128).is_le(),
            strict_expected: lb.strict_expected,
            pairs: sample_pairs(self.a, x, false),
            provenance: sample_pairs(self.b, x, true),
        })
    }
}

/// The shift `x ∈ Δ(B)`, `x ≥ h`, maximizing `|A ∩ (A + x)|` (smallest `x`
/// on ties), checked against the exact lemma bound.
pub fn lemma_witness(a: &FiniteSet, b: &FiniteSet, h: u64) -> Result<WitnessReport, WitnessError> {
    let nu = b.len() as u64;
    if h < 1 || 2 * h > nu {
        return Err(WitnessError::HOutOfRange { h, nu });
    }
    LemmaScanner::new(a, b)?.witness(h)
}

/// A distance `d ∈ Δ(A) ∩ Δ(B)` with the pairs realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonDistanceReport {
    pub d: i64,
    /// `(a_i, a_i')` with `a_i − a_i' = d`.
    pub a_pair: (i64, i64),
    /// `(b_j', b_j)` with `b_j' − b_j = d`.
    pub b_pair: (i64, i64),
    /// Prefix sizes `(N, ν)` meeting `a_N + b_ν ≤ N·ν`; absent for fallbacks.
    pub prefix: Option<(usize, usize)>,
}

/// First `(N, ν)`, ordered by `N + ν` then `N`, with `a_N + b_ν ≤ N·ν`.
pub fn pigeonhole_prefix(a: &FiniteSet, b: &FiniteSet) -> Option<(usize, usize)> {
    let (na, nb) = (a.len(), b.len());
    (4..=na + nb).find_map(|s| {
        let lo = 2.max(s.saturating_sub(nb));
        let hi = na.min(s - 2);
        (lo..=hi).find_map(|n| {
            let nu = s - n;
            let lhs = a.elements()[n - 1] as i128 + b.elements()[nu - 1] as i128;
            (lhs <= (n * nu) as i128).then_some((n, nu))
        })
    })
}

/// Common distance from a sumset collision `a_i + b_j = a_i' + b_j'`,
/// `i > i'`, inside the first prefix pair meeting the pigeonhole
/// inequality. Collisions are ordered by the later index pair `(i, j)`.
pub fn pigeonhole_witness(a: &FiniteSet, b: &FiniteSet) -> Result<CommonDistanceReport, WitnessError> {
    let Some((n, nu)) = pigeonhole_prefix(a, b) else {
        return Err(WitnessError::HypothesisNotSatisfied {
            fallback: smallest_common_distance(a, b)?.map(Box::new),
        });
    };
    let (ae, be) = (&a.elements()[..n], &b.elements()[..nu]);
    let top = (ae[n - 1] + be[nu - 1]) as usize;
    let mut first: Vec<Option<(usize, usize)>> = vec![None; top + 1];
    for (i, &ai) in ae.iter().enumerate() {
        for (j, &bj) in be.iter().enumerate() {
            let s = (ai + bj) as usize;
            match first[s] {
                None => first[s] = Some((i, j)),
                Some((i0, j0)) => {
                    return Ok(CommonDistanceReport {
                        d: ai - ae[i0],
                        a_pair: (ai, ae[i0]),
                        b_pair: (be[j0], bj),
                        prefix: Some((n, nu)),
                    });
                }
            }
        }
    }
    unreachable!("pigeonhole: {} sums in at most {} slots", n * nu, n * nu - 1)
}

fn first_pair(set: &FiniteSet, d: i64) -> (i64, i64) {
    let lo = set
        .elements()
        .iter()
        .copied()
        .find(|&v| set.contains(v + d))
        .expect("d is a distance of the set");
    (lo + d, lo)
}

/// Smallest `d ∈ Δ(A) ∩ Δ(B)`, if any.
pub fn smallest_common_distance(a: &FiniteSet, b: &FiniteSet) -> Result<Option<CommonDistanceReport>, SetError> {
    if a.len() < 2 || b.len() < 2 {
        return Ok(None);
    }
    let (da, db) = (a.delta_set()?, b.delta_set()?);
    let common = sorted_intersection(da.elements(), db.elements());
    Ok(common.first().map(|&d| CommonDistanceReport {
        d,
        a_pair: first_pair(a, d),
        b_pair: first_pair(b, d),
        prefix: None,
    }))
}

/// Best shift at one cut-off `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KhintchinePoint {
    pub n: i64,
    pub x: i64,
    /// `|A ∩ (A + x) ∩ [1, n]|`.
    pub count: u64,
    /// `count / n`.
    pub density: Rational,
    /// `(|A ∩ [1, n]| / n)²`.
    pub reference: Rational,
    /// `(b_ν + 1) / n`, the finite-size slack.
    pub correction: Rational,
}

/// For every cut-off `n`, the `x ∈ Δ(B)` maximizing `|A ∩ (A + x) ∩ [1, n]|`
/// (smallest `x` on ties).
pub fn khintchine_scan(a: &FiniteSet, b: &FiniteSet, grid: &[i64]) -> Result<Vec<KhintchinePoint>, WitnessError> {
    let shifts = b.delta_set()?.into_elements();
    grid.iter()
        .map(|&n| {
            if n < 1 || n > a.max() {
                return Err(WitnessError::GridOutOfRange { n, max: a.max() });
            }
            let reach = n - a.min();
            let live = &shifts[..shifts.partition_point(|&x| x <= reach)];
            // max by (count, -x) is a total order, so the parallel
            // reduction is independent of the split
            let (count, Reverse(x)) = live
                .par_iter()
                .map(|&x| (a.shift_intersect_count_upto(x, n), Reverse(x)))
                .max()
                .filter(|&(c, _)| c > 0)
                .unwrap_or((0, Reverse(shifts[0])));
            let base = a.prefix_count(n) as i128;
            let nn = n as i128;
            Ok(KhintchinePoint {
                n,
                x,
                count,
                density: Rational::new(count as i128, nn).unwrap(),
                reference: Rational::new(base * base, nn * nn).unwrap(),
                correction: Rational::new(b.max() as i128 + 1, nn).unwrap(),
            })
        })
        .collect()
}

/// Sumset collision search with no prefix restriction, in the same
/// `(i, j)` order as [`pigeonhole_witness`].
pub fn first_sumset_collision(a: &FiniteSet, b: &FiniteSet) -> Option<CommonDistanceReport> {
    let mut seen: HashMap<i64, (i64, i64)> = HashMap::new();
    for &ai in a.elements() {
        for &bj in b.elements() {
            if let Some(&(a0, b0)) = seen.get(&(ai + bj)) {
                return Some(CommonDistanceReport {
                    d: ai - a0,
                    a_pair: (ai, a0),
                    b_pair: (b0, bj),
                    prefix: None,
                });
            }
            seen.insert(ai + bj, (ai, bj));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[i64]) -> FiniteSet {
        FiniteSet::from_elements(v.to_vec()).unwrap()
    }

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn bound_values() {
        let lb = lemma_bound(4, 5, 4, 4, 1).unwrap();
        assert_eq!(lb.bound, r(7, 9));
        assert!(lb.strict_expected);
        let lb = lemma_bound(2, 2, 2, 2, 1).unwrap();
        assert_eq!(lb.bound, r(0, 1));
        assert!(!lb.strict_expected);
        let lb = lemma_bound(4, 5, 4, 4, 2).unwrap();
        assert_eq!(lb.bound, r(-11, 9));
        assert!(lb.strict_expected);
    }

    #[test]
    fn bound_input_errors() {
        assert_eq!(lemma_bound(4, 5, 4, 4, 3), Err(WitnessError::HOutOfRange { h: 3, nu: 4 }));
        assert_eq!(lemma_bound(4, 5, 4, 4, 0), Err(WitnessError::HOutOfRange { h: 0, nu: 4 }));
        assert!(matches!(lemma_bound(4, 3, 4, 4, 1), Err(WitnessError::InvalidInput(_))));
    }

    #[test]
    fn lemma_examples() {
        let (a, b) = (set(&[1, 2, 3, 5]), set(&[1, 2, 3, 4]));
        let w = lemma_witness(&a, &b, 1).unwrap();
        assert_eq!((w.x, w.multiplicity), (1, 2));
        assert_eq!(w.bound, r(7, 9));
        assert!(w.bound_met && w.strict_expected && w.strictly_above());
        assert_eq!(w.pairs, vec![(1, 2), (2, 3)]);
        assert_eq!(w.provenance, vec![(2, 1), (3, 2), (4, 3)]);

        let w = lemma_witness(&a, &b, 2).unwrap();
        assert_eq!((w.x, w.multiplicity), (2, 2));

        let one_two = set(&[1, 2]);
        let w = lemma_witness(&one_two, &one_two, 1).unwrap();
        assert_eq!((w.x, w.multiplicity), (1, 1));
        assert_eq!(w.bound, r(0, 1));
        assert!(w.bound_met && !w.strict_expected);
    }

    #[test]
    fn lemma_witness_range_errors() {
        let a = set(&[1, 2, 3]);
        assert!(matches!(lemma_witness(&a, &set(&[4]), 1), Err(WitnessError::HOutOfRange { .. })));
        assert!(matches!(lemma_witness(&a, &set(&[1, 5, 9]), 2), Err(WitnessError::HOutOfRange { .. })));
    }

    #[test]
    fn pigeonhole_examples() {
        let one_two = set(&[1, 2]);
        let w = pigeonhole_witness(&one_two, &one_two).unwrap();
        assert_eq!(w.d, 1);
        assert_eq!(w.a_pair, (2, 1));
        assert_eq!(w.b_pair, (2, 1));
        assert_eq!(w.prefix, Some((2, 2)));

        // 3N + 2ν ≤ Nν never holds for N, ν ≤ 4; the full sets still share 6
        let a = set(&[3, 6, 9, 12]);
        let b = set(&[2, 4, 6, 8]);
        match pigeonhole_witness(&a, &b) {
            Err(WitnessError::HypothesisNotSatisfied { fallback: Some(f) }) => {
                assert_eq!(f.d, 6);
                assert_eq!(f.a_pair, (9, 3));
                assert_eq!(f.b_pair, (8, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        let c = first_sumset_collision(&a, &b).unwrap();
        assert_eq!((c.d, c.a_pair, c.b_pair), (6, (9, 3), (8, 2)));
    }

    #[test]
    fn khintchine_examples() {
        let mult3 = FiniteSet::from_elements((1..=100).map(|i| 3 * i).collect::<Vec<_>>()).unwrap();
        let p = khintchine_scan(&mult3, &set(&[1, 4, 7]), &[300]).unwrap();
        assert_eq!((p[0].x, p[0].count), (3, 99));
        assert_eq!(p[0].density, r(99, 300));

        let full = FiniteSet::from_elements((1..=100).collect::<Vec<_>>()).unwrap();
        let p = khintchine_scan(&full, &set(&[1, 2]), &[100]).unwrap();
        assert_eq!((p[0].x, p[0].count), (1, 99));
        assert_eq!(p[0].reference, r(1, 1));

        let p = khintchine_scan(&set(&[1, 2, 4, 8]), &set(&[5, 10]), &[8]).unwrap();
        assert_eq!((p[0].x, p[0].count), (5, 0));
        assert_eq!(p[0].density, r(0, 1));

        assert!(matches!(
            khintchine_scan(&set(&[1, 2, 4, 8]), &set(&[5, 10]), &[9]),
            Err(WitnessError::GridOutOfRange { .. })
        ));
    }
}
