//! Finite strictly increasing sets of positive integers.

use std::fmt;
use std::io;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::Indicator;
use crate::histogram::{distance_histogram, Backend};

/// Largest admissible element. Keeps `a + b` and `a * k` for small `k`
/// inside `i64`.
pub const MAX_ELEMENT: i64 = 1 << 62;

/// Sets whose largest element exceeds this do not get an indicator vector.
pub const INDICATOR_LIMIT: i64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("set must contain at least one element")]
    Empty,
    #[error("elements not strictly increasing at index {index}")]
    NotIncreasing { index: usize },
    #[error("element {value} at index {index} is not a positive integer")]
    NonPositiveElement { index: usize, value: i64 },
    #[error("element {value} exceeds 2^62")]
    Overflow { value: i64 },
    #[error("a one-element set has an empty distance set")]
    SingletonSet,
    #[error("largest element {max} is above the indicator limit {INDICATOR_LIMIT}")]
    IndicatorTooLarge { max: i64 },
}

/// A finite set `a_1 < a_2 < ... < a_N` of positive integers.
///
/// The indicator bit-vector used by the word-parallel routines is built on
/// first use and cached.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "SetFile", into = "SetFile")]
pub struct FiniteSet {
    elements: Vec<i64>,
    indicator: OnceLock<Option<Indicator>>,
}

/// On-disk form: `{"elements": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetFile {
    elements: Vec<i64>,
}

impl TryFrom<SetFile> for FiniteSet {
    type Error = SetError;

    fn try_from(file: SetFile) -> Result<Self, SetError> {
        FiniteSet::from_elements(file.elements)
    }
}

impl From<FiniteSet> for SetFile {
    fn from(set: FiniteSet) -> Self {
        SetFile {
            elements: set.elements,
        }
    }
}

impl PartialEq for FiniteSet {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl Eq for FiniteSet {}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elements.iter()).finish()
    }
}

impl FiniteSet {
    pub fn from_elements(values: impl Into<Vec<i64>>) -> Result<Self, SetError> {
        let elements = values.into();
        if elements.is_empty() {
            return Err(SetError::Empty);
        }
        for (index, &value) in elements.iter().enumerate() {
            if value < 1 {
                return Err(SetError::NonPositiveElement { index, value });
            }
            if value > MAX_ELEMENT {
                return Err(SetError::Overflow { value });
            }
            if index > 0 && value <= elements[index - 1] {
                return Err(SetError::NotIncreasing { index });
            }
        }
        Ok(FiniteSet {
            elements,
            indicator: OnceLock::new(),
        })
    }

    pub fn elements(&self) -> &[i64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<i64> {
        self.elements
    }

    /// `N`, the number of elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false: a `FiniteSet` is non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> i64 {
        self.elements[0]
    }

    pub fn max(&self) -> i64 {
        self.elements[self.elements.len() - 1]
    }

    /// `a_N - a_1`, the largest possible distance.
    pub fn span(&self) -> i64 {
        self.max() - self.min()
    }

    /// The `n`-th element, 1-indexed.
    pub fn nth(&self, n: usize) -> Option<i64> {
        n.checked_sub(1).and_then(|i| self.elements.get(i).copied())
    }

    pub fn contains(&self, value: i64) -> bool {
        self.elements.binary_search(&value).is_ok()
    }

    /// The first `n` elements as a set. `n` is clamped to `1..=N`.
    pub fn prefix(&self, n: usize) -> FiniteSet {
        let n = n.clamp(1, self.len());
        FiniteSet {
            elements: self.elements[..n].to_vec(),
            indicator: OnceLock::new(),
        }
    }

    /// Adds `t` to every element.
    pub fn translate(&self, t: i64) -> Result<FiniteSet, SetError> {
        FiniteSet::from_elements(self.elements.iter().map(|&a| a + t).collect::<Vec<_>>())
    }

    /// Word-packed indicator over `[a_1, a_N]`, or an error when `a_N`
    /// exceeds [`INDICATOR_LIMIT`].
    pub fn indicator(&self) -> Result<&Indicator, SetError> {
        self.indicator
            .get_or_init(|| {
                (self.max() <= INDICATOR_LIMIT).then(|| Indicator::from_sorted(&self.elements))
            })
            .as_ref()
            .ok_or(SetError::IndicatorTooLarge { max: self.max() })
    }

    /// `|A ∩ (A + x)|`. For `x = 0` this is `N`; negative shifts give the
    /// same count as their absolute value.
    pub fn shift_intersect_count(&self, x: i64) -> u64 {
        self.shift_intersect_count_upto(x, i64::MAX)
    }

    /// `|A ∩ (A + x) ∩ [1, n]|`: elements `a ≤ n` with `a - x` also in `A`.
    pub fn shift_intersect_count_upto(&self, x: i64, n: i64) -> u64 {
        let x = x.abs();
        if x == 0 {
            return self.prefix_count(n) as u64;
        }
        let a = &self.elements;
        let mut lo = 0usize;
        let mut count = 0u64;
        for &hi in a.iter().skip(1) {
            if hi > n {
                break;
            }
            let target = hi - x;
            while lo < a.len() && a[lo] < target {
                lo += 1;
            }
            if lo < a.len() && a[lo] == target {
                count += 1;
            }
        }
        count
    }

    /// The counting function `A(u) = |{a ∈ A : a ≤ u}|`.
    pub fn prefix_count(&self, u: i64) -> usize {
        self.elements.partition_point(|&a| a <= u)
    }

    /// `Δ(A) = {a - a' : a, a' ∈ A, a > a'}`.
    pub fn delta_set(&self) -> Result<FiniteSet, SetError> {
        if self.len() < 2 {
            return Err(SetError::SingletonSet);
        }
        let hist = distance_histogram(self, Backend::preferred(self))?;
        FiniteSet::from_elements(hist.support())
    }

    /// The shifts `x ∈ [1, x_max]` with `|A ∩ (A + x)| ≥ k`, ascending.
    /// Shifts beyond `a_N - a_1` never qualify, so larger `x_max` is
    /// harmless.
    pub fn recursion_set(&self, k: u64, x_max: i64) -> Vec<i64> {
        let k = k.max(1);
        if self.len() < 2 {
            return Vec::new();
        }
        let hist = distance_histogram(self, Backend::preferred(self))
            .expect("preferred backend never refuses");
        hist.iter()
            .take_while(|&(x, _)| x <= x_max)
            .filter(|&(_, c)| c >= k)
            .map(|(x, _)| x)
            .collect()
    }

    pub fn load_json(path: &Path) -> io::Result<FiniteSet> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("set serialization is infallible")
    }
}

/// Elements of two sorted slices that occur in both.
pub fn sorted_intersection(a: &[i64], b: &[i64]) -> Vec<i64> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[i64]) -> FiniteSet {
        FiniteSet::from_elements(v.to_vec()).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert_eq!(set(&[1, 2, 4, 8]).elements(), &[1, 2, 4, 8]);
        assert_eq!(
            FiniteSet::from_elements(vec![1, 1, 2]),
            Err(SetError::NotIncreasing { index: 1 })
        );
        assert_eq!(
            FiniteSet::from_elements(vec![0, 3]),
            Err(SetError::NonPositiveElement { index: 0, value: 0 })
        );
        assert_eq!(
            FiniteSet::from_elements(vec![1, MAX_ELEMENT + 1]),
            Err(SetError::Overflow {
                value: MAX_ELEMENT + 1
            })
        );
        assert_eq!(FiniteSet::from_elements(vec![]), Err(SetError::Empty));
        assert!(FiniteSet::from_elements(vec![MAX_ELEMENT]).is_ok());
    }

    #[test]
    fn shift_counts() {
        let a = set(&[1, 2, 3, 5]);
        assert_eq!(a.shift_intersect_count(1), 2);
        assert_eq!(a.shift_intersect_count(0), 4);
        assert_eq!(set(&[1, 2, 4, 8]).shift_intersect_count(5), 0);
        assert_eq!(a.shift_intersect_count(-1), 2);
        assert_eq!(a.shift_intersect_count(100), 0);
    }

    #[test]
    fn shift_counts_restricted_to_interval() {
        let a = FiniteSet::from_elements((1..=10).map(|i| 3 * i).collect::<Vec<_>>()).unwrap();
        // pairs (3,6), (6,9), ...; upper element must be <= n
        assert_eq!(a.shift_intersect_count_upto(3, 30), 9);
        assert_eq!(a.shift_intersect_count_upto(3, 12), 3);
        assert_eq!(a.shift_intersect_count_upto(3, 5), 0);
    }

    #[test]
    fn delta_sets() {
        assert_eq!(set(&[1, 2, 4, 8]).delta_set().unwrap(), set(&[1, 2, 3, 4, 6, 7]));
        assert_eq!(set(&[10, 11]).delta_set().unwrap(), set(&[1]));
        assert_eq!(set(&[5]).delta_set(), Err(SetError::SingletonSet));
    }

    #[test]
    fn recursion_sets() {
        let a = set(&[1, 2, 3, 5]);
        assert_eq!(a.recursion_set(2, 4), vec![1, 2]);
        assert_eq!(a.recursion_set(1, 4), vec![1, 2, 3, 4]);
        assert_eq!(set(&[1, 2, 4, 8]).recursion_set(2, 7), Vec::<i64>::new());
        assert_eq!(a.recursion_set(1, 2), vec![1, 2]);
    }

    #[test]
    fn counting_function() {
        let a = set(&[1, 2, 4, 8]);
        assert_eq!(a.prefix_count(5), 3);
        assert_eq!(a.prefix_count(8), 4);
        assert_eq!(set(&[3, 6, 9]).prefix_count(2), 0);
        assert_eq!(a.prefix_count(0), 0);
    }

    #[test]
    fn json_format_round_trip() {
        let a = set(&[1, 4, 5, 16, 17]);
        assert_eq!(a.to_json(), r#"{"elements":[1,4,5,16,17]}"#);
        let back: FiniteSet = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<FiniteSet>(r#"{"elements":[3,2]}"#).is_err());
        assert!(serde_json::from_str::<FiniteSet>(r#"{"elements":[]}"#).is_err());
    }

    #[test]
    fn indicator_refused_above_limit() {
        let a = set(&[1, INDICATOR_LIMIT + 1]);
        assert!(matches!(a.indicator(), Err(SetError::IndicatorTooLarge { .. })));
        // delta_set still works through the pair backend
        assert_eq!(a.delta_set().unwrap(), set(&[INDICATOR_LIMIT]));
    }

    fn arb_set() -> impl Strategy<Value = FiniteSet> {
        proptest::collection::btree_set(1i64..5_000, 1..120)
            .prop_map(|s| FiniteSet::from_elements(s.into_iter().collect::<Vec<_>>()).unwrap())
    }

    proptest! {
        #[test]
        fn indicator_agrees_with_elements(a in arb_set()) {
            let ind = a.indicator().unwrap();
            for v in a.min()..=a.max() {
                prop_assert_eq!(ind.contains(v), a.contains(v));
            }
        }

        #[test]
        fn counting_function_at_elements(a in arb_set()) {
            for (i, &v) in a.elements().iter().enumerate() {
                prop_assert_eq!(a.prefix_count(v), i + 1);
            }
        }

        #[test]
        fn delta_set_is_shift_invariant(a in arb_set(), t in 0i64..10_000) {
            prop_assume!(a.len() >= 2);
            prop_assert_eq!(a.translate(t).unwrap().delta_set().unwrap(), a.delta_set().unwrap());
        }

        #[test]
        fn distinct_distance_bounds(a in arb_set()) {
            prop_assume!(a.len() >= 2);
            let n = a.len();
            let d = a.delta_set().unwrap().len();
            prop_assert!(n - 1 <= d && d <= n * (n - 1) / 2);
        }

        #[test]
        fn recursion_set_is_monotone_under_prefixes(a in arb_set(), k in 1u64..4, cut in 2usize..120) {
            prop_assume!(a.len() >= 2);
            let p = a.prefix(cut);
            for x in p.recursion_set(k, p.span()) {
                prop_assert!(a.shift_intersect_count(x) >= k);
            }
        }
    }
}
