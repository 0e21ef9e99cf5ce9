//! Multiplicities `c_A(x) = |A ∩ (A + x)|` for every distance `x` at once.
//!
//! Two independent backends: pair enumeration and word-parallel
//! autocorrelation of the indicator vector. They must agree exactly.

use std::collections::{BTreeMap, HashMap};
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::finite_set::{FiniteSet, SetError};

/// Dense count buffers are used for spans up to this many distances.
const DENSE_SPAN_LIMIT: i64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Enumerates all `N(N-1)/2` pairs.
    Naive,
    /// One popcount of `bits & (bits >> x)` per distance `x`.
    #[serde(rename = "bitparallel")]
    BitParallel,
}

impl Backend {
    /// The cheaper backend for `set`: pair enumeration costs about `N²/2`,
    /// autocorrelation about `span²/64` word operations.
    pub fn preferred(set: &FiniteSet) -> Backend {
        let n = set.len() as f64;
        let span = set.span() as f64;
        let pair_cost = n * n / 2.0;
        let word_cost = span * (span / 64.0 + 1.0);
        if set.indicator().is_ok() && word_cost < pair_cost {
            Backend::BitParallel
        } else {
            Backend::Naive
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "naive" => Ok(Backend::Naive),
            "bitparallel" => Ok(Backend::BitParallel),
            other => Err(format!("unknown backend `{other}` (expected naive|bitparallel)")),
        }
    }
}

/// Exact distance multiplicities of a finite set. Absent distances have
/// multiplicity zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceHistogram {
    counts: BTreeMap<i64, u64>,
    source_size: usize,
}

impl DistanceHistogram {
    pub fn get(&self, x: i64) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    /// `(x, c(x))` pairs in ascending `x`, zero counts omitted.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    /// The distinct distances, ascending.
    pub fn support(&self) -> Vec<i64> {
        self.counts.keys().copied().collect()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    /// `Σ_x c(x)`, which equals `N(N-1)/2`.
    pub fn total_pairs(&self) -> u64 {
        self.counts.values().sum()
    }

    /// CSV with header `x,count`, ascending `x`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "count"])?;
        for (x, c) in self.iter() {
            w.write_record([x.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

pub fn distance_histogram(set: &FiniteSet, backend: Backend) -> Result<DistanceHistogram, SetError> {
    let counts = match backend {
        Backend::Naive => naive_counts(set.elements()),
        Backend::BitParallel => bitparallel_counts(set)?,
    };
    Ok(DistanceHistogram {
        counts,
        source_size: set.len(),
    })
}

fn naive_counts(a: &[i64]) -> BTreeMap<i64, u64> {
    let span = a[a.len() - 1] - a[0];
    if span <= DENSE_SPAN_LIMIT {
        let mut dense = vec![0u64; span as usize + 1];
        for (j, &hi) in a.iter().enumerate() {
            for &lo in &a[..j] {
                dense[(hi - lo) as usize] += 1;
            }
        }
        dense
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|&(_, c)| c > 0)
            .map(|(x, c)| (x as i64, c))
            .collect()
    } else {
        let mut sparse: HashMap<i64, u64> = HashMap::new();
        for (j, &hi) in a.iter().enumerate() {
            for &lo in &a[..j] {
                *sparse.entry(hi - lo).or_default() += 1;
            }
        }
        sparse.into_iter().collect()
    }
}

fn bitparallel_counts(set: &FiniteSet) -> Result<BTreeMap<i64, u64>, SetError> {
    let ind = set.indicator()?;
    let span = set.span() as usize;
    // indexed par_iter collects in order, so the result does not depend on
    // the worker count
    let counts: Vec<u64> = (1..=span)
        .into_par_iter()
        .map(|x| ind.shifted_and_count(x))
        .collect();
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (i as i64 + 1, c))
        .collect())
}
