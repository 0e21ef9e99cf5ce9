//! Distance sets, k-recursion sets and finite intersection witnesses.
//!
//! For a finite set `A = {a_1 < … < a_N}` of positive integers this crate
//! computes `Δ(A)`, the multiplicities `|A ∩ (A + x)|`, and the k-recursion
//! sets `R_k(A)`; it searches for shifts `x ∈ Δ(B)` certifying large
//! intersections, evaluates growth-rate hypotheses as finite-prefix ratio
//! series, and bundles canned experiments.

pub mod bitset;
pub mod diagnostics;
pub mod experiments;
pub mod finite_set;
pub mod histogram;
pub mod rational;
pub mod report;
pub mod sequence;
pub mod witness;

pub use diagnostics::{
    power_constant_check, ratio_series, theorem_condition_check, DiagnosticError, DiagnosticKind,
    Grid, PowerVerdict, RatioSeries, TheoremId, ThetaSpec, Verdict,
};
pub use experiments::{run_experiment, ExperimentError, ExperimentParams, ExperimentReport};
pub use finite_set::{FiniteSet, SetError};
pub use histogram::{distance_histogram, Backend, DistanceHistogram};
pub use rational::Rational;
pub use sequence::{builtin_term, generate, parse_spec, Builtin, GenerationReport, SequenceError, SequenceSpec};
pub use witness::{
    khintchine_scan, lemma_bound, lemma_witness, pigeonhole_witness, CommonDistanceReport,
    KhintchinePoint, LemmaBound, WitnessError, WitnessReport,
};
