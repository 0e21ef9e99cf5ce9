//! Finite-prefix ratio series standing in for liminf/limsup hypotheses.
//!
//! Every limit is replaced by a running infimum or supremum over a trailing
//! window of a finite grid. Verdicts built from these series are evidence,
//! never proofs, and carry a caveat saying so.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::finite_set::FiniteSet;
use crate::rational::Rational;
use crate::report::round_sig;
use crate::sequence::{parse_spec, Expr, SequenceError, SequenceSpec};

pub const CAVEAT: &str = "finite-prefix heuristic";

/// Margins smaller than this are reported as inconclusive.
pub const COMPARISON_SLACK: f64 = 1e-12;

/// Default cut-off below which a windowed infimum counts as "zero".
pub const DEFAULT_ZERO_TOL: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticError {
    #[error("{kind} needs parameter `{param}`")]
    KindParamMissing { kind: String, param: &'static str },
    #[error("{kind} needs a second sequence B")]
    SecondSequenceMissing { kind: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error("bad grid `{0}` (expected `a,b,c`, `lo..hi` or `lo..hi*ratio`)")]
    BadGrid(String),
    #[error("theta: {0}")]
    Theta(#[from] SequenceError),
    #[error("no grid point could be evaluated for {kind}")]
    EmptySeries { kind: String },
}

/// Which ratio a series tracks. `f(n) = a_n/n`, `g(n) = b_n/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagnosticKind {
    /// `(a_n + b_n) / n²`
    SumOverNsq,
    /// `g(⌊c·f(n)⌋) / n`
    GOfCfOverN,
    /// `f(⌊ε·b_n⌋) / n`
    FOfEpsBOverN,
    /// `a_{b_n} / (n·b_n)`
    ABnOverNBn,
    /// `a_{n·b_n} / (n²·b_n)`
    ANBnOverN2Bn,
    /// `a_n / (n·θ(n))`
    AOverNTheta,
    /// `θ(b_n) / n`
    ThetaBOverN,
    /// `θ(n·b_n) / n`
    ThetaNBOverN,
}

impl DiagnosticKind {
    const NAMES: [(&'static str, DiagnosticKind); 8] = [
        ("sum-over-nsq", DiagnosticKind::SumOverNsq),
        ("g-cf-over-n", DiagnosticKind::GOfCfOverN),
        ("f-epsb-over-n", DiagnosticKind::FOfEpsBOverN),
        ("a-bn-over-n-bn", DiagnosticKind::ABnOverNBn),
        ("a-nbn-over-n2-bn", DiagnosticKind::ANBnOverN2Bn),
        ("a-over-n-theta", DiagnosticKind::AOverNTheta),
        ("theta-b-over-n", DiagnosticKind::ThetaBOverN),
        ("theta-nb-over-n", DiagnosticKind::ThetaNBOverN),
    ];

    pub fn name(self) -> &'static str {
        DiagnosticKind::NAMES.iter().find(|(_, k)| *k == self).unwrap().0
    }

    pub fn needs_b(self) -> bool {
        !matches!(self, DiagnosticKind::AOverNTheta)
    }

    fn needs_theta(self) -> bool {
        matches!(
            self,
            DiagnosticKind::AOverNTheta | DiagnosticKind::ThetaBOverN | DiagnosticKind::ThetaNBOverN
        )
    }
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for DiagnosticKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for DiagnosticKind {
    type Err = DiagnosticError;

    fn from_str(s: &str) -> Result<Self, DiagnosticError> {
        let alias = match s {
            "T2.3" => Some(DiagnosticKind::SumOverNsq),
            "C3.3" => Some(DiagnosticKind::ABnOverNBn),
            "T4.1" => Some(DiagnosticKind::ANBnOverN2Bn),
            _ => None,
        };
        alias
            .or_else(|| DiagnosticKind::NAMES.iter().find(|(n, _)| *n == s).map(|&(_, k)| k))
            .ok_or_else(|| DiagnosticError::Unknown {
                what: "diagnostic kind",
                name: s.to_string(),
            })
    }
}

/// A positive function `θ` given as a formula in `n`, e.g. `log(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSpec {
    text: String,
    expr: Expr,
}

impl ThetaSpec {
    pub fn parse(text: &str) -> Result<ThetaSpec, DiagnosticError> {
        match parse_spec(text)? {
            SequenceSpec::Formula(expr) => Ok(ThetaSpec {
                text: text.trim().to_string(),
                expr,
            }),
            SequenceSpec::Builtin(b) => Err(DiagnosticError::Domain(format!(
                "theta must be a formula in n, not the builtin `{b}`"
            ))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.expr.eval(x)
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl Serialize for ThetaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

/// Trailing window for running inf/sup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    /// The most recent half of the points seen so far.
    #[default]
    TrailingHalf,
    /// The most recent `w` points.
    Last(usize),
}

impl Window {
    fn start(self, j: usize) -> usize {
        match self {
            Window::TrailingHalf => j.div_ceil(2),
            Window::Last(w) => (j + 1).saturating_sub(w.max(1)),
        }
    }
}

/// Grid constructors for the cut-offs `n`.
pub struct Grid;

impl Grid {
    /// Distinct values `⌊ratio^j⌋` inside `[lo, hi]`, plus `hi` itself.
    pub fn geometric(lo: i64, hi: i64, ratio: f64) -> Vec<i64> {
        assert!(ratio > 1.0, "geometric grid needs ratio > 1");
        let mut out = Vec::new();
        let mut x = 1.0f64;
        while x <= hi as f64 {
            let n = x.floor() as i64;
            if n >= lo && out.last() != Some(&n) {
                out.push(n);
            }
            x *= ratio;
        }
        if hi >= lo.max(1) && out.last() != Some(&hi) {
            out.push(hi);
        }
        out
    }

    /// `a,b,c`, `lo..hi` (every integer) or `lo..hi*ratio` (geometric).
    pub fn parse(text: &str) -> Result<Vec<i64>, DiagnosticError> {
        let bad = || DiagnosticError::BadGrid(text.to_string());
        let mut grid = if let Some((lo, rest)) = text.split_once("..") {
            let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
            match rest.split_once('*') {
                Some((hi, r)) => {
                    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
                    let r: f64 = r.trim().parse().map_err(|_| bad())?;
                    if r.is_nan() || r <= 1.0 {
                        return Err(bad());
                    }
                    Grid::geometric(lo, hi, r)
                }
                None => {
                    let hi: i64 = rest.trim().parse().map_err(|_| bad())?;
                    (lo..=hi).collect()
                }
            }
        } else {
            text.split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>, _>>()?
        };
        grid.sort_unstable();
        grid.dedup();
        if grid.is_empty() || grid[0] < 1 {
            return Err(bad());
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub n: i64,
    pub value: f64,
    pub running_inf: f64,
    pub running_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub n: i64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSeries {
    pub kind: DiagnosticKind,
    pub points: Vec<SeriesPoint>,
    pub skipped: Vec<SkippedPoint>,
    pub caveat: &'static str,
}

impl RatioSeries {
    /// Running infimum at the last grid point.
    pub fn liminf_estimate(&self) -> Option<f64> {
        self.points.last().map(|p| p.running_inf)
    }

    pub fn limsup_estimate(&self) -> Option<f64> {
        self.points.last().map(|p| p.running_sup)
    }

    /// CSV with header `n,value,running_inf,running_sup`, values rounded to
    /// 12 significant digits.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "value", "running_inf", "running_sup"])?;
        for p in &self.points {
            w.write_record([
                p.n.to_string(),
                round_sig(p.value).to_string(),
                round_sig(p.running_inf).to_string(),
                round_sig(p.running_sup).to_string(),
            ])?;
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

/// Optional inputs of [`ratio_series`].
#[derive(Debug, Clone, Default)]
pub struct SeriesParams {
    pub theta: Option<ThetaSpec>,
    /// `c` for [`DiagnosticKind::GOfCfOverN`], `ε` for
    /// [`DiagnosticKind::FOfEpsBOverN`].
    pub constant: Option<f64>,
    pub window: Window,
}

/// `⌊c · p / q⌋` computed exactly from the binary expansion of `c`.
pub fn floor_scaled(c: f64, p: i64, q: i64) -> Option<i64> {
    if !(c.is_finite() && c >= 0.0) || p < 0 || q <= 0 {
        return None;
    }
    if c == 0.0 {
        return Some(0);
    }
    let bits = c.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let prod = (mant as i128).checked_mul(p as i128)?;
    let v = if e >= 0 {
        prod.checked_mul(1i128.checked_shl(e as u32)?)? / q as i128
    } else {
        // ⌊⌊X/q⌋ / 2^k⌋ = ⌊X / (q·2^k)⌋ for non-negative X
        let k = (-e) as u32;
        if k >= 127 {
            0
        } else {
            (prod / q as i128) >> k
        }
    };
    i64::try_from(v).ok()
}

fn ratio(num: i128, den: i128) -> f64 {
    Rational::new(num, den).expect("positive denominator").to_f64()
}

/// Evaluates one point; `Err` carries the reason it was skipped.
fn series_value(
    kind: DiagnosticKind,
    a: &FiniteSet,
    b: Option<&FiniteSet>,
    n: i64,
    params: &SeriesParams,
) -> Result<f64, String> {
    let idx = |set: &FiniteSet, m: i64, what: &str| -> Result<i64, String> {
        usize::try_from(m)
            .ok()
            .and_then(|m| set.nth(m))
            .ok_or_else(|| format!("index {what} = {m} outside 1..={}", set.len()))
    };
    let theta = |x: f64| -> Result<f64, String> {
        let t = params.theta.as_ref().expect("checked by caller").eval(x);
        if t.is_finite() && t > 0.0 {
            Ok(t)
        } else {
            Err(format!("theta({x}) = {t} is not positive"))
        }
    };
    let nn = n as i128;
    let a_n = || idx(a, n, "n");
    let b_n = || idx(b.expect("checked by caller"), n, "n");
    match kind {
        DiagnosticKind::SumOverNsq => Ok(ratio(a_n()? as i128 + b_n()? as i128, nn * nn)),
        DiagnosticKind::GOfCfOverN => {
            let c = params.constant.expect("checked by caller");
            let tau = floor_scaled(c, a_n()?, n).ok_or("c·f(n) out of range")?;
            let b_tau = idx(b.unwrap(), tau, "⌊c·f(n)⌋")?;
            Ok(ratio(b_tau as i128, tau as i128 * nn))
        }
        DiagnosticKind::FOfEpsBOverN => {
            let eps = params.constant.expect("checked by caller");
            let sigma = floor_scaled(eps, b_n()?, 1).ok_or("ε·b_n out of range")?;
            let a_sigma = idx(a, sigma, "⌊ε·b_n⌋")?;
            Ok(ratio(a_sigma as i128, sigma as i128 * nn))
        }
        DiagnosticKind::ABnOverNBn => {
            let m = b_n()?;
            Ok(ratio(idx(a, m, "b_n")? as i128, nn * m as i128))
        }
        DiagnosticKind::ANBnOverN2Bn => {
            let bn = b_n()?;
            let m = n.checked_mul(bn).ok_or("n·b_n overflows")?;
            Ok(ratio(idx(a, m, "n·b_n")? as i128, nn * nn * bn as i128))
        }
        DiagnosticKind::AOverNTheta => Ok(a_n()? as f64 / (n as f64 * theta(n as f64)?)),
        DiagnosticKind::ThetaBOverN => Ok(theta(b_n()? as f64)? / n as f64),
        DiagnosticKind::ThetaNBOverN => Ok(theta(n as f64 * b_n()? as f64)? / n as f64),
    }
}

fn check_inputs(kind: DiagnosticKind, b: Option<&FiniteSet>, params: &SeriesParams) -> Result<(), DiagnosticError> {
    if kind.needs_b() && b.is_none() {
        return Err(DiagnosticError::SecondSequenceMissing {
            kind: kind.to_string(),
        });
    }
    if kind.needs_theta() && params.theta.is_none() {
        return Err(DiagnosticError::KindParamMissing {
            kind: kind.to_string(),
            param: "theta",
        });
    }
    let constant = match kind {
        DiagnosticKind::GOfCfOverN => Some("c"),
        DiagnosticKind::FOfEpsBOverN => Some("eps"),
        _ => None,
    };
    if let Some(param) = constant {
        match params.constant {
            None => {
                return Err(DiagnosticError::KindParamMissing {
                    kind: kind.to_string(),
                    param,
                })
            }
            Some(v) if !(v.is_finite() && v > 0.0) => {
                return Err(DiagnosticError::Domain(format!("{param} must be positive")))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Evaluates `kind` at every grid point. Points whose required indices fall
/// outside the available prefixes are skipped and listed.
pub fn ratio_series(
    a: &FiniteSet,
    b: Option<&FiniteSet>,
    kind: DiagnosticKind,
    grid: &[i64],
    params: &SeriesParams,
) -> Result<RatioSeries, DiagnosticError> {
    check_inputs(kind, b, params)?;
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    let mut grid = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    for n in grid {
        if n < 1 {
            skipped.push(SkippedPoint {
                n,
                reason: "n must be positive".into(),
            });
            continue;
        }
        match series_value(kind, a, b, n, params) {
            Ok(v) => values.push((n, v)),
            Err(reason) => skipped.push(SkippedPoint { n, reason }),
        }
    }
    let points = values
        .iter()
        .enumerate()
        .map(|(j, &(n, value))| {
            let window = &values[params.window.start(j)..=j];
            let running_inf = window.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let running_sup = window.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            SeriesPoint {
                n,
                value,
                running_inf,
                running_sup,
            }
        })
        .collect();
    Ok(RatioSeries {
        kind,
        points,
        skipped,
        caveat: CAVEAT,
    })
}

/// Hypotheses that can be checked on finite prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    /// `liminf (a_n + b_n)/n² = 0`
    T2_3,
    /// `liminf g(⌊c f(n)⌋)/n < 1 − 1/c`
    T3_1_1,
    /// `liminf g(⌊c f(n)⌋)/n = 0`
    T3_1_2,
    /// `liminf f(⌊ε b_n⌋)/n < 1`
    T3_1_3,
    /// `liminf f(⌊ε b_n⌋)/n = 0`
    T3_1_4,
    /// `liminf a_{b_n}/(n b_n) < 1`
    C3_3,
    /// `ℓ̲·ℓ̄′ < 1` or `ℓ̄·ℓ̲′ < 1`
    C3_4,
    /// `liminf a_{n b_n}/(n² b_n) < 1/2`
    T4_1,
    /// `l₁·l₂ < 1/2`
    C4_3,
}

impl TheoremId {
    const NAMES: [(&'static str, TheoremId); 9] = [
        ("T2.3", TheoremId::T2_3),
        ("T3.1.1", TheoremId::T3_1_1),
        ("T3.1.2", TheoremId::T3_1_2),
        ("T3.1.3", TheoremId::T3_1_3),
        ("T3.1.4", TheoremId::T3_1_4),
        ("C3.3", TheoremId::C3_3),
        ("C3.4", TheoremId::C3_4),
        ("T4.1", TheoremId::T4_1),
        ("C4.3", TheoremId::C4_3),
    ];

    pub fn name(self) -> &'static str {
        TheoremId::NAMES.iter().find(|(_, t)| *t == self).unwrap().0
    }
}

impl FromStr for TheoremId {
    type Err = DiagnosticError;

    fn from_str(s: &str) -> Result<Self, DiagnosticError> {
        TheoremId::NAMES
            .iter()
            .find(|(n, _)| *n == s)
            .map(|&(_, t)| t)
            .ok_or_else(|| DiagnosticError::Unknown {
                what: "theorem",
                name: s.to_string(),
            })
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckParams {
    pub grid: Vec<i64>,
    pub theta: Option<ThetaSpec>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub window: Window,
    /// Defaults to [`DEFAULT_ZERO_TOL`] when `None`.
    pub zero_tol: Option<f64>,
}

fn ser_theorem<S: Serializer>(t: &TheoremId, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(t.name())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    #[serde(serialize_with = "ser_theorem")]
    pub theorem: TheoremId,
    pub value: f64,
    pub threshold: f64,
    pub satisfied_empirically: bool,
    /// The margin was within [`COMPARISON_SLACK`] of the threshold.
    pub inconclusive: bool,
    /// Named intermediate estimates (windowed inf/sup of each series).
    pub components: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub caveat: String,
}

enum Condition {
    Below(f64),
    ZeroLike(f64),
}

fn judge(theorem: TheoremId, value: f64, cond: Condition) -> Verdict {
    let (threshold, zero_like) = match cond {
        Condition::Below(t) => (t, false),
        Condition::ZeroLike(t) => (t, true),
    };
    let margin = threshold - value;
    let inconclusive = value.is_finite() && margin.abs() < COMPARISON_SLACK;
    let satisfied_empirically = value.is_finite() && !inconclusive && margin > 0.0;
    let caveat = if zero_like {
        format!("{CAVEAT}: a windowed infimum below {threshold} is read as a limit of zero")
    } else {
        format!("{CAVEAT}: windowed infimum/supremum in place of liminf/limsup")
    };
    Verdict {
        theorem,
        value,
        threshold,
        satisfied_empirically,
        inconclusive,
        components: BTreeMap::new(),
        notes: Vec::new(),
        caveat,
    }
}

/// Evaluates a hypothesis on the available prefixes of `A` and `B`.
/// With an empty grid, a geometric grid up to `|A|` is used.
pub fn theorem_condition_check(
    a: &FiniteSet,
    b: &FiniteSet,
    theorem: TheoremId,
    params: &CheckParams,
) -> Result<Verdict, DiagnosticError> {
    let grid = if params.grid.is_empty() {
        Grid::geometric(2, a.len().max(b.len()) as i64, 1.25)
    } else {
        params.grid.clone()
    };
    let zero_tol = params.zero_tol.unwrap_or(DEFAULT_ZERO_TOL);
    let series = |kind: DiagnosticKind, constant: Option<f64>| -> Result<RatioSeries, DiagnosticError> {
        let sp = SeriesParams {
            theta: params.theta.clone(),
            constant,
            window: params.window,
        };
        let s = ratio_series(a, Some(b), kind, &grid, &sp)?;
        if s.points.is_empty() {
            return Err(DiagnosticError::EmptySeries {
                kind: kind.to_string(),
            });
        }
        Ok(s)
    };
    let need = |v: Option<f64>, param: &'static str| {
        v.ok_or(DiagnosticError::KindParamMissing {
            kind: theorem.to_string(),
            param,
        })
    };
    let liminf = |s: &RatioSeries| s.liminf_estimate().expect("non-empty series");
    let limsup = |s: &RatioSeries| s.limsup_estimate().expect("non-empty series");

    let verdict = match theorem {
        TheoremId::T2_3 => {
            let s = series(DiagnosticKind::SumOverNsq, None)?;
            judge(theorem, liminf(&s), Condition::ZeroLike(zero_tol))
        }
        TheoremId::T3_1_1 | TheoremId::T3_1_2 => {
            let c = need(params.c, "c")?;
            if c <= 1.0 {
                return Err(DiagnosticError::Domain("c must exceed 1".into()));
            }
            let s = series(DiagnosticKind::GOfCfOverN, Some(c))?;
            let cond = if theorem == TheoremId::T3_1_1 {
                Condition::Below(1.0 - 1.0 / c)
            } else {
                Condition::ZeroLike(zero_tol)
            };
            judge(theorem, liminf(&s), cond)
        }
        TheoremId::T3_1_3 | TheoremId::T3_1_4 => {
            let eps = need(params.eps, "eps")?;
            let s = series(DiagnosticKind::FOfEpsBOverN, Some(eps))?;
            let cond = if theorem == TheoremId::T3_1_3 {
                Condition::Below(1.0)
            } else {
                Condition::ZeroLike(zero_tol)
            };
            judge(theorem, liminf(&s), cond)
        }
        TheoremId::C3_3 => {
            let s = series(DiagnosticKind::ABnOverNBn, None)?;
            let l = liminf(&s);
            let mut v = judge(theorem, l, Condition::Below(1.0));
            v.notes.push(format!(
                "infinitude clause (l = 0): {}",
                if l < zero_tol { "supported" } else { "not supported" }
            ));
            v
        }
        TheoremId::C3_4 => {
            need(params.theta.as_ref().map(|_| 0.0), "theta")?;
            let sa = series(DiagnosticKind::AOverNTheta, None)?;
            let sb = series(DiagnosticKind::ThetaBOverN, None)?;
            let (lo, hi) = (liminf(&sa), limsup(&sa));
            let (lo_b, hi_b) = (liminf(&sb), limsup(&sb));
            let (p1, p2) = (lo * hi_b, hi * lo_b);
            let mut v = judge(theorem, p1.min(p2), Condition::Below(1.0));
            v.components = BTreeMap::from([
                ("ell_lower".to_string(), lo),
                ("ell_upper".to_string(), hi),
                ("ell_prime_lower".to_string(), lo_b),
                ("ell_prime_upper".to_string(), hi_b),
                ("ell_lower_times_ell_prime_upper".to_string(), p1),
                ("ell_upper_times_ell_prime_lower".to_string(), p2),
            ]);
            v.notes.push(format!(
                "infinitude clause: ell_lower*ell_prime_upper = 0 {}; ell_upper*ell_prime_lower = 0 {}",
                if p1 < zero_tol { "supported" } else { "not supported" },
                if p2 < zero_tol { "supported" } else { "not supported" },
            ));
            v.notes.push(
                "ambiguous statement: the infinitude clause is stated with the same product twice; \
                 both products are evaluated"
                    .to_string(),
            );
            v
        }
        TheoremId::T4_1 => {
            let s = series(DiagnosticKind::ANBnOverN2Bn, None)?;
            judge(theorem, liminf(&s), Condition::Below(0.5))
        }
        TheoremId::C4_3 => {
            need(params.theta.as_ref().map(|_| 0.0), "theta")?;
            let sa = series(DiagnosticKind::AOverNTheta, None)?;
            let sb = series(DiagnosticKind::ThetaNBOverN, None)?;
            let (l1, l2) = (limsup(&sa), liminf(&sb));
            let mut v = judge(theorem, l1 * l2, Condition::Below(0.5));
            v.components = BTreeMap::from([("l1".to_string(), l1), ("l2".to_string(), l2)]);
            v
        }
    };
    Ok(verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerCase {
    /// `α < 1`, `β < 1/α`: no constant condition.
    InfiniteForAllK,
    /// `α < 1`, `β = 1/α`: `K^β·M < α/(1+α)^{β+1}`.
    CriticalExponent,
    /// `α = β = 1`: `K·M < 1/4`.
    Quadratic,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerVerdict {
    pub case: PowerCase,
    pub threshold: Option<f64>,
    /// `K^β·M` or `K·M`.
    pub value: Option<f64>,
    pub margin: Option<f64>,
    pub satisfied: bool,
    pub inconclusive: bool,
}

/// Classifies growth bounds `a_n ≤ K n^{1+α}`, `b_n ≤ M n^{1+β}`.
pub fn power_constant_check(k: f64, alpha: f64, m: f64, beta: f64) -> Result<PowerVerdict, DiagnosticError> {
    let finite_pos = |v: f64| v.is_finite() && v > 0.0;
    if !(finite_pos(k) && finite_pos(m) && finite_pos(beta)) {
        return Err(DiagnosticError::Domain("K, M and beta must be positive".into()));
    }
    if !(finite_pos(alpha) && alpha <= 1.0) {
        return Err(DiagnosticError::Domain("alpha must lie in (0, 1]".into()));
    }
    let near = |x: f64, y: f64| (x - y).abs() <= COMPARISON_SLACK * y.abs().max(1.0);
    let below_one = alpha < 1.0 && !near(alpha, 1.0);
    let critical = near(alpha * beta, 1.0);
    let constant_check = |case, threshold: f64, value: f64| {
        let margin = threshold - value;
        let inconclusive = margin.abs() < COMPARISON_SLACK;
        PowerVerdict {
            case,
            threshold: Some(threshold),
            value: Some(value),
            margin: Some(margin),
            satisfied: !inconclusive && margin > 0.0,
            inconclusive,
        }
    };
    Ok(if below_one && critical {
        constant_check(
            PowerCase::CriticalExponent,
            critical_threshold(alpha, beta),
            k.powf(beta) * m,
        )
    } else if below_one && alpha * beta < 1.0 {
        PowerVerdict {
            case: PowerCase::InfiniteForAllK,
            threshold: None,
            value: None,
            margin: None,
            satisfied: true,
            inconclusive: false,
        }
    } else if near(alpha, 1.0) && near(beta, 1.0) {
        constant_check(PowerCase::Quadratic, 0.25, k * m)
    } else {
        PowerVerdict {
            case: PowerCase::OutOfScope,
            threshold: None,
            value: None,
            margin: None,
            satisfied: false,
            inconclusive: false,
        }
    })
}

/// `α / (1 + α)^{β+1}`.
pub fn critical_threshold(alpha: f64, beta: f64) -> f64 {
    alpha / (1.0 + alpha).powf(beta + 1.0)
}

/// `(c − 1) / c^{β+1}`, maximized at `c = 1 + 1/β`.
pub fn critical_objective(c: f64, beta: f64) -> f64 {
    (c - 1.0) / c.powf(beta + 1.0)
}

/// `c / (1 + c²)`, maximized at `c = 1`.
pub fn quadratic_objective(c: f64) -> f64 {
    c / (1.0 + c * c)
}

/// Maximizes `f` over `lo + i·step`, `i = 1..`, up to `hi`; smallest point
/// on ties.
pub fn grid_argmax(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let steps = ((hi - lo) / step).round() as usize;
    (1..=steps)
        .map(|i| lo + i as f64 * step)
        .fold((f64::NAN, f64::NEG_INFINITY), |best, c| {
            let v = f(c);
            if v > best.1 {
                (c, v)
            } else {
                best
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn range_set(lo: i64, hi: i64) -> FiniteSet {
        FiniteSet::from_elements((lo..=hi).collect::<Vec<_>>()).unwrap()
    }

    fn theta(text: &str) -> Option<ThetaSpec> {
        Some(ThetaSpec::parse(text).unwrap())
    }

    #[test]
    fn floor_scaled_is_exact() {
        assert_eq!(floor_scaled(1.5, 10, 3), Some(5));
        assert_eq!(floor_scaled(0.1, 30, 1), Some(3));
        assert_eq!(floor_scaled(0.1, 10, 1), Some(1));
        assert_eq!(floor_scaled(3.0, 7, 7), Some(3));
        assert_eq!(floor_scaled(1e-300, 5, 1), Some(0));
        assert_eq!(floor_scaled(-1.0, 5, 1), None);
        // 0.1 is slightly above 1/10 in binary
        assert_eq!(floor_scaled(0.1, 1 << 40, 1), Some(((1u64 << 40) as f64 * 0.1).floor() as i64));
    }

    #[test]
    fn identity_series() {
        let id = range_set(1, 10_000);
        let s = ratio_series(&id, Some(&id), DiagnosticKind::ABnOverNBn, &[100], &SeriesParams::default()).unwrap();
        assert_eq!(s.points[0].value, 0.01);
        let s = ratio_series(&id, Some(&id), DiagnosticKind::ANBnOverN2Bn, &[10, 100, 101], &SeriesParams::default())
            .unwrap();
        assert_eq!(s.points.iter().map(|p| p.value).collect::<Vec<_>>(), vec![0.1, 0.01]);
        assert_eq!(s.skipped.len(), 1);
        assert_eq!(s.skipped[0].n, 101);
    }

    #[test]
    fn moser_de_bruijn_sum_ratio() {
        use crate::sequence::{builtin_term, Builtin};
        let n_max = 1023;
        let a = FiniteSet::from_elements(
            (1..=n_max).map(|n| builtin_term(&Builtin::EvenPow2Sums, n).unwrap()).collect::<Vec<_>>(),
        )
        .unwrap();
        let b = FiniteSet::from_elements(a.elements().iter().map(|v| 2 * v).collect::<Vec<_>>()).unwrap();
        let grid: Vec<i64> = (1..=10).map(|k| (1 << k) - 1).collect();
        let s = ratio_series(&a, Some(&b), DiagnosticKind::SumOverNsq, &grid, &SeriesParams::default()).unwrap();
        for (p, k) in s.points.iter().zip(1..) {
            let expected = ((1i64 << k) + 1) as f64 / ((1i64 << k) - 1) as f64;
            assert!((p.value - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn running_window() {
        let id = range_set(1, 100);
        let s = ratio_series(&id, None, DiagnosticKind::AOverNTheta, &[2, 4, 8, 16], &SeriesParams {
            theta: theta("1"),
            ..Default::default()
        })
        .unwrap();
        // a_n/(n·1) = 1 everywhere
        assert!(s.points.iter().all(|p| p.value == 1.0 && p.running_inf == 1.0));
        let s = ratio_series(&id, Some(&id), DiagnosticKind::ABnOverNBn, &[1, 2, 4, 5], &SeriesParams {
            window: Window::Last(2),
            ..Default::default()
        })
        .unwrap();
        let sups: Vec<f64> = s.points.iter().map(|p| p.running_sup).collect();
        assert_eq!(sups, vec![1.0, 1.0, 0.5, 0.25]);
        assert_eq!(
            s.to_csv_string(),
            "n,value,running_inf,running_sup\n1,1,1,1\n2,0.5,0.5,1\n4,0.25,0.25,0.5\n5,0.2,0.2,0.25\n"
        );
    }

    #[test]
    fn missing_parameters() {
        let id = range_set(1, 100);
        let p = SeriesParams::default();
        assert!(matches!(
            ratio_series(&id, Some(&id), DiagnosticKind::GOfCfOverN, &[5], &p),
            Err(DiagnosticError::KindParamMissing { param: "c", .. })
        ));
        assert!(matches!(
            ratio_series(&id, Some(&id), DiagnosticKind::FOfEpsBOverN, &[5], &p),
            Err(DiagnosticError::KindParamMissing { param: "eps", .. })
        ));
        assert!(matches!(
            ratio_series(&id, Some(&id), DiagnosticKind::ThetaBOverN, &[5], &p),
            Err(DiagnosticError::KindParamMissing { param: "theta", .. })
        ));
        assert!(matches!(
            ratio_series(&id, None, DiagnosticKind::SumOverNsq, &[5], &p),
            Err(DiagnosticError::SecondSequenceMissing { .. })
        ));
        assert!(matches!(
            theorem_condition_check(&id, &id, TheoremId::C3_4, &CheckParams::default()),
            Err(DiagnosticError::KindParamMissing { param: "theta", .. })
        ));
    }

    #[test]
    fn index_arithmetic_for_scaled_kinds() {
        // a_n = n², b_n = 3n
        let a = FiniteSet::from_elements((1..=400).map(|n| n * n).collect::<Vec<_>>()).unwrap();
        let b = FiniteSet::from_elements((1..=400).map(|n| 3 * n).collect::<Vec<_>>()).unwrap();
        let s = ratio_series(&a, Some(&b), DiagnosticKind::GOfCfOverN, &[10], &SeriesParams {
            constant: Some(2.5),
            ..Default::default()
        })
        .unwrap();
        // τ = ⌊2.5·10⌋ = 25, g(25) = 3
        assert_eq!(s.points[0].value, 0.3);
        let s = ratio_series(&a, Some(&b), DiagnosticKind::FOfEpsBOverN, &[10], &SeriesParams {
            constant: Some(0.5),
            ..Default::default()
        })
        .unwrap();
        // σ = ⌊0.5·30⌋ = 15, f(15) = 15
        assert_eq!(s.points[0].value, 1.5);
    }

    #[test]
    fn theta_ratio_for_primes() {
        let p = FiniteSet::from_elements(crate::sequence::sieve::first_primes(10_000)).unwrap();
        let s = ratio_series(&p, None, DiagnosticKind::AOverNTheta, &[10_000], &SeriesParams {
            theta: theta("log(n)"),
            ..Default::default()
        })
        .unwrap();
        // p_10000 = 104729
        let expected = 104_729.0 / (10_000.0 * 10_000f64.ln());
        assert_eq!(s.points[0].value, expected);
        assert!((0.8..=1.2).contains(&s.points[0].value));
    }

    #[test]
    fn verdicts() {
        let id = range_set(1, 10_000);
        let v = theorem_condition_check(&id, &id, TheoremId::C3_3, &CheckParams {
            grid: vec![10, 100, 1000],
            ..Default::default()
        })
        .unwrap();
        assert!(v.satisfied_empirically);
        assert_eq!(v.threshold, 1.0);
        assert!((v.value - 0.001).abs() < 1e-15);

        let v = theorem_condition_check(&id, &id, TheoremId::T4_1, &CheckParams {
            grid: vec![10, 50, 100],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(v.threshold, 0.5);
        assert!(v.satisfied_empirically);

        let v = theorem_condition_check(&id, &id, TheoremId::T3_1_1, &CheckParams {
            grid: vec![10, 100],
            c: Some(2.0),
            ..Default::default()
        })
        .unwrap();
        // f = 1, τ = 2, g(2) = 1 → value 1/n
        assert_eq!(v.threshold, 0.5);
        assert!(v.satisfied_empirically);
    }

    #[test]
    fn inconclusive_margin() {
        let v = judge(TheoremId::C3_3, 1.0 - 1e-14, Condition::Below(1.0));
        assert!(v.inconclusive && !v.satisfied_empirically);
        let v = judge(TheoremId::C3_3, 0.5, Condition::Below(1.0));
        assert!(!v.inconclusive && v.satisfied_empirically);
    }

    #[test]
    fn power_cases() {
        let v = power_constant_check(1.0, 0.5, 0.1, 2.0).unwrap();
        assert_eq!(v.case, PowerCase::CriticalExponent);
        assert!((v.threshold.unwrap() - 4.0 / 27.0).abs() < 1e-15);
        assert!(v.satisfied);
        let v = power_constant_check(0.4, 1.0, 0.4, 1.0).unwrap();
        assert_eq!(v.case, PowerCase::Quadratic);
        assert_eq!(v.threshold, Some(0.25));
        assert!(v.satisfied);
        let v = power_constant_check(1.0, 0.5, 1.0, 3.0).unwrap();
        assert_eq!(v.case, PowerCase::OutOfScope);
        let v = power_constant_check(1.0, 0.5, 1.0, 1.5).unwrap();
        assert_eq!(v.case, PowerCase::InfiniteForAllK);
        assert!(v.satisfied);
        assert!(power_constant_check(0.0, 0.5, 1.0, 1.5).is_err());
        assert!(power_constant_check(1.0, 1.5, 1.0, 1.5).is_err());
        let v = power_constant_check(1.0, 0.5, 4.0 / 27.0, 2.0).unwrap();
        assert!(v.inconclusive && !v.satisfied);
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::parse("5,1,3,3").unwrap(), vec![1, 3, 5]);
        assert_eq!(Grid::parse("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(Grid::parse("1..100*10").unwrap(), vec![1, 10, 100]);
        assert_eq!(Grid::geometric(2, 20, 2.0), vec![2, 4, 8, 16, 20]);
        assert!(Grid::parse("0,3").is_err());
        assert!(Grid::parse("a..b").is_err());
        assert!(Grid::parse("1..10*1").is_err());
    }

    #[test]
    fn kinds_parse() {
        for (name, kind) in DiagnosticKind::NAMES {
            assert_eq!(name.parse::<DiagnosticKind>().unwrap(), kind);
        }
        assert_eq!("C3.3".parse::<DiagnosticKind>().unwrap(), DiagnosticKind::ABnOverNBn);
        assert!("nope".parse::<DiagnosticKind>().is_err());
        assert_eq!("C4.3".parse::<TheoremId>().unwrap(), TheoremId::C4_3);
    }
}
