//! `deltaset`: distance sets, recursion sets and intersection witnesses from
//! the command line.
//!
//! Exit status: 0 on success, 1 when a verdict or experiment fails, 2 on
//! usage or input errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use deltaset_core::diagnostics::{CheckParams, SeriesParams, Window, DEFAULT_ZERO_TOL};
use deltaset_core::experiments::ExperimentParams;
use deltaset_core::report::to_json_document;
use deltaset_core::{
    distance_histogram, generate, khintchine_scan, lemma_witness, pigeonhole_witness, power_constant_check,
    ratio_series, run_experiment, theorem_condition_check, Backend, DiagnosticKind, FiniteSet, Grid,
    SequenceSpec, TheoremId, ThetaSpec, WitnessError,
};

const SPEC_GRAMMAR: &str = "\
--spec grammar:
  builtin  := primes | pow2 | even-pow2-sums | odd-pow2-sums
            | multiples(<int>) | floor-exp10-alpha(<real>) | floor-exp10-nlogn
  formula  := expression in n with + - * / ^, numbers, parentheses and
              floor(), log() (natural), log10(), sqrt(), exp()
  example  := \"floor(0.38 * n ^ 1.5)\"";

const GRID_GRAMMAR: &str = "\
--grid grammar: a,b,c (explicit) | lo..hi (every integer) | lo..hi*ratio (geometric)";

#[derive(Parser)]
#[command(name = "deltaset", version, about = "Distance sets and intersection witnesses of integer sequences")]
struct Cli {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized steps; every current command is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the output document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sequence prefix as a set file.
    Gen {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        count: usize,
        /// Bump non-increasing terms to previous + 1 instead of failing.
        #[arg(long)]
        repair: bool,
    },
    /// The distance set Δ(A).
    Delta {
        #[command(flatten)]
        a: SetA,
    },
    /// Distance multiplicities |A ∩ (A + x)|.
    Hist {
        #[command(flatten)]
        a: SetA,
        #[arg(long, value_parser = parse_backend)]
        backend: Option<Backend>,
    },
    /// Shifts x ≤ x_max with |A ∩ (A + x)| ≥ k.
    Rk {
        #[command(flatten)]
        a: SetA,
        #[arg(long)]
        k: u64,
        #[arg(long = "x-max")]
        x_max: i64,
    },
    /// A shift x ∈ Δ(B), x ≥ h, checked against the intersection bound.
    Witness {
        #[command(flatten)]
        sets: SetPair,
        #[arg(long, default_value_t = 1)]
        h: u64,
    },
    /// A common distance from a sumset collision.
    Pigeonhole {
        #[command(flatten)]
        sets: SetPair,
    },
    /// Ratio series or best-shift densities over a grid.
    Scan(ScanArgs),
    /// Evaluate a growth hypothesis on finite prefixes.
    Check(CheckArgs),
    /// Run a canned experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SetA {
    /// Set file `{"elements": [...]}`.
    #[arg(long)]
    a: PathBuf,
}

#[derive(Args)]
struct SetPair {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: Option<PathBuf>,
    /// `khintchine` or a ratio kind such as `a-bn-over-n-bn`.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Running inf/sup over the last `w` points (default: trailing half).
    #[arg(long)]
    window: Option<usize>,
}

#[derive(Args)]
struct CheckArgs {
    /// T2.3, T3.1.1-T3.1.4, C3.3, C3.4, T4.1, C4.3 or T3.6.
    #[arg(long)]
    theorem: String,
    #[arg(long)]
    a: Option<PathBuf>,
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    /// Infimum below which a limit counts as zero.
    #[arg(long = "zero-tol", default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    /// Power-growth constants for T3.6.
    #[arg(long = "K")]
    k_const: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "M")]
    m_const: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    name: String,
    #[arg(long = "N")]
    n: Option<u64>,
    #[arg(long = "prime-limit")]
    prime_limit: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "K")]
    k_const: Option<f64>,
    #[arg(long = "M")]
    m_const: Option<f64>,
    #[arg(long = "b-spec")]
    b_spec: Option<String>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

/// An output document plus whether the command's check passed.
struct Output {
    body: String,
    ok: bool,
}

impl Output {
    fn json<T: Serialize>(value: &T) -> Result<Output> {
        Ok(Output {
            body: to_json_document(value)?,
            ok: true,
        })
    }

    fn failing_if(mut self, failed: bool) -> Output {
        self.ok = !failed;
        self
    }
}

fn load(path: &Path) -> Result<FiniteSet> {
    FiniteSet::load_json(path).with_context(|| format!("reading set file {}", path.display()))
}

fn parse_sequence(text: &str) -> Result<SequenceSpec> {
    text.parse::<SequenceSpec>()
        .map_err(|e| anyhow!("{e}\n{SPEC_GRAMMAR}"))
}

fn parse_grid(text: Option<&str>, default_hi: usize) -> Result<Vec<i64>> {
    match text {
        Some(t) => Grid::parse(t).map_err(|e| anyhow!("{e}\n{GRID_GRAMMAR}")),
        None => Ok(Grid::geometric(2, default_hi as i64, 1.25)),
    }
}

fn parse_theta(text: Option<&str>) -> Result<Option<ThetaSpec>> {
    text.map(|t| ThetaSpec::parse(t).map_err(|e| anyhow!("--theta: {e}\n{SPEC_GRAMMAR}")))
        .transpose()
}

fn window(w: Option<usize>) -> Window {
    w.map_or(Window::TrailingHalf, Window::Last)
}

fn csv_column(header: &str, values: &[i64]) -> String {
    let mut s = format!("{header}\n");
    for v in values {
        s.push_str(&format!("{v}\n"));
    }
    s
}

fn set_output(set: &FiniteSet, format: Format, header: &str) -> Output {
    let body = match format {
        Format::Json => format!("{}\n", set.to_json()),
        Format::Csv => csv_column(header, set.elements()),
    };
    Output { body, ok: true }
}

fn run(cli: &Cli) -> Result<Output> {
    let format = cli.format;
    match &cli.command {
        Command::Gen { spec, count, repair } => {
            let report = generate(&parse_sequence(spec)?, *count, *repair)?;
            for r in &report.repairs {
                eprintln!(
                    "repaired term {}: formula gave {}, emitted {}",
                    r.index, r.formula_value, r.emitted_value
                );
            }
            Ok(set_output(&report.set, format, "value"))
        }
        Command::Delta { a } => Ok(set_output(&load(&a.a)?.delta_set()?, format, "x")),
        Command::Hist { a, backend } => {
            let set = load(&a.a)?;
            let hist = distance_histogram(&set, backend.unwrap_or_else(|| Backend::preferred(&set)))?;
            match format {
                Format::Json => Output::json(&hist),
                Format::Csv => Ok(Output {
                    body: hist.to_csv_string(),
                    ok: true,
                }),
            }
        }
        Command::Rk { a, k, x_max } => {
            if *k < 1 {
                bail!("--k must be at least 1");
            }
            let shifts = load(&a.a)?.recursion_set(*k, *x_max);
            match format {
                Format::Json => Output::json(&serde_json::json!({ "k": k, "x_max": x_max, "elements": shifts })),
                Format::Csv => Ok(Output {
                    body: csv_column("x", &shifts),
                    ok: true,
                }),
            }
        }
        Command::Witness { sets, h } => {
            let report = lemma_witness(&load(&sets.a)?, &load(&sets.b)?, *h)?;
            let failed = !report.bound_met;
            Ok(Output::json(&report)?.failing_if(failed))
        }
        Command::Pigeonhole { sets } => match pigeonhole_witness(&load(&sets.a)?, &load(&sets.b)?) {
            Ok(report) => Output::json(&serde_json::json!({ "hypothesis_satisfied": true, "witness": report })),
            Err(WitnessError::HypothesisNotSatisfied { fallback }) => Ok(Output::json(
                &serde_json::json!({ "hypothesis_satisfied": false, "fallback": fallback }),
            )?
            .failing_if(true)),
            Err(e) => Err(e.into()),
        },
        Command::Scan(args) => scan(args, format),
        Command::Check(args) => check(args),
        Command::Experiment(args) => {
            let params = ExperimentParams {
                n: args.n,
                prime_limit: args.prime_limit,
                k: args.k,
                count: args.count,
                alpha: args.alpha,
                beta: args.beta,
                eps: args.eps,
                k_const: args.k_const,
                m_const: args.m_const,
                b_spec: args.b_spec.clone(),
            };
            let report = run_experiment(&args.name, &params)?;
            eprintln!("{}: {:.3}s", report.name, report.wall_time.as_secs_f64());
            Ok(Output {
                body: report.to_json(),
                ok: report.pass,
            })
        }
    }
}

fn scan(args: &ScanArgs, format: Format) -> Result<Output> {
    let a = load(&args.a)?;
    let b = args.b.as_deref().map(load).transpose()?;
    if args.kind == "khintchine" {
        let b = b.ok_or_else(|| anyhow!("--kind khintchine needs --b"))?;
        let grid = match &args.grid {
            Some(_) => parse_grid(args.grid.as_deref(), 0)?,
            None => Grid::geometric(a.min().max(2), a.max(), 2.0),
        };
        let points = khintchine_scan(&a, &b, &grid)?;
        return match format {
            Format::Json => Output::json(&points),
            Format::Csv => {
                let mut body = String::from("n,x,count,density,reference,correction\n");
                for p in &points {
                    body.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        p.n, p.x, p.count, p.density, p.reference, p.correction
                    ));
                }
                Ok(Output { body, ok: true })
            }
        };
    }
    let kind: DiagnosticKind = args.kind.parse()?;
    let grid = parse_grid(args.grid.as_deref(), a.len())?;
    let params = SeriesParams {
        theta: parse_theta(args.theta.as_deref())?,
        constant: match kind {
            DiagnosticKind::FOfEpsBOverN => args.eps,
            _ => args.c,
        },
        window: window(args.window),
    };
    let series = ratio_series(&a, b.as_ref(), kind, &grid, &params)?;
    match format {
        Format::Json => Output::json(&series),
        Format::Csv => Ok(Output {
            body: series.to_csv_string(),
            ok: true,
        }),
    }
}

fn check(args: &CheckArgs) -> Result<Output> {
    if args.theorem == "T3.6" {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("T3.6 needs --{flag}"));
        let verdict = power_constant_check(
            need(args.k_const, "K")?,
            need(args.alpha, "alpha")?,
            need(args.m_const, "M")?,
            need(args.beta, "beta")?,
        )?;
        let failed = !verdict.satisfied;
        return Ok(Output::json(&verdict)?.failing_if(failed));
    }
    let theorem: TheoremId = args.theorem.parse()?;
    let (Some(a), Some(b)) = (&args.a, &args.b) else {
        bail!("{theorem} needs --a and --b");
    };
    let (a, b) = (load(a)?, load(b)?);
    let grid = match &args.grid {
        Some(g) => parse_grid(Some(g), 0)?,
        None => Vec::new(),
    };
    let params = CheckParams {
        grid,
        theta: parse_theta(args.theta.as_deref())?,
        c: args.c,
        eps: args.eps,
        window: window(args.window),
        zero_tol: Some(args.zero_tol),
    };
    let verdict = theorem_condition_check(&a, &b, theorem, &params)?;
    let failed = !verdict.satisfied_empirically;
    Ok(Output::json(&verdict)?.failing_if(failed))
}

fn emit(out: Option<&Path>, body: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, body),
        None => io::stdout().lock().write_all(body.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let result = pool
        .build()
        .map_err(anyhow::Error::from)
        .and_then(|pool| pool.install(|| run(&cli)));
    match result {
        Ok(output) => {
            if let Err(e) = emit(cli.out.as_deref(), &output.body) {
                eprintln!("error: writing output: {e}");
                return ExitCode::from(2);
            }
            if output.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(Cli::try_parse_from(["deltaset", "gen", "--spec", "pow2", "--count", "3", "--bogus"]).is_err());
        assert!(Cli::try_parse_from(["deltaset", "gen", "--spec", "pow2", "--count", "3"]).is_ok());
    }
}
