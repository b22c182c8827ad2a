//! Command implementations behind the `pia` binary.
//!
//! Each command loads a problem (from a file or a built-in oracle), runs
//! the library, and writes CSV tables with headers into an output
//! directory. Exit codes: 0 on success, 2 when PIA hits its iteration cap,
//! 1 on any error.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::driver::{run_pia, PiaReport};
use crate::expr::Expression;
use crate::grid::GridPolicy;
use crate::monte_carlo::{ks_critical_value, simulate_payoff, tanaka_samples, SimConfig};
use crate::oracles;
use crate::problem::validate_problem;
use crate::spec_file::{oracle_spec, LoadedProblem, ProblemSpecFile, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;

/// Samples per axis used when validating a loaded problem.
const VALIDATION_SAMPLES_X: usize = 201;
const VALIDATION_SAMPLES_A: usize = 41;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unknown oracle `{0}` (expected one of example1, example2, manufactured)")]
    UnknownOracle(String),
    #[error("exactly one of --spec and --oracle is required")]
    ProblemSource,
    #[error("problem validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Solver(#[from] crate::error::Error),
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Where the problem comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Spec(PathBuf),
    Oracle(String),
}

impl ProblemSource {
    pub fn from_flags(spec: Option<PathBuf>, oracle: Option<String>) -> Result<Self, CliError> {
        match (spec, oracle) {
            (Some(p), None) => Ok(ProblemSource::Spec(p)),
            (None, Some(o)) => Ok(ProblemSource::Oracle(o)),
            _ => Err(CliError::ProblemSource),
        }
    }

    fn load(&self) -> Result<(ProblemSpecFile, Option<oracles::OracleProblem>), CliError> {
        match self {
            ProblemSource::Spec(path) => Ok((ProblemSpecFile::from_path(path)?, None)),
            ProblemSource::Oracle(name) => {
                let spec = oracle_spec(name).ok_or_else(|| CliError::UnknownOracle(name.clone()))?;
                Ok((spec, oracles::by_name(name)))
            }
        }
    }
}

fn load_validated(source: &ProblemSource) -> Result<(ProblemSpecFile, LoadedProblem, Option<oracles::OracleProblem>), CliError> {
    let (spec, oracle) = source.load()?;
    let loaded = spec.build()?;
    let report = validate_problem(&loaded.problem, VALIDATION_SAMPLES_X, VALIDATION_SAMPLES_A);
    if !report.passed {
        let first = &report.violations[0];
        return Err(CliError::Validation(format!(
            "{} violation(s); first: {} at x = {}, a = {} (observed {})",
            report.violations.len(),
            first.check,
            first.x,
            first.a,
            first.observed
        )));
    }
    Ok((spec, loaded, oracle))
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn inputs_hash(spec: &ProblemSpecFile, extra: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(spec.to_toml_string().as_bytes());
    hasher.update(extra.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Everything `solve` writes.
#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub metadata: Vec<(String, String)>,
    pub report: PiaReport,
}

impl ResultBundle {
    /// Writes `metadata.csv`, `iterations.csv`, `value.csv` and `policy.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        ensure_dir(dir)?;
        write_csv(
            &dir.join("metadata.csv"),
            &["key", "value"],
            self.metadata.iter().map(|(k, v)| vec![k.clone(), v.clone()]),
        )?;
        write_csv(
            &dir.join("iterations.csv"),
            &["iter", "max_residual", "value_min", "value_max", "policy_change_sup", "monotone"],
            self.report.iterations.iter().map(|r| {
                vec![
                    r.index.to_string(),
                    fmt_f64(r.max_residual),
                    fmt_f64(r.value_min),
                    fmt_f64(r.value_max),
                    fmt_f64(r.policy_change_sup),
                    r.monotone.to_string(),
                ]
            }),
        )?;
        let grid = self.report.final_value.grid();
        write_csv(
            &dir.join("value.csv"),
            &["x", "V"],
            grid.nodes()
                .zip(self.report.final_value.values())
                .map(|(x, v)| vec![fmt_f64(x), fmt_f64(*v)]),
        )?;
        write_csv(
            &dir.join("policy.csv"),
            &["x", "a"],
            grid.nodes()
                .zip(self.report.final_policy.actions())
                .map(|(x, a)| vec![fmt_f64(x), fmt_f64(*a)]),
        )
    }
}

/// Validates the problem, runs PIA and returns the bundle.
pub fn solve(source: &ProblemSource) -> Result<ResultBundle, CliError> {
    let (spec, loaded, oracle) = load_validated(source)?;
    let report = run_pia(&loaded.problem, &loaded.initial_policy, &loaded.pia)?;

    let mut metadata = vec![
        ("package".to_string(), env!("CARGO_PKG_NAME").to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("inputs_sha256".to_string(), inputs_hash(&spec, "")),
        ("n_cells".to_string(), loaded.grid.n_cells().to_string()),
        ("termination".to_string(), report.termination.as_str().to_string()),
        ("converged".to_string(), report.converged.to_string()),
        ("iterations".to_string(), report.iterations.len().to_string()),
    ];
    if let Some(o) = oracle {
        let deviation = report
            .final_value
            .grid()
            .nodes()
            .zip(report.final_value.values())
            .fold(0.0f64, |m, (x, v)| m.max((v - (o.exact_value)(x)).abs()));
        metadata.push(("oracle".to_string(), o.name.to_string()));
        metadata.push(("oracle_sup_deviation".to_string(), fmt_f64(deviation)));
    }
    Ok(ResultBundle { metadata, report })
}

/// `pia solve`: writes the bundle into `out`.
pub fn cmd_solve(source: &ProblemSource, out: &Path) -> i32 {
    let run = || -> Result<bool, CliError> {
        let bundle = solve(source)?;
        bundle.write_to(out)?;
        let last = bundle.report.iterations.last().expect("at least one iteration");
        eprintln!(
            "{} after {} iteration(s), residual {:e}",
            bundle.report.termination.as_str(),
            last.index,
            last.max_residual
        );
        Ok(bundle.report.converged)
    };
    match run() {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_MAX_ITERATIONS,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Which policy `simulate` should follow.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    /// An expression in `x`.
    Expression(String),
    /// `policy.csv` written by an earlier `solve` into this directory.
    PriorSolve(PathBuf),
}

fn read_prior_policy(dir: &Path, loaded: &LoadedProblem) -> Result<GridPolicy, CliError> {
    let path = dir.join("policy.csv");
    let mut reader = csv::Reader::from_path(&path).map_err(|e| io_err(&path, e))?;
    let headers = reader.headers().map_err(|e| io_err(&path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "a"] {
        return Err(io_err(&path, "expected header `x,a`"));
    }
    let mut actions = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_err(&path, e))?;
        let parse = |k: usize| -> Result<f64, CliError> {
            record
                .get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| io_err(&path, format!("row {}: malformed number", row + 1)))
        };
        let (x, a) = (parse(0)?, parse(1)?);
        let expected = loaded.grid.node(row);
        if row >= loaded.grid.n_nodes() || x != expected {
            return Err(io_err(
                &path,
                format!("row {}: x = {x} does not match the problem grid", row + 1),
            ));
        }
        actions.push(a);
    }
    let pol = GridPolicy::new(loaded.grid, actions).map_err(|e| io_err(&path, e))?;
    pol.check_against(&loaded.problem).map_err(|e| io_err(&path, e))?;
    Ok(pol)
}

/// Runs the Monte Carlo estimator at every `x0` and returns the
/// `estimate.csv` rows.
pub fn simulate(
    source: &ProblemSource,
    x0s: &[f64],
    policy: &PolicySource,
    seed: Option<u64>,
) -> Result<Vec<(f64, crate::monte_carlo::PayoffEstimate)>, CliError> {
    let (_, loaded, _) = load_validated(source)?;
    let pol = match policy {
        PolicySource::Expression(src) => {
            let e = Expression::parse_state_only(src).map_err(|e| CliError::Field {
                field: "--policy",
                message: e.to_string(),
            })?;
            let pol = GridPolicy::from_fn(loaded.grid, |x| e.eval(x, f64::NAN));
            pol.check_against(&loaded.problem).map_err(|e| CliError::Field {
                field: "--policy",
                message: e.to_string(),
            })?;
            pol
        }
        PolicySource::PriorSolve(dir) => read_prior_policy(dir, &loaded)?,
    };
    let cfg = SimConfig {
        seed: seed.unwrap_or(loaded.sim.seed),
        ..loaded.sim
    };
    x0s.iter()
        .map(|&x0| Ok((x0, simulate_payoff(&loaded.problem, &pol, x0, &cfg)?)))
        .collect()
}

/// `pia simulate`: writes `estimate.csv`.
pub fn cmd_simulate(source: &ProblemSource, x0s: &[f64], policy: &PolicySource, seed: Option<u64>, out: &Path) -> i32 {
    let run = || -> Result<(), CliError> {
        let rows = simulate(source, x0s, policy, seed)?;
        ensure_dir(out)?;
        write_csv(
            &out.join("estimate.csv"),
            &["x0", "mean", "std_error", "n_paths", "truncated_fraction"],
            rows.iter().map(|(x0, e)| {
                vec![
                    fmt_f64(*x0),
                    fmt_f64(e.mean),
                    fmt_f64(e.std_error),
                    e.n_paths.to_string(),
                    fmt_f64(e.truncated_fraction),
                ]
            }),
        )
    };
    match run() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// One `tanaka.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct TanakaRow {
    pub construction: &'static str,
    pub t: f64,
    pub prob_estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub ks_statistic: f64,
    pub ks_critical_1pct: f64,
}

pub fn tanaka(t: f64, cfg: &SimConfig) -> Result<Vec<TanakaRow>, CliError> {
    let samples = tanaka_samples(t, cfg)?;
    let (pi, sigma) = samples.joint_law();
    let ks = samples.marginal_ks();
    let crit = ks_critical_value(cfg.n_paths, cfg.n_paths, 0.01);
    Ok([pi, sigma]
        .iter()
        .map(|e| TanakaRow {
            construction: e.construction.as_str(),
            t: e.t,
            prob_estimate: e.prob_estimate,
            std_error: e.std_error,
            n_paths: cfg.n_paths,
            ks_statistic: ks,
            ks_critical_1pct: crit,
        })
        .collect())
}

/// `pia tanaka`: writes `tanaka.csv`.
pub fn cmd_tanaka(t: f64, cfg: &SimConfig, out: &Path) -> i32 {
    let run = || -> Result<(), CliError> {
        let rows = tanaka(t, cfg)?;
        ensure_dir(out)?;
        write_csv(
            &out.join("tanaka.csv"),
            &["construction", "t", "prob_estimate", "std_error", "n_paths", "ks_statistic", "ks_critical_1pct"],
            rows.iter().map(|r| {
                vec![
                    r.construction.to_string(),
                    fmt_f64(r.t),
                    fmt_f64(r.prob_estimate),
                    fmt_f64(r.std_error),
                    r.n_paths.to_string(),
                    fmt_f64(r.ks_statistic),
                    fmt_f64(r.ks_critical_1pct),
                ]
            }),
        )
    };
    match run() {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
