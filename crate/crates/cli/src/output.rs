use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nlpdhgm::experiments::{
    fit_linear_rate, fit_power_rate, BoundDominance, ExperimentConfig, ExperimentRun, RateFit,
};
use nlpdhgm::solver::{DescentReport, IterationRecord, StepBoundReport, StepRule};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const CSV_HEADER: &str = "iter,tau,sigma,omega,err_x_sq,err_u_sq,metric_err_sq,bound";

/// Version of the summary document layout.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// First iteration considered by linear-rate fits and the dominance check.
pub const LINEAR_START: usize = 10;
/// Window length of the dominance check.
pub const DOMINANCE_WINDOW: usize = 10;
/// Allowed relative excess of an empirical window ratio over the theory.
pub const DOMINANCE_TOL: f64 = 0.05;

pub fn tool_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Render records as CSV: 17 significant digits, LF line endings.
pub fn csv_string(records: &[IterationRecord]) -> String {
    let mut out = String::with_capacity(128 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{}", r.iter);
        for v in [
            r.tau,
            r.sigma,
            r.omega,
            r.err_x_sq,
            r.err_u_sq,
            r.metric_err_sq,
            r.bound,
        ] {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

pub fn emit_csv(records: &[IterationRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(CliError::Config("no records to emit".into()));
    }
    std::fs::write(path, csv_string(records)).map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct Fits {
    /// Log-log fit of `||x^N - x̂||²`.
    pub power: Option<RateFit>,
    /// Geometric fit of `||u^N - û||²` (linear-rate runs only).
    pub linear: Option<RateFit>,
    /// `(1 + 2γ̃_G τ)^{-1}` (linear-rate runs only).
    pub theoretical_ratio: Option<f64>,
    pub bound_dominance: Option<BoundDominance>,
}

impl Fits {
    pub fn of(run: &ExperimentRun) -> Self {
        let n = run.records.len() - 1;
        let (lo, hi) = run.config.power_window();
        let power = if hi <= n {
            fit_power_rate(&run.err_x_sq(), (lo, hi)).ok()
        } else {
            None
        };
        let theoretical_ratio = run.theoretical_ratio();
        let (linear, bound_dominance) = match theoretical_ratio {
            Some(_) => (
                linear_fit(run).ok(),
                run.bound_dominance(LINEAR_START, DOMINANCE_WINDOW, DOMINANCE_TOL)
                    .ok(),
            ),
            None => (None, None),
        };
        Self {
            power,
            linear,
            theoretical_ratio,
            bound_dominance,
        }
    }
}

/// Geometric fit of `||u^N - û||²` from `N = 10` up to the last iterate above
/// the round-off floor.
pub fn linear_fit(run: &ExperimentRun) -> nlpdhgm::Result<RateFit> {
    let err = run.err_u_sq();
    let floor = run.roundoff_floor();
    let end = err.iter().rposition(|&e| e > floor).unwrap_or(0);
    fit_linear_rate(&err, (LINEAR_START, end))
}

#[derive(Clone, Debug, Serialize)]
pub struct FinalErrors {
    pub iterations: usize,
    pub err_x_sq: f64,
    pub err_u_sq: f64,
    pub metric_err_sq: f64,
}

/// The summary document written next to the CSV.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: String,
    pub seed: u64,
    pub rule: StepRule,
    pub l_tilde: f64,
    pub r_k: f64,
    pub final_errors: FinalErrors,
    pub fits: Fits,
    pub bound_report: StepBoundReport,
    pub r_max: Option<f64>,
    pub descent: DescentReport,
    pub diverged_at: Option<usize>,
    pub warnings: Vec<String>,
    pub duration_s: f64,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn new(run: &ExperimentRun, duration_s: f64) -> Self {
        let last = run.records.last().expect("runs record the initial iterate");
        Self {
            schema_version: SUMMARY_SCHEMA_VERSION,
            tool_version: tool_version().to_string(),
            experiment: run.config.experiment.name().to_string(),
            seed: run.config.seed,
            rule: run.rule,
            l_tilde: run.l_tilde,
            r_k: run.r_k,
            final_errors: FinalErrors {
                iterations: last.iter,
                err_x_sq: last.err_x_sq,
                err_u_sq: last.err_u_sq,
                metric_err_sq: last.metric_err_sq,
            },
            fits: Fits::of(run),
            bound_report: run.bound_report.clone(),
            r_max: run.bound_report.r_max,
            descent: run.descent_report(),
            diverged_at: run.diverged_at,
            warnings: run.warnings.clone(),
            duration_s,
            config: run.config.clone(),
        }
    }
}

pub fn emit_summary(summary: &Summary, path: &Path) -> Result<()> {
    write_json(summary, path)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Record of one invocation's inputs and artifacts.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub version: String,
    pub duration_s: f64,
}

impl RunManifest {
    pub fn new(
        config: ExperimentConfig,
        csv_path: PathBuf,
        summary_path: PathBuf,
        duration_s: f64,
    ) -> Result<Self> {
        if csv_path == summary_path {
            return Err(CliError::Config(format!(
                "output paths must differ (both are {})",
                csv_path.display()
            )));
        }
        Ok(Self {
            config,
            csv_path,
            summary_path,
            version: tool_version().to_string(),
            duration_s,
        })
    }
}
