use std::path::{Path, PathBuf};
use std::time::Instant;

use nlpdhgm::checks::{
    adjoint_defect, default_taylor_steps, descent_suite, prox_suite, taylor_order, DescentCase,
    ProxCheckReport,
};
use nlpdhgm::experiments::{
    build_problem, run_experiment, ExperimentConfig, ExperimentKind, ExperimentRun,
};
use nlpdhgm::problems::{ComplexToyProblem, ThreePointReport, Vector};
use nlpdhgm::SaddleProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{emit_csv, emit_summary, write_json, RunManifest, Summary};

/// Optional pass/fail assertions evaluated on a finished run.
#[derive(Clone, Debug, Default)]
pub struct Assertions {
    /// Require the fitted log-log slope to be at most this value.
    pub max_slope: Option<f64>,
    /// Require the geometric fit ratio to be at most theory + 0.05.
    pub ratio: bool,
    /// Require every step-length bound to hold.
    pub bounds: bool,
    /// Require the descent inequality to hold.
    pub descent: bool,
}

impl Assertions {
    /// Names and messages of the failed assertions.
    pub fn failures(&self, summary: &Summary) -> Vec<String> {
        let mut failed = Vec::new();
        if let Some(max) = self.max_slope {
            match summary.fits.power {
                Some(fit) if fit.slope <= max => {}
                Some(fit) => failed.push(format!("slope {} > {max}", fit.slope)),
                None => failed.push("slope unavailable (run too short)".into()),
            }
        }
        if self.ratio {
            match (summary.fits.linear, summary.fits.theoretical_ratio) {
                (Some(fit), Some(theory)) if fit.ratio <= theory + 0.05 => {}
                (Some(fit), Some(theory)) => {
                    failed.push(format!("ratio {} > {theory} + 0.05", fit.ratio))
                }
                _ => failed.push("ratio unavailable (not a linear-rate run)".into()),
            }
        }
        if self.bounds {
            for c in summary.bound_report.violated() {
                failed.push(format!("{}: {} > {}", c.name, c.value, c.limit));
            }
        }
        if self.descent && !summary.descent.passed() {
            failed.push(format!(
                "descent inequality violated at {:?}",
                summary.descent.first_violation
            ));
        }
        failed
    }
}

/// Artifacts of one `run`.
#[derive(Debug)]
pub struct RunOutput {
    pub run: ExperimentRun,
    pub summary: Summary,
    pub manifest: RunManifest,
}

/// Run one experiment and write `<name>.csv`, `<name>.summary.json` and
/// `<name>.manifest.json` into `out_dir`.
pub fn run_and_emit(cfg: &ExperimentConfig, out_dir: &Path, name: &str) -> Result<RunOutput> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let started = Instant::now();
    let run = run_experiment(cfg)?;
    let duration_s = started.elapsed().as_secs_f64();
    let csv_path = out_dir.join(format!("{name}.csv"));
    let summary_path = out_dir.join(format!("{name}.summary.json"));
    let manifest = RunManifest::new(
        cfg.clone(),
        csv_path.clone(),
        summary_path.clone(),
        duration_s,
    )?;
    emit_csv(&run.records, &csv_path)?;
    let summary = Summary::new(&run, duration_s);
    emit_summary(&summary, &summary_path)?;
    write_json(&manifest, &out_dir.join(format!("{name}.manifest.json")))?;
    Ok(RunOutput {
        run,
        summary,
        manifest,
    })
}

/// Error for a run that stopped early.
pub fn divergence_error(out: &RunOutput) -> Option<CliError> {
    out.run.diverged_at.map(|iteration| {
        CliError::Core(nlpdhgm::Error::Diverged {
            iteration,
            value: out.run.records.last().map_or(f64::NAN, |r| r.err_u_sq),
        })
    })
}

/// File-name stem for a sweep member.
pub fn sweep_name(gamma: f64) -> String {
    format!("gamma_{gamma}")
}

/// Run the same config for each Moreau–Yosida `γ`, concurrently, each into
/// its own files.
pub fn sweep(
    cfg: &ExperimentConfig,
    gammas: &[f64],
    out_dir: &Path,
) -> Vec<(f64, Result<RunOutput>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = gammas
            .iter()
            .map(|&gamma| {
                let mut member = cfg.clone();
                member.moreau_gamma = gamma;
                scope.spawn(move || {
                    let out = member
                        .validate()
                        .map_err(CliError::from)
                        .and_then(|_| run_and_emit(&member, out_dir, &sweep_name(gamma)));
                    (gamma, out)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjointCheck {
    pub trials: usize,
    pub mesh_n: usize,
    pub worst_defect: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaylorCheck {
    pub pde_order: f64,
    pub toy_order: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub prox: Vec<ProxCheckReport>,
    pub adjoint: AdjointCheck,
    pub taylor: TaylorCheck,
    pub three_point: ThreePointReport,
    pub descent: Vec<DescentCase>,
    pub passed: bool,
}

pub const ADJOINT_TOL: f64 = 1e-10;
pub const TAYLOR_MIN_ORDER: f64 = 1.9;
pub const DESCENT_ITERATIONS: usize = 1000;

/// Worst relative adjoint defect of the PDE derivative over `trials` random
/// `(x, h, w)` on a mesh with `mesh_n` elements.
pub fn pde_adjoint_check(mesh_n: usize, trials: usize, seed: u64) -> Result<AdjointCheck> {
    let problem = pde_problem(mesh_n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x = random_vector(&mut rng, problem.primal_dim(), 0.1, 10.0);
        let h = random_vector(&mut rng, problem.primal_dim(), -1.0, 1.0);
        let w = random_vector(&mut rng, problem.dual_dim(), -1.0, 1.0);
        worst = worst.max(adjoint_defect(&problem, &x, &h, &w)?);
    }
    Ok(AdjointCheck {
        trials,
        mesh_n,
        worst_defect: worst,
        passed: worst <= ADJOINT_TOL,
    })
}

/// Taylor-remainder orders of the PDE map (at `mesh_n`) and of the toy `K`.
pub fn taylor_check(mesh_n: usize, seed: u64) -> Result<TaylorCheck> {
    let problem = pde_problem(mesh_n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_vector(&mut rng, problem.primal_dim(), 0.5, 5.0);
    let h = random_vector(&mut rng, problem.primal_dim(), -1.0, 1.0);
    let steps = default_taylor_steps();
    let pde_order = taylor_order(&problem, &x, &h, &steps)?;
    let toy = ComplexToyProblem::new((2.0, 0.0), 0.1)?;
    let toy_order = taylor_order(
        &toy,
        &Vector::from_column_slice(&[1.3, 0.4]),
        &Vector::from_column_slice(&[0.6, -0.8]),
        &steps,
    )?;
    Ok(TaylorCheck {
        pde_order,
        toy_order,
        passed: pde_order >= TAYLOR_MIN_ORDER && toy_order >= TAYLOR_MIN_ORDER,
    })
}

/// Every diagnostic suite at its default size.
pub fn check_all(samples: usize, seed: u64) -> Result<CheckReport> {
    let prox = prox_suite(samples, seed)?;
    let adjoint = pde_adjoint_check(100, 100, seed)?;
    let taylor = taylor_check(100, seed)?;
    let three_point = ComplexToyProblem::new((2.0, 0.0), 0.1)?
        .sample_three_point_condition(1e-2, 1.0, 1.0, 10_000, seed)?;
    let descent = descent_suite(DESCENT_ITERATIONS)?;
    let descent_ok = descent.iter().all(|c| {
        if c.bounds_passed {
            c.report.passed()
        } else {
            !c.report.passed()
        }
    });
    let passed = prox.iter().all(|r| r.passed)
        && adjoint.passed
        && taylor.passed
        && three_point.violations == 0
        && descent_ok;
    Ok(CheckReport {
        prox,
        adjoint,
        taylor,
        three_point,
        descent,
        passed,
    })
}

fn pde_problem(mesh_n: usize) -> Result<nlpdhgm::experiments::ExperimentProblem> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::L1Fit);
    cfg.mesh_n = mesh_n;
    Ok(build_problem(&cfg)?)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vector {
    Vector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

/// Output directory helper: `dir` or the current directory.
pub fn out_dir_or_default(dir: Option<PathBuf>) -> PathBuf {
    dir.unwrap_or_else(|| PathBuf::from("."))
}
