use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, RuleKind};
use super::rates::{check_bound_dominance, BoundDominance};
use super::wiring::{build_l1fit_problem, build_state_constraint_problem, PdeSaddleProblem};
use crate::error::{Error, Result};
use crate::problems::{ComplexToyProblem, SaddleProblem, Vector};
use crate::solver::{
    check_descent_inequality, metric_norm_sq, step_bound_report, AnalysisParams, DescentReport,
    Iterate, IterationRecord, PrimalDualPoint, StepBoundReport, StepRule, StepState,
};

/// Runs abort once `||u^N - û||²` exceeds this.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Squared errors below `ROUNDOFF_REL · ||û||²` (a relative accuracy of
/// `1e-10` in norm) are treated as converged to round-off by rate checks.
pub const ROUNDOFF_REL: f64 = 1e-20;

/// Starting point of the toy runs, `(t, υ) = (1, ½)`, `y = 0`.
pub const TOY_START: (f64, f64) = (1.0, 0.5);

#[derive(Clone, Debug)]
pub enum ExperimentProblem {
    Toy(ComplexToyProblem),
    Pde(PdeSaddleProblem),
}

macro_rules! delegate {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            ExperimentProblem::Toy($p) => $e,
            ExperimentProblem::Pde($p) => $e,
        }
    };
}

impl SaddleProblem for ExperimentProblem {
    fn primal_dim(&self) -> usize {
        delegate!(self, p => p.primal_dim())
    }
    fn dual_dim(&self) -> usize {
        delegate!(self, p => p.dual_dim())
    }
    fn apply_k(&self, x: &Vector) -> Result<Vector> {
        delegate!(self, p => p.apply_k(x))
    }
    fn apply_dk(&self, x: &Vector, h: &Vector) -> Result<Vector> {
        delegate!(self, p => p.apply_dk(x, h))
    }
    fn apply_dk_adjoint(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        delegate!(self, p => p.apply_dk_adjoint(x, w))
    }
    fn prox_g(&self, tau: f64, v: &Vector) -> Result<Vector> {
        delegate!(self, p => p.prox_g(tau, v))
    }
    fn prox_fstar(&self, sigma: f64, v: &Vector) -> Result<Vector> {
        delegate!(self, p => p.prox_fstar(sigma, v))
    }
    fn primal_inner(&self, a: &Vector, b: &Vector) -> f64 {
        delegate!(self, p => p.primal_inner(a, b))
    }
    fn dual_inner(&self, a: &Vector, b: &Vector) -> f64 {
        delegate!(self, p => p.dual_inner(a, b))
    }
    fn reference(&self) -> Option<&PrimalDualPoint> {
        delegate!(self, p => p.reference())
    }
}

impl ExperimentProblem {
    pub fn initial_point(&self) -> PrimalDualPoint {
        match self {
            ExperimentProblem::Toy(_) => PrimalDualPoint::new(
                Vector::from_column_slice(&[TOY_START.0, TOY_START.1]),
                Vector::zeros(2),
            ),
            ExperimentProblem::Pde(p) => {
                PrimalDualPoint::new(p.initial_potential(), Vector::zeros(p.dual_dim()))
            }
        }
    }

    pub fn warnings(&self) -> &[String] {
        match self {
            ExperimentProblem::Toy(_) => &[],
            ExperimentProblem::Pde(p) => p.warnings(),
        }
    }
}

pub fn build_problem(cfg: &ExperimentConfig) -> Result<ExperimentProblem> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        ExperimentKind::ComplexToy => {
            ExperimentProblem::Toy(ComplexToyProblem::new((cfg.z_re, cfg.z_im), cfg.alpha)?)
        }
        ExperimentKind::L1Fit => ExperimentProblem::Pde(build_l1fit_problem(cfg)?),
        ExperimentKind::StateConstraint => {
            ExperimentProblem::Pde(build_state_constraint_problem(cfg)?)
        }
    })
}

/// `max(1, ||∇K(x⁰)x⁰|| / ||x⁰||)` in the problem's norms.
pub fn estimate_lipschitz<P: SaddleProblem + ?Sized>(problem: &P, x0: &Vector) -> Result<f64> {
    let norm = problem.primal_norm_sq(x0).sqrt();
    if !(norm > 0.0) {
        return Err(Error::invalid("x0", "must be nonzero"));
    }
    let image = problem.apply_dk(x0, x0)?;
    Ok((problem.dual_norm_sq(&image).sqrt() / norm).max(1.0))
}

/// Power-iteration estimate of `||∇K(x)||`.
pub fn operator_norm_estimate<P: SaddleProblem + ?Sized>(
    problem: &P,
    x: &Vector,
    iterations: usize,
) -> Result<f64> {
    let mut v = Vector::from_fn(problem.primal_dim(), |i, _| 1.0 + 0.1 * (i as f64).sin());
    let mut estimate = 0.0;
    for _ in 0..iterations.max(1) {
        let norm = problem.primal_norm_sq(&v).sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        v /= norm;
        let w = problem.apply_dk_adjoint(x, &problem.apply_dk(x, &v)?)?;
        estimate = problem.primal_inner(&v, &w).max(0.0).sqrt();
        v = w;
    }
    Ok(estimate)
}

/// Margins used for the theoretical bound column and the bound report.
pub const DELTA: f64 = 0.5;
pub const KAPPA: f64 = 0.99;

/// Theoretical bound attached to record `N`, from `m₀ = ||u⁰ - û||²_{Z₁M₁}`
/// and the metric lower bound `Z_{N+1}M_{N+1} ≥ diag(δφ_N, (κ-δ)/(1-δ) ψ_{N+1})`.
/// Accelerated runs bound `||x^N - x̂||²`, the others `||u^N - û||²`.
pub fn theoretical_bound(rule: &StepRule, state: &StepState, m0: f64) -> f64 {
    let m0 = m0.max(0.0);
    let primal = DELTA * state.phi;
    match rule {
        StepRule::Accelerated { .. } => m0 / primal,
        _ => m0 / primal.min((KAPPA - DELTA) / (1.0 - DELTA) * state.psi),
    }
}

/// Output of a recorded run.
#[derive(Clone, Debug)]
pub struct RecordedRun {
    pub records: Vec<IterationRecord>,
    /// Iteration at which the run was aborted, if it diverged.
    pub diverged_at: Option<usize>,
    pub final_point: PrimalDualPoint,
}

/// Run `n_max` iterations from `start`, recording errors against `reference`.
pub fn record_run<P: SaddleProblem + ?Sized>(
    problem: &P,
    rule: StepRule,
    start: PrimalDualPoint,
    reference: &PrimalDualPoint,
    n_max: usize,
) -> Result<RecordedRun> {
    let mut it = Iterate::new(problem, rule, start)?;
    let mut records = Vec::with_capacity(n_max + 1);
    let mut m0 = None;
    let mut diverged_at = None;
    loop {
        let n = it.iter();
        let gap = it.point().sub(reference);
        let err_x_sq = problem.primal_norm_sq(&gap.x);
        let err_u_sq = err_x_sq + problem.dual_norm_sq(&gap.y);
        let state = *it.state();
        let metric = if gap.is_finite() && state.ledger_is_finite() {
            metric_norm_sq(problem, &it.point().x, &gap, &state, None)?.value
        } else {
            f64::NAN
        };
        let m0 = *m0.get_or_insert(metric);
        records.push(IterationRecord {
            iter: n,
            tau: state.tau,
            sigma: state.sigma,
            omega: state.omega,
            err_x_sq,
            err_u_sq,
            metric_err_sq: metric,
            bound: theoretical_bound(&rule, &state, m0),
        });
        if !(err_u_sq <= DIVERGENCE_THRESHOLD) {
            diverged_at = Some(n);
            break;
        }
        if n >= n_max {
            break;
        }
        it.step()?;
    }
    Ok(RecordedRun {
        records,
        diverged_at,
        final_point: it.into_point(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub rule: StepRule,
    pub l_tilde: f64,
    /// Estimate of `||∇K(x̂)||`, used as `R_K` in the bound report.
    pub r_k: f64,
    pub analysis: AnalysisParams,
    pub bound_report: StepBoundReport,
    #[serde(skip)]
    pub reference: PrimalDualPoint,
    #[serde(skip)]
    pub final_point: PrimalDualPoint,
    #[serde(skip)]
    pub records: Vec<IterationRecord>,
    pub diverged_at: Option<usize>,
    /// `||û||²` in the problem's norms.
    pub reference_norm_sq: f64,
    pub warnings: Vec<String>,
}

impl ExperimentRun {
    pub fn err_x_sq(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.err_x_sq).collect()
    }

    pub fn err_u_sq(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.err_u_sq).collect()
    }

    pub fn metric_err_sq(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.metric_err_sq).collect()
    }

    /// Descent-inequality check over the records whose metric is defined
    /// (the testing ledger of linear-rate runs eventually overflows).
    pub fn descent_report(&self) -> DescentReport {
        let metric: Vec<f64> = self
            .records
            .iter()
            .take_while(|r| !r.metric_err_sq.is_nan())
            .map(|r| r.metric_err_sq)
            .collect();
        check_descent_inequality(&metric)
    }

    /// Squared error level treated as round-off.
    pub fn roundoff_floor(&self) -> f64 {
        ROUNDOFF_REL * self.reference_norm_sq.max(f64::MIN_POSITIVE)
    }

    /// Bound dominance of `||u^N - û||²` by `C (1 + 2γ̃_G τ)^{-N}` from
    /// `N = start`, on windows of `window_len` iterations.
    pub fn bound_dominance(
        &self,
        start: usize,
        window_len: usize,
        tolerance: f64,
    ) -> Result<BoundDominance> {
        let ratio = self
            .theoretical_ratio()
            .ok_or_else(|| Error::RateFit("bound dominance needs a linear-rate run".into()))?;
        check_bound_dominance(
            &self.err_u_sq(),
            ratio,
            start,
            window_len,
            tolerance,
            self.roundoff_floor(),
        )
    }

    /// `(1 + 2γ̃_G τ)^{-1}` for linear-rate runs.
    pub fn theoretical_ratio(&self) -> Option<f64> {
        match self.rule {
            StepRule::LinearRate { tau, gamma_g, .. } => Some(1.0 / (1.0 + 2.0 * gamma_g * tau)),
            _ => None,
        }
    }
}

/// Run an experiment end to end.
///
/// The toy is measured against its closed-form saddle point; the PDE
/// experiments first run `ref_multiplier · n_max` iterations and use the
/// final iterate as `û`, then rerun `n_max` iterations from the same start.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    let problem = build_problem(cfg)?;
    let start = problem.initial_point();
    let l_tilde = estimate_lipschitz(&problem, &start.x)?;
    let rule = cfg.step_rule(l_tilde)?;

    let reference = match &problem {
        ExperimentProblem::Toy(p) => p.toy_reference().point.clone(),
        ExperimentProblem::Pde(_) => {
            let mut it = Iterate::new(&problem, rule, start.clone())?;
            for _ in 0..cfg.ref_multiplier * cfg.n_max {
                it.step()?;
                if !it.point().is_finite() {
                    return Err(Error::Diverged {
                        iteration: it.iter(),
                        value: f64::NAN,
                    });
                }
            }
            it.into_point()
        }
    };

    let run = record_run(&problem, rule, start.clone(), &reference, cfg.n_max)?;

    let r_k = operator_norm_estimate(&problem, &reference.x, 50)?;
    let gap = start.sub(&reference);
    let analysis = AnalysisParams {
        lipschitz: l_tilde,
        r_k: r_k.max(f64::MIN_POSITIVE),
        rho_y: problem.dual_norm_sq(&gap.y).sqrt(),
        delta: DELTA,
        kappa: KAPPA,
        ..Default::default()
    };
    let bound_report = step_bound_report(
        &analysis,
        &rule.initial_state()?,
        Some((problem.primal_norm_sq(&gap.x), problem.dual_norm_sq(&gap.y))),
    )?;

    let reference_norm_sq = problem.point_norm_sq(&reference);
    let mut warnings = problem.warnings().to_vec();
    if let ExperimentProblem::Toy(p) = &problem {
        if !p.toy_reference().unique {
            warnings.push("|z| ≤ α: the reference saddle point is not unique".into());
        }
    }
    if cfg.rule == RuleKind::Accelerated && cfg.gamma_g == 0.0 {
        warnings.push("gamma_g = 0: running with constant steps".into());
    }
    Ok(ExperimentRun {
        config: cfg.clone(),
        rule,
        l_tilde,
        r_k,
        analysis,
        bound_report,
        reference,
        final_point: run.final_point,
        records: run.records,
        diverged_at: run.diverged_at,
        reference_norm_sq,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{estimate_l_tilde, DualMetric, PotentialCoefficient};

    #[test]
    fn generic_lipschitz_estimate_matches_the_pde_one() {
        let cfg = ExperimentConfig {
            mesh_n: 80,
            ..ExperimentConfig::new(ExperimentKind::L1Fit)
        };
        let ExperimentProblem::Pde(p) = build_problem(&cfg).unwrap() else {
            unreachable!()
        };
        let x0 = p.initial_potential();
        let generic = estimate_lipschitz(&p, &x0).unwrap();
        let direct = estimate_l_tilde(
            p.mesh(),
            &PotentialCoefficient::with_default_floor(x0).unwrap(),
            p.source(),
            DualMetric::Lumped,
        )
        .unwrap();
        assert!((generic - direct).abs() < 1e-14);
    }

    #[test]
    fn toy_start_gives_unit_l_tilde() {
        let p = build_problem(&ExperimentConfig::new(ExperimentKind::ComplexToy)).unwrap();
        let l = estimate_lipschitz(&p, &p.initial_point().x).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_iterations_give_one_record() {
        for kind in [ExperimentKind::ComplexToy, ExperimentKind::L1Fit] {
            let cfg = ExperimentConfig {
                n_max: 0,
                mesh_n: 20,
                ..ExperimentConfig::new(kind)
            };
            let run = run_experiment(&cfg).unwrap();
            assert_eq!(run.records.len(), 1);
            assert_eq!(run.records[0].iter, 0);
        }
    }

    #[test]
    fn toy_operator_norm_is_the_largest_singular_value() {
        let p = build_problem(&ExperimentConfig::new(ExperimentKind::ComplexToy)).unwrap();
        let x = Vector::from_column_slice(&[1.9, 0.3]);
        // ∇K(t, υ) = rotation · diag(1, t), so ||∇K|| = max(1, t).
        assert!((operator_norm_estimate(&p, &x, 50).unwrap() - 1.9).abs() < 1e-10);
    }

    #[test]
    fn divergence_is_reported() {
        let cfg = ExperimentConfig {
            tau: Some(1e3),
            sigma: Some(1e3),
            rule: RuleKind::Constant,
            n_max: 200,
            mesh_n: 20,
            ..ExperimentConfig::new(ExperimentKind::L1Fit)
        };
        let problem = build_problem(&cfg).unwrap();
        let rule = cfg.step_rule(1.0).unwrap();
        let start = problem.initial_point();
        let far = PrimalDualPoint::new(start.x.clone() * 1e7, start.y.clone());
        let run = record_run(&problem, rule, start, &far, 5).unwrap();
        assert_eq!(run.diverged_at, Some(0));
        assert_eq!(run.records.len(), 1);
    }
}
