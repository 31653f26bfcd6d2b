//! Randomized consistency checks: adjoint identities, Taylor remainders,
//! proximal-map identities and the descent-inequality suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::experiments::record_run;
use crate::problems::prox::{
    prox_huber, prox_l1, prox_linf_ball, prox_linf_ball_moreau_yosida, prox_nonneg_linear,
    prox_scaled_quadratic, prox_state_constraint, prox_state_constraint_conjugate,
};
use crate::problems::{ComplexToyProblem, SaddleProblem, Vector};
use crate::solver::{
    check_descent_inequality, step_bound_report, AnalysisParams, DescentReport, PrimalDualPoint,
    StepRule,
};

/// `|<∇K(x)h, w> - <h, ∇K(x)^*w>|`, relative to the Cauchy–Schwarz scale
/// `||∇K(x)h|| ||w||`.
pub fn adjoint_defect<P: SaddleProblem + ?Sized>(
    problem: &P,
    x: &Vector,
    h: &Vector,
    w: &Vector,
) -> Result<f64> {
    let dh = problem.apply_dk(x, h)?;
    let lhs = problem.dual_inner(&dh, w);
    let rhs = problem.primal_inner(h, &problem.apply_dk_adjoint(x, w)?);
    let scale = (problem.dual_norm_sq(&dh) * problem.dual_norm_sq(w)).sqrt();
    Ok(if scale > 0.0 {
        (lhs - rhs).abs() / scale
    } else {
        (lhs - rhs).abs()
    })
}

/// Remainders `||K(x + εh) - K(x) - ε∇K(x)h||` for each `ε`.
pub fn taylor_remainders<P: SaddleProblem + ?Sized>(
    problem: &P,
    x: &Vector,
    h: &Vector,
    epsilons: &[f64],
) -> Result<Vec<f64>> {
    let k0 = problem.apply_k(x)?;
    let dh = problem.apply_dk(x, h)?;
    epsilons
        .iter()
        .map(|&eps| {
            let r = problem.apply_k(&(x + h * eps))? - &k0 - &dh * eps;
            Ok(problem.dual_norm_sq(&r).sqrt())
        })
        .collect()
}

/// Least-squares slope of `log remainder` against `log ε`; 2 for a correct
/// derivative, 1 for a wrong one.
pub fn taylor_order<P: SaddleProblem + ?Sized>(
    problem: &P,
    x: &Vector,
    h: &Vector,
    epsilons: &[f64],
) -> Result<f64> {
    let rem = taylor_remainders(problem, x, h, epsilons)?;
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = rem.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(log_slope(&xs, &ys))
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `ε ∈ {1e-2, 1e-2.5, …, 1e-5}`.
pub fn default_taylor_steps() -> Vec<f64> {
    (0..7).map(|k| 10f64.powf(-2.0 - 0.5 * k as f64)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProxCheckReport {
    pub name: &'static str,
    pub samples: usize,
    /// Largest `|prox_{σF*}(v) + σ prox_{F/σ}(v/σ) - v|` (relative to `1 + |v|`).
    pub moreau_defect: f64,
    /// Largest residual of the optimality condition `v - p ∈ t ∂f(p)`.
    pub variational_residual: f64,
    pub passed: bool,
}

/// Tolerance for [`prox_suite`].
pub const PROX_TOL: f64 = 1e-10;

struct Sample {
    v: f64,
    step: f64,
    param: f64,
}

/// Check the Moreau identity and the subdifferential characterisation of
/// each closed-form proximal map at `samples` random points.
///
/// The maps covered are: the scaled quadratic, the nonnegative linear
/// penalty, the `ℓ∞`-ball projection, its Moreau–Yosida regularisation and
/// the state-constraint conjugate.
pub fn prox_suite(samples: usize, seed: u64) -> Result<Vec<ProxCheckReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Sample> = (0..samples)
        .map(|_| Sample {
            v: rng.random_range(-200.0..200.0),
            step: 10f64.powf(rng.random_range(-2.0..2.0)),
            param: 10f64.powf(rng.random_range(-2.0..1.0)),
        })
        .collect();
    let one = |x: f64| Vector::from_element(1, x);
    let rel = |defect: f64, v: f64| defect.abs() / (1.0 + v.abs());

    let mut reports = Vec::new();
    let mut push = |name, moreau: f64, variational: f64| {
        reports.push(ProxCheckReport {
            name,
            samples,
            moreau_defect: moreau,
            variational_residual: variational,
            passed: moreau <= PROX_TOL && variational <= PROX_TOL,
        })
    };

    // G = ½x²; G* = G.
    let (mut moreau, mut var) = (0.0f64, 0.0f64);
    for s in &draws {
        let p = prox_scaled_quadratic(s.step, &one(s.v))[0];
        var = var.max(rel(s.v - p - s.step * p, s.v));
        let q = prox_scaled_quadratic(1.0 / s.step, &one(s.v / s.step))[0];
        moreau = moreau.max(rel(p + s.step * q - s.v, s.v));
    }
    push("scaled_quadratic", moreau, var);

    // G = αt + δ_{t ≥ 0}; G* = δ_{s ≤ α}, whose prox is min(v, α).
    let (mut moreau, mut var) = (0.0f64, 0.0f64);
    for s in &draws {
        let alpha = s.param;
        let p = prox_nonneg_linear(s.step, alpha, s.v);
        let r = s.v - p - s.step * alpha;
        var = var.max(rel(if p > 0.0 { r } else { r.max(0.0) }, s.v));
        let conj = s.v.min(alpha);
        let back = prox_nonneg_linear(1.0 / s.step, alpha, s.v / s.step);
        moreau = moreau.max(rel(conj + s.step * back - s.v, s.v));
    }
    push("nonneg_linear", moreau, var);

    // F* = δ_{|y| ≤ b}; F = b|·|.
    let (mut moreau, mut var) = (0.0f64, 0.0f64);
    for s in &draws {
        let b = 1.0 / s.param;
        let p = prox_linf_ball(b, &one(s.v))[0];
        var = var.max(rel(normal_cone_residual(s.v - p, p, -b, b), s.v));
        let back = prox_l1(1.0 / s.step, b, &one(s.v / s.step))[0];
        moreau = moreau.max(rel(p + s.step * back - s.v, s.v));
    }
    push("linf_ball", moreau, var);

    // F*_γ = δ_{|y| ≤ b} + γ/2 y²; its conjugate is the Huber function.
    let (mut moreau, mut var) = (0.0f64, 0.0f64);
    for s in &draws {
        let (b, gamma) = (1.0 / s.param, s.param * 3.0);
        let p = prox_linf_ball_moreau_yosida(s.step, gamma, b, &one(s.v))[0];
        var = var.max(rel(
            normal_cone_residual(s.v - p - s.step * gamma * p, p, -b, b),
            s.v,
        ));
        let back = prox_huber(1.0 / s.step, gamma, b, &one(s.v / s.step))[0];
        moreau = moreau.max(rel(p + s.step * back - s.v, s.v));
    }
    push("linf_ball_moreau_yosida", moreau, var);

    // F = 1/(2α)(y - zd)² + δ_{y ≤ c}; the conjugate prox must agree with
    // the Moreau decomposition, and the primal prox with its optimality
    // condition.
    let (mut moreau, mut var) = (0.0f64, 0.0f64);
    for s in &draws {
        let (alpha, c, zd) = (s.param, 0.68, one(0.9));
        let p = prox_state_constraint_conjugate(s.step, alpha, c, &zd, &one(s.v))?[0];
        let q = prox_state_constraint(1.0 / s.step, alpha, c, &zd, &one(s.v / s.step))?[0];
        moreau = moreau.max(rel(p + s.step * q - s.v, s.v));
        let t = 1.0 / s.step;
        let w = s.v / s.step;
        let r = w - q - t * (q - zd[0]) / alpha;
        var = var.max(rel(normal_cone_residual(r, q, f64::NEG_INFINITY, c), w));
    }
    push("state_constraint_conjugate", moreau, var);

    Ok(reports)
}

/// Distance of `r` from the normal cone of `[lo, hi]` at `p`.
fn normal_cone_residual(r: f64, p: f64, lo: f64, hi: f64) -> f64 {
    let at_hi = p >= hi;
    let at_lo = p <= lo;
    match (at_lo, at_hi) {
        (true, true) => 0.0,
        (false, true) => (-r).max(0.0),
        (true, false) => r.max(0.0),
        (false, false) => r.abs(),
    }
}

/// One run of the descent-inequality suite.
#[derive(Clone, Debug, Serialize)]
pub struct DescentCase {
    pub label: String,
    pub rule: StepRule,
    /// Whether the step-length bounds hold for this configuration.
    pub bounds_passed: bool,
    pub report: DescentReport,
}

/// Offset of the toy start from its saddle point in the descent suite.
pub const DESCENT_OFFSET: f64 = 0.1;

/// Descent-inequality suite on the complex toy (`z = (2, 0)`, `α = 0.1`),
/// started at `x̂ + (d, d)`, `y = 0` with `d = DESCENT_OFFSET`.
///
/// Three configurations satisfy the step bounds (two constant, one
/// accelerated); the last inflates the constant primal step tenfold and
/// breaks them.
pub fn descent_suite(iterations: usize) -> Result<Vec<DescentCase>> {
    let problem = ComplexToyProblem::new((2.0, 0.0), 0.1)?;
    let reference = problem.toy_reference().point.clone();
    let d = DESCENT_OFFSET;
    let start = PrimalDualPoint::new(
        Vector::from_column_slice(&[reference.x[0] + d, reference.x[1] + d]),
        Vector::zeros(2),
    );
    let gap = start.sub(&reference);
    // ||∇K(t, υ)|| = max(1, t) on the ball of radius |d|√2 around x̂.
    let params = AnalysisParams {
        lipschitz: 1.0,
        r_k: (reference.x[0] + gap.x.norm()).max(1.0),
        rho_y: gap.y.norm(),
        delta: 0.5,
        kappa: 0.5,
        ..Default::default()
    };
    let cases = [
        (
            "constant",
            StepRule::ConstantWeak {
                tau: 0.2,
                sigma: 0.5,
            },
        ),
        (
            "constant_small",
            StepRule::ConstantWeak {
                tau: 0.05,
                sigma: 0.05,
            },
        ),
        (
            "accelerated",
            StepRule::Accelerated {
                tau0: 0.2,
                sigma0: 0.5,
                gamma_g: 0.5,
            },
        ),
        (
            "inflated_tau",
            StepRule::ConstantWeak {
                tau: 2.0,
                sigma: 0.5,
            },
        ),
    ];
    cases
        .into_iter()
        .map(|(label, rule)| {
            let bounds = step_bound_report(&params, &rule.initial_state()?, None)?;
            let run = record_run(&problem, rule, start.clone(), &reference, iterations)?;
            let metric: Vec<f64> = run.records.iter().map(|r| r.metric_err_sq).collect();
            Ok(DescentCase {
                label: label.to_string(),
                rule,
                bounds_passed: bounds.passed(),
                report: check_descent_inequality(&metric),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_suite_passes() {
        for r in prox_suite(1000, 7).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn toy_adjoint_and_taylor() {
        let p = ComplexToyProblem::new((2.0, 0.5), 0.1).unwrap();
        let x = Vector::from_column_slice(&[1.3, 0.7]);
        let h = Vector::from_column_slice(&[0.4, -0.9]);
        let w = Vector::from_column_slice(&[-0.2, 1.1]);
        assert!(adjoint_defect(&p, &x, &h, &w).unwrap() < 1e-15);
        let order = taylor_order(&p, &x, &h, &default_taylor_steps()).unwrap();
        assert!(order >= 1.9, "{order}");
    }

    /// A problem with a deliberately wrong derivative.
    struct WrongDerivative;

    impl SaddleProblem for WrongDerivative {
        fn primal_dim(&self) -> usize {
            1
        }
        fn dual_dim(&self) -> usize {
            1
        }
        fn apply_k(&self, x: &Vector) -> Result<Vector> {
            Ok(x.map(f64::sin))
        }
        fn apply_dk(&self, _x: &Vector, h: &Vector) -> Result<Vector> {
            Ok(h * 2.0)
        }
        fn apply_dk_adjoint(&self, _x: &Vector, w: &Vector) -> Result<Vector> {
            Ok(w * 3.0)
        }
        fn prox_g(&self, _tau: f64, v: &Vector) -> Result<Vector> {
            Ok(v.clone())
        }
        fn prox_fstar(&self, _sigma: f64, v: &Vector) -> Result<Vector> {
            Ok(v.clone())
        }
    }

    #[test]
    fn checks_detect_errors() {
        let x = Vector::from_element(1, 0.3);
        let h = Vector::from_element(1, 1.0);
        assert!(adjoint_defect(&WrongDerivative, &x, &h, &h).unwrap() > 0.1);
        let order = taylor_order(&WrongDerivative, &x, &h, &default_taylor_steps()).unwrap();
        assert!((order - 1.0).abs() < 0.05, "{order}");
    }
}
