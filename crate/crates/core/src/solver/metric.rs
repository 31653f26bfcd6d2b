//! The local metric `Z_{i+1} M_{i+1}` and the descent inequality built on it.

use serde::Serialize;

use super::point::PrimalDualPoint;
use super::steps::StepState;
use crate::error::Result;
use crate::problems::{SaddleProblem, Vector};

/// Relative tolerance for comparing metric values.
pub const METRIC_RTOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricValue {
    /// `||u||²_{Z_{i+1}M_{i+1}}`; may be negative if the step bounds fail.
    pub value: f64,
    /// Whether `σ_{i+1}ω_iτ_i R_K² < 1`, the condition that makes the form
    /// positive definite. `None` if no bound on `||∇K||` was supplied.
    pub positivity_guaranteed: Option<bool>,
}

/// `||u||²_{Z_{i+1}M_{i+1}} = φ_i||x||² - 2η_i<∇K(x_at)x, y> + ψ_{i+1}||y||²`,
/// linearised at `at` (normally the current iterate `x^i`).
pub fn metric_norm_sq<P: SaddleProblem + ?Sized>(
    problem: &P,
    at: &Vector,
    u: &PrimalDualPoint,
    state: &StepState,
    r_k: Option<f64>,
) -> Result<MetricValue> {
    let dk_x = problem.apply_dk(at, &u.x)?;
    let value = state.phi * problem.primal_norm_sq(&u.x)
        - 2.0 * state.eta * problem.dual_inner(&dk_x, &u.y)
        + state.psi * problem.dual_norm_sq(&u.y);
    Ok(MetricValue {
        value,
        positivity_guaranteed: r_k.map(|r| state.sigma * state.omega * state.tau * r * r < 1.0),
    })
}

/// Outcome of checking a sequence `m_N = ||u^N - û||²_{Z_{N+1}M_{N+1}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DescentReport {
    pub checked: usize,
    /// Indices `N` with `m_N > m_0`.
    pub violations: Vec<usize>,
    /// Indices `N` with `m_N > m_{N-1}`.
    pub monotonicity_violations: Vec<usize>,
    pub first_violation: Option<usize>,
    /// Largest relative excess `(m_N - m_ref) / m_ref` seen.
    pub worst_excess: f64,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.monotonicity_violations.is_empty()
    }
}

/// Check the descent inequality `½m_N ≤ ½m_0` for every `N`, together with
/// the per-step version `m_N ≤ m_{N-1}` that follows when every iteration
/// gap is non-positive.
///
/// Comparisons use the relative tolerance [`METRIC_RTOL`], plus an absolute
/// floor of `METRIC_RTOL² · m_0` so that round-off near convergence is not
/// reported.
pub fn check_descent_inequality(metric_errors: &[f64]) -> DescentReport {
    let mut report = DescentReport {
        checked: metric_errors.len(),
        ..Default::default()
    };
    let Some(&m0) = metric_errors.first() else {
        return report;
    };
    let floor = METRIC_RTOL * METRIC_RTOL * m0.abs();
    let exceeds = |m: f64, reference: f64| m - reference > METRIC_RTOL * reference.abs() + floor;
    let relative =
        |m: f64, reference: f64| (m - reference) / reference.abs().max(f64::MIN_POSITIVE);

    for (n, pair) in metric_errors.windows(2).enumerate() {
        let (prev, cur) = (pair[0], pair[1]);
        let idx = n + 1;
        let mut violated = false;
        if !cur.is_finite() || exceeds(cur, m0) {
            report.violations.push(idx);
            violated = true;
        }
        if !cur.is_finite() || exceeds(cur, prev) {
            report.monotonicity_violations.push(idx);
            violated = true;
        }
        if violated {
            report.first_violation.get_or_insert(idx);
            let excess = relative(cur, prev).max(relative(cur, m0));
            if excess.is_nan() || excess > report.worst_excess {
                report.worst_excess = if excess.is_nan() {
                    f64::INFINITY
                } else {
                    excess
                };
            }
        }
    }
    report
}
