//! Step-length bound reports.

use serde::Serialize;

use super::steps::StepState;
use crate::error::{Error, Result};

/// Problem constants entering the step-length bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalysisParams {
    /// Lipschitz constant `L` of `∇K`.
    pub lipschitz: f64,
    /// `R_K ≥ sup ||∇K||`.
    pub r_k: f64,
    /// Dual neighbourhood radius `ρ_y`.
    pub rho_y: f64,
    /// `λ` from the three-point condition.
    pub lambda: f64,
    pub theta: f64,
    pub p: f64,
    pub zeta: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            lipschitz: 0.0,
            r_k: 1.0,
            rho_y: 0.0,
            lambda: 0.0,
            theta: 0.0,
            p: 2.0,
            zeta: 1.0,
            delta: 0.5,
            kappa: 0.99,
        }
    }
}

impl AnalysisParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("L", self.lipschitz),
            ("rho_y", self.rho_y),
            ("lambda", self.lambda),
            ("theta", self.theta),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be non-negative, got {v}"),
                ));
            }
        }
        if !(self.r_k > 0.0) {
            return Err(Error::invalid("R_K", "must be positive"));
        }
        if !(self.zeta > 0.0) {
            return Err(Error::invalid("zeta", "must be positive"));
        }
        if !(1.0..=2.0).contains(&self.p) {
            return Err(Error::invalid("p", "must lie in [1, 2]"));
        }
        if !(0.0 <= self.delta && self.delta <= self.kappa && self.kappa < 1.0) {
            return Err(Error::invalid("delta", "need 0 ≤ δ ≤ κ < 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `primal_step` or `sigma_tau_product`.
    pub name: &'static str,
    pub value: f64,
    /// Upper limit; `+∞` when unconstrained.
    pub limit: f64,
    pub passed: bool,
    /// `limit - value`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepBoundReport {
    pub checks: Vec<BoundCheck>,
    /// Initial-distance radius, when a reference point was supplied.
    pub r_max: Option<f64>,
    /// `μ = σ_1ω_0/τ_0`.
    pub mu: f64,
}

impl StepBoundReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violated(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Evaluate
///
/// ```text
/// τ_i ≤ δ / (λ + (ω_i + 2) L ρ_y)      and      σ_iτ_i ≤ (1 - κ) / R_K²
/// ```
///
/// and, given `(||x⁰ - x̂||², ||y⁰ - ŷ||²)`, the radius
/// `r_max = √(2δ⁻¹(||x⁰ - x̂||² + μ⁻¹||y⁰ - ŷ||²))` with `μ = σ_1ω_0/τ_0`
/// (`state` must then be the initial state).
pub fn step_bound_report(
    params: &AnalysisParams,
    state: &StepState,
    initial_gap: Option<(f64, f64)>,
) -> Result<StepBoundReport> {
    params.validate()?;
    let denom = params.lambda + (state.omega + 2.0) * params.lipschitz * params.rho_y;
    let primal_limit = if denom > 0.0 {
        params.delta / denom
    } else {
        f64::INFINITY
    };
    let dual_limit = (1.0 - params.kappa) / (params.r_k * params.r_k);
    let check = |name, value: f64, limit: f64| BoundCheck {
        name,
        value,
        limit,
        passed: value <= limit,
        margin: limit - value,
    };
    let mu = state.sigma * state.omega / state.tau;
    let r_max = match initial_gap {
        Some((dx, dy)) if params.delta > 0.0 => Some((2.0 / params.delta * (dx + dy / mu)).sqrt()),
        Some(_) => Some(f64::INFINITY),
        None => None,
    };
    Ok(StepBoundReport {
        checks: vec![
            check("primal_step", state.tau, primal_limit),
            check("sigma_tau_product", state.sigma_tau_product(), dual_limit),
        ],
        r_max,
        mu,
    })
}
