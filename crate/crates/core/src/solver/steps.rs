//! Scalar step-length rules and the testing ledger.
//!
//! A [`StepState`] describes iteration `i`: the primal step `τ_i`, the dual
//! step `σ_{i+1}` used in the dual update of that iteration, the previous
//! dual step `σ_i`, the over-relaxation `ω_i` and the testing parameters
//! `φ_i`, `ψ_{i+1}`, `η_i`. The ledger satisfies
//!
//! ```text
//! η_i = φ_i τ_i = ψ_{i+1} σ_{i+1} ω_i
//! ```
//!
//! which is what makes `Z_{i+1} M_{i+1}` self-adjoint. The ledger never
//! influences the iterates.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepState {
    /// Iteration index `i`.
    pub iter: usize,
    /// Primal step `τ_i`.
    pub tau: f64,
    /// Dual step `σ_{i+1}` used to produce `y^{i+1}`.
    pub sigma: f64,
    /// Previous dual step `σ_i`.
    pub sigma_prev: f64,
    /// Over-relaxation `ω_i`.
    pub omega: f64,
    /// Primal test `φ_i`.
    pub phi: f64,
    /// Dual test `ψ_{i+1}`.
    pub psi: f64,
    /// `η_i`.
    pub eta: f64,
}

impl StepState {
    /// Largest relative defect of the two ledger identities.
    pub fn ledger_defect(&self) -> f64 {
        let primal = (self.phi * self.tau - self.eta).abs() / self.eta;
        let dual = (self.psi * self.sigma * self.omega - self.eta).abs() / self.eta;
        primal.max(dual)
    }

    /// `σ_i τ_i`, the product constrained by the dual step bound.
    pub fn sigma_tau_product(&self) -> f64 {
        self.sigma_prev * self.tau
    }

    /// Whether the testing parameters are still representable. Under the
    /// linear rule they grow geometrically and overflow after a few hundred
    /// iterations with large steps; the iterates are unaffected.
    pub fn ledger_is_finite(&self) -> bool {
        [self.phi, self.psi, self.eta].iter().all(|v| v.is_finite())
    }

    /// Check the step lengths, which are all the iteration itself uses.
    pub(crate) fn validate_steps(&self) -> Result<()> {
        Self::check_positive(&[
            ("tau", self.tau),
            ("sigma", self.sigma),
            ("omega", self.omega),
        ])
    }

    fn check_positive(fields: &[(&'static str, f64)]) -> Result<()> {
        for &(name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("step state entry must be positive, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

/// One of the three step-length regimes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    /// Constant `τ`, `σ` and `ω = 1`; weak convergence without a rate.
    ConstantWeak { tau: f64, sigma: f64 },
    /// `ω_i = 1/√(1 + 2τ_iγ̃_G)`, `τ_{i+1} = τ_iω_i`, `σ_{i+1} = σ_i/ω_i`;
    /// `O(1/N²)` for the primal iterates.
    Accelerated {
        tau0: f64,
        sigma0: f64,
        gamma_g: f64,
    },
    /// Constant `τ`, `σ = (γ̃_G/γ̃_{F*})τ`, `ω = 1/(1 + 2γ̃_Gτ)`; linear rate
    /// for the full iterates.
    LinearRate {
        tau: f64,
        gamma_g: f64,
        gamma_fstar: f64,
    },
}

impl StepRule {
    /// The accelerated rule, or the constant rule when `gamma_g == 0`.
    pub fn accelerated(tau0: f64, sigma0: f64, gamma_g: f64) -> Self {
        if gamma_g == 0.0 {
            StepRule::ConstantWeak {
                tau: tau0,
                sigma: sigma0,
            }
        } else {
            StepRule::Accelerated {
                tau0,
                sigma0,
                gamma_g,
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepRule::ConstantWeak { .. } => "constant",
            StepRule::Accelerated { .. } => "accelerated",
            StepRule::LinearRate { .. } => "linear",
        }
    }

    /// `γ̃_G` (zero for the constant rule).
    pub fn gamma_g(&self) -> f64 {
        match *self {
            StepRule::ConstantWeak { .. } => 0.0,
            StepRule::Accelerated { gamma_g, .. } | StepRule::LinearRate { gamma_g, .. } => gamma_g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be positive and finite, got {v}"),
                ))
            }
        };
        match *self {
            StepRule::ConstantWeak { tau, sigma } => {
                positive("tau", tau)?;
                positive("sigma", sigma)
            }
            StepRule::Accelerated {
                tau0,
                sigma0,
                gamma_g,
            } => {
                positive("tau", tau0)?;
                positive("sigma", sigma0)?;
                positive("gamma_g", gamma_g)
            }
            StepRule::LinearRate {
                tau,
                gamma_g,
                gamma_fstar,
            } => {
                positive("tau", tau)?;
                positive("gamma_g", gamma_g)?;
                positive("gamma_fstar", gamma_fstar)
            }
        }
    }

    /// State for iteration 0.
    pub fn initial_state(&self) -> Result<StepState> {
        self.validate()?;
        Ok(match *self {
            StepRule::ConstantWeak { tau, sigma } => StepState {
                iter: 0,
                tau,
                sigma,
                sigma_prev: sigma,
                omega: 1.0,
                phi: 1.0 / tau,
                psi: 1.0 / sigma,
                eta: 1.0,
            },
            StepRule::Accelerated {
                tau0,
                sigma0,
                gamma_g,
            } => {
                let omega = 1.0 / (1.0 + 2.0 * tau0 * gamma_g).sqrt();
                let phi = 1.0 / tau0;
                StepState {
                    iter: 0,
                    tau: tau0,
                    sigma: sigma0 / omega,
                    sigma_prev: sigma0,
                    omega,
                    phi,
                    psi: 1.0 / sigma0,
                    eta: phi * tau0,
                }
            }
            StepRule::LinearRate {
                tau,
                gamma_g,
                gamma_fstar,
            } => make_linear_rate(tau, gamma_g, gamma_fstar)?,
        })
    }

    /// State for the next iteration.
    pub fn advance(&self, state: &StepState) -> StepState {
        match *self {
            StepRule::ConstantWeak { .. } => advance_constant(state),
            StepRule::Accelerated { gamma_g, .. } => advance_accelerated(state, gamma_g),
            StepRule::LinearRate { gamma_g, .. } => advance_linear(state, gamma_g),
        }
    }
}

/// Constant rule: steps and ledger are unchanged.
pub fn advance_constant(state: &StepState) -> StepState {
    StepState {
        iter: state.iter + 1,
        ..*state
    }
}

/// Accelerated rule. With `gamma_g == 0` this degenerates to the constant
/// rule.
pub fn advance_accelerated(state: &StepState, gamma_g: f64) -> StepState {
    let growth = 1.0 + 2.0 * state.tau * gamma_g;
    let tau = state.tau * state.omega;
    let omega = 1.0 / (1.0 + 2.0 * tau * gamma_g).sqrt();
    let phi = state.phi * growth;
    StepState {
        iter: state.iter + 1,
        tau,
        sigma: state.sigma / omega,
        sigma_prev: state.sigma,
        omega,
        phi,
        psi: state.psi,
        eta: phi * tau,
    }
}

/// Initial state of the linear-rate rule.
pub fn make_linear_rate(tau: f64, gamma_g: f64, gamma_fstar: f64) -> Result<StepState> {
    for (name, v) in [
        ("tau", tau),
        ("gamma_g", gamma_g),
        ("gamma_fstar", gamma_fstar),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(
                name,
                format!("must be positive and finite, got {v}"),
            ));
        }
    }
    let sigma = gamma_g / gamma_fstar * tau;
    let growth = 1.0 + 2.0 * gamma_g * tau;
    Ok(StepState {
        iter: 0,
        tau,
        sigma,
        sigma_prev: sigma,
        omega: 1.0 / growth,
        phi: 1.0 / tau,
        // ψ_1 = ψ_0 (1 + 2σγ̃_{F*}) = (1 + 2γ̃_Gτ)/σ
        psi: growth / sigma,
        eta: 1.0,
    })
}

/// Linear-rate rule: steps constant, ledger grows by `1 + 2γ̃_Gτ`.
pub fn advance_linear(state: &StepState, gamma_g: f64) -> StepState {
    let growth = 1.0 + 2.0 * gamma_g * state.tau;
    let phi = state.phi * growth;
    StepState {
        iter: state.iter + 1,
        phi,
        psi: state.psi * growth,
        eta: phi * state.tau,
        ..*state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_rule_is_stationary() {
        let rule = StepRule::ConstantWeak {
            tau: 0.25,
            sigma: 0.5,
        };
        let s0 = rule.initial_state().unwrap();
        assert_eq!((s0.tau, s0.sigma, s0.omega), (0.25, 0.5, 1.0));
        assert_eq!((s0.phi, s0.psi), (4.0, 2.0));
        let mut s = s0;
        for _ in 0..100 {
            s = rule.advance(&s);
            assert_eq!(s.phi * s.tau, s0.eta);
        }
        assert_eq!(
            (s.tau, s.sigma, s.omega, s.phi, s.psi),
            (0.25, 0.5, 1.0, 4.0, 2.0)
        );
        assert_eq!(s.iter, 100);
    }

    #[test]
    fn accelerated_first_step() {
        let rule = StepRule::accelerated(0.25, 0.5, 0.5);
        let s0 = rule.initial_state().unwrap();
        assert_relative_eq!(s0.omega, 1.0 / 1.25f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(s0.omega, 0.894_427_191, epsilon = 1e-9);
        assert_relative_eq!(s0.sigma, 0.559_016_994, epsilon = 1e-9);
        let s1 = rule.advance(&s0);
        assert_relative_eq!(s1.tau, 0.223_606_797_7, epsilon = 1e-9);
        assert_eq!(s1.sigma_prev, s0.sigma);
        assert_relative_eq!(s1.sigma_tau_product(), 0.125, max_relative = 1e-15);
    }

    #[test]
    fn accelerated_without_gamma_is_constant() {
        assert_eq!(
            StepRule::accelerated(0.25, 0.5, 0.0),
            StepRule::ConstantWeak {
                tau: 0.25,
                sigma: 0.5
            }
        );
        let s = StepRule::ConstantWeak {
            tau: 0.25,
            sigma: 0.5,
        }
        .initial_state()
        .unwrap();
        let t = advance_accelerated(&s, 0.0);
        assert_eq!(
            (t.tau, t.sigma, t.omega, t.phi, t.psi),
            (s.tau, s.sigma, s.omega, s.phi, s.psi)
        );
    }

    #[test]
    fn accelerated_tau_decays_like_one_over_n() {
        let rule = StepRule::accelerated(0.25, 0.5, 0.5);
        let mut s = rule.initial_state().unwrap();
        let n = 10_000;
        for _ in 0..n {
            let next = rule.advance(&s);
            assert!(s.omega < 1.0 && next.tau < s.tau);
            s = next;
        }
        // τ_N ~ 1/(γ̃_G N) for large N
        let scaled = s.tau * n as f64;
        assert!((1.9..=2.0).contains(&scaled), "τ_N·N = {scaled}");
        assert!(s.ledger_defect() <= 1e-12);
        assert_relative_eq!(s.sigma_tau_product(), 0.125, max_relative = 1e-12);
    }

    #[test]
    fn linear_rate_examples() {
        let s = make_linear_rate(2f64.sqrt(), 0.5, 1.0).unwrap();
        assert_relative_eq!(s.sigma, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-9);
        assert_relative_eq!(s.omega, 0.414_213_562_4, epsilon = 1e-9);
        let sym = make_linear_rate(1.0, 0.3, 0.3).unwrap();
        assert_eq!(sym.sigma, 1.0);
        assert_relative_eq!(sym.omega, 1.0 / 1.6, max_relative = 1e-15);
        assert!(make_linear_rate(0.0, 0.5, 1.0).is_err());
        assert!(make_linear_rate(1.0, -0.5, 1.0).is_err());
    }

    #[test]
    fn linear_rate_ledger_is_geometric() {
        let (tau, g) = (0.3, 0.5);
        let rule = StepRule::LinearRate {
            tau,
            gamma_g: g,
            gamma_fstar: 2.0,
        };
        let mut s = rule.initial_state().unwrap();
        for n in 1..=500 {
            s = rule.advance(&s);
            let closed = (1.0 + 2.0 * g * tau).powi(n);
            assert_relative_eq!(s.phi * tau, closed, max_relative = 1e-10);
            assert!(s.ledger_defect() <= 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ledger_identity_holds_for_all_rules(
            tau in 1e-3f64..2.0,
            sigma in 1e-3f64..2.0,
            g in 1e-3f64..2.0,
            gf in 1e-3f64..2.0,
            steps in 1usize..300,
        ) {
            for rule in [
                StepRule::ConstantWeak { tau, sigma },
                StepRule::Accelerated { tau0: tau, sigma0: sigma, gamma_g: g },
                StepRule::LinearRate { tau, gamma_g: g, gamma_fstar: gf },
            ] {
                let mut s = rule.initial_state().unwrap();
                prop_assert!(s.ledger_defect() <= 1e-12);
                let (phi0, psi0) = (s.phi, s.psi);
                for _ in 0..steps {
                    let next = rule.advance(&s);
                    prop_assert!(next.phi >= s.phi && next.psi >= s.psi);
                    s = next;
                    prop_assert!(s.ledger_defect() <= 1e-12, "{:?}: {}", rule, s.ledger_defect());
                }
                prop_assert!(s.phi >= phi0 && s.psi >= psi0);
                if let StepRule::Accelerated { .. } = rule {
                    prop_assert!((s.sigma_tau_product() - tau * sigma).abs() <= 1e-12 * tau * sigma);
                }
            }
        }
    }
}
