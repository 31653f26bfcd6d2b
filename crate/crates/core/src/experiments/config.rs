use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::StepRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "l1fit")]
    L1Fit,
    #[serde(rename = "state_constraint")]
    StateConstraint,
    #[serde(rename = "complex_toy")]
    ComplexToy,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::L1Fit => "l1fit",
            ExperimentKind::StateConstraint => "state_constraint",
            ExperimentKind::ComplexToy => "complex_toy",
        }
    }

    pub fn is_pde(&self) -> bool {
        !matches!(self, ExperimentKind::ComplexToy)
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1fit" => Ok(ExperimentKind::L1Fit),
            "state_constraint" => Ok(ExperimentKind::StateConstraint),
            "complex_toy" => Ok(ExperimentKind::ComplexToy),
            other => Err(Error::invalid(
                "experiment",
                format!("unknown experiment `{other}`"),
            )),
        }
    }
}

/// Which step-length regime to run; the step lengths themselves are derived
/// from `L̃` at run time unless overridden.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Constant,
    Accelerated,
    Linear,
}

impl std::str::FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(RuleKind::Constant),
            "accelerated" => Ok(RuleKind::Accelerated),
            "linear" => Ok(RuleKind::Linear),
            other => Err(Error::invalid("rule", format!("unknown rule `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub mesh_n: usize,
    pub alpha: f64,
    /// Moreau–Yosida parameter `γ` applied to `F*`; 0 disables it.
    pub moreau_gamma: f64,
    /// Upper state bound (state-constraint experiment only).
    pub c: f64,
    pub rule: RuleKind,
    /// `γ̃_G`; 0 with the accelerated rule gives constant steps.
    pub gamma_g: f64,
    /// `γ̃_{F*}` for the linear rule. Defaults to `moreau_gamma` on the PDE
    /// experiments and to 1 on the toy.
    pub gamma_fstar: Option<f64>,
    /// Override of the initial primal step `τ₀`.
    pub tau: Option<f64>,
    /// Override of the initial dual step `σ₀` (ignored by the linear rule).
    pub sigma: Option<f64>,
    pub n_max: usize,
    /// The PDE reference is `x̂ := x^{ref_multiplier · n_max}`.
    pub ref_multiplier: usize,
    pub seed: u64,
    pub noise_fraction: f64,
    /// Toy data `z`.
    pub z_re: f64,
    pub z_im: f64,
}

impl ExperimentConfig {
    /// Defaults for `kind`, at desk scale.
    pub fn new(kind: ExperimentKind) -> Self {
        let (alpha, n_max) = match kind {
            ExperimentKind::L1Fit => (1e-2, 2000),
            ExperimentKind::StateConstraint => (1e-3, 2000),
            ExperimentKind::ComplexToy => (0.1, 10_000),
        };
        Self {
            experiment: kind,
            mesh_n: 200,
            alpha,
            moreau_gamma: 0.0,
            c: 0.68,
            rule: RuleKind::Accelerated,
            gamma_g: 0.5,
            gamma_fstar: None,
            tau: None,
            sigma: None,
            n_max,
            ref_multiplier: 2,
            seed: 42,
            noise_fraction: 0.3,
            z_re: 2.0,
            z_im: 0.0,
        }
    }

    /// Mesh and iteration counts of the original experiments.
    pub fn full_scale(mut self) -> Self {
        if self.experiment.is_pde() {
            self.mesh_n = 1000;
            self.n_max = 10_000;
        }
        self
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
        let nonneg = |name: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(
                    name,
                    format!("must be nonnegative and finite, got {v}"),
                ))
            }
        };
        positive("alpha", self.alpha)?;
        nonneg("moreau_gamma", self.moreau_gamma)?;
        nonneg("gamma_g", self.gamma_g)?;
        if let Some(g) = self.gamma_fstar {
            positive("gamma_fstar", g)?;
        }
        if let Some(t) = self.tau {
            positive("tau", t)?;
        }
        if let Some(s) = self.sigma {
            positive("sigma", s)?;
        }
        if self.c.is_nan() {
            return Err(Error::invalid("c", "must not be NaN"));
        }
        if self.mesh_n < 2 {
            return Err(Error::invalid(
                "mesh_n",
                format!("need at least 2 elements, got {}", self.mesh_n),
            ));
        }
        if self.ref_multiplier < 1 {
            return Err(Error::invalid("ref_multiplier", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.noise_fraction) {
            return Err(Error::invalid(
                "noise_fraction",
                format!("must lie in [0, 1], got {}", self.noise_fraction),
            ));
        }
        if !(self.z_re.is_finite() && self.z_im.is_finite()) {
            return Err(Error::invalid("z", "must be finite"));
        }
        if self.rule == RuleKind::Linear {
            positive("gamma_g", self.gamma_g)?;
            self.linear_gamma_fstar()?;
        }
        Ok(())
    }

    fn linear_gamma_fstar(&self) -> Result<f64> {
        match (self.gamma_fstar, self.experiment) {
            (Some(g), _) => Ok(g),
            (None, ExperimentKind::ComplexToy) => Ok(1.0),
            (None, _) if self.moreau_gamma > 0.0 => Ok(self.moreau_gamma),
            (None, _) => Err(Error::invalid(
                "gamma_fstar",
                "the linear rule needs a strongly convex F*: set moreau_gamma or gamma_fstar",
            )),
        }
    }

    /// Concrete step rule for a Lipschitz estimate `l_tilde`.
    ///
    /// Constant and accelerated rules start from `τ₀ = 1/(4L̃)`,
    /// `σ₀ = 1/(2L̃)`; the linear rule uses `τ = √(γ̃_{F*}/γ̃_G)/L̃`.
    pub fn step_rule(&self, l_tilde: f64) -> Result<StepRule> {
        self.validate()?;
        let tau0 = self.tau.unwrap_or(1.0 / (4.0 * l_tilde));
        let sigma0 = self.sigma.unwrap_or(1.0 / (2.0 * l_tilde));
        let rule = match self.rule {
            RuleKind::Constant => StepRule::ConstantWeak {
                tau: tau0,
                sigma: sigma0,
            },
            RuleKind::Accelerated => StepRule::accelerated(tau0, sigma0, self.gamma_g),
            RuleKind::Linear => {
                let gamma_fstar = self.linear_gamma_fstar()?;
                let tau = self
                    .tau
                    .unwrap_or((gamma_fstar / self.gamma_g).sqrt() / l_tilde);
                StepRule::LinearRate {
                    tau,
                    gamma_g: self.gamma_g,
                    gamma_fstar,
                }
            }
        };
        rule.validate()?;
        Ok(rule)
    }

    /// Default fit window: `[100, n_max]` on the toy, the last three
    /// quarters of the run on the PDE experiments.
    pub fn power_window(&self) -> (usize, usize) {
        match self.experiment {
            ExperimentKind::ComplexToy => (100.min(self.n_max / 2).max(1), self.n_max),
            _ => ((self.n_max / 4).max(1), self.n_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_experiment() {
        let l1 = ExperimentConfig::new(ExperimentKind::L1Fit);
        assert_eq!(l1.alpha, 1e-2);
        let sc = ExperimentConfig::new(ExperimentKind::StateConstraint);
        assert_eq!((sc.alpha, sc.c), (1e-3, 0.68));
        let toy = ExperimentConfig::new(ExperimentKind::ComplexToy);
        assert_eq!((toy.alpha, toy.z_re, toy.z_im), (0.1, 2.0, 0.0));
        assert_eq!(l1.clone().full_scale().mesh_n, 1000);
        assert_eq!(toy.clone().full_scale(), toy);
    }

    #[test]
    fn step_rules_from_l_tilde() {
        let cfg = ExperimentConfig::new(ExperimentKind::ComplexToy);
        assert_eq!(
            cfg.step_rule(1.0).unwrap(),
            StepRule::Accelerated {
                tau0: 0.25,
                sigma0: 0.5,
                gamma_g: 0.5
            }
        );
        let cfg = ExperimentConfig {
            gamma_g: 0.0,
            ..cfg
        };
        assert_eq!(
            cfg.step_rule(2.0).unwrap(),
            StepRule::ConstantWeak {
                tau: 0.125,
                sigma: 0.25
            }
        );
        let linear = ExperimentConfig {
            rule: RuleKind::Linear,
            gamma_g: 0.5,
            ..cfg
        };
        match linear.step_rule(1.0).unwrap() {
            StepRule::LinearRate {
                tau, gamma_fstar, ..
            } => {
                assert!((tau - 2f64.sqrt()).abs() < 1e-15);
                assert_eq!(gamma_fstar, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn linear_rule_needs_strong_convexity_on_pde() {
        let cfg = ExperimentConfig {
            rule: RuleKind::Linear,
            ..ExperimentConfig::new(ExperimentKind::L1Fit)
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            moreau_gamma: 1.0,
            ..cfg
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let base = ExperimentConfig::new(ExperimentKind::L1Fit);
        let err = ExperimentConfig {
            alpha: -1.0,
            ..base.clone()
        }
        .validate()
        .unwrap_err();
        assert!(err.to_string().contains("alpha"));
        assert!(ExperimentConfig {
            noise_fraction: 1.5,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig { mesh_n: 1, ..base }.validate().is_err());
    }
}
