use clap::Args;
use nlpdhgm::experiments::{ExperimentConfig, ExperimentKind, RuleKind};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Every [`ExperimentConfig`] field as an optional value. Deserialized from
/// the flat config file and parsed from command-line flags; unknown keys are
/// rejected.
#[derive(Args, Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    /// Experiment: l1fit, state_constraint or complex_toy.
    #[arg(long)]
    pub experiment: Option<ExperimentKind>,
    /// Number of finite elements.
    #[arg(long)]
    pub mesh_n: Option<usize>,
    /// Fidelity weight α.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Moreau–Yosida parameter of F* (0 disables it).
    #[arg(long, allow_negative_numbers = true)]
    pub moreau_gamma: Option<f64>,
    /// State bound of the state-constraint experiment.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Step rule: constant, accelerated or linear.
    #[arg(long)]
    pub rule: Option<RuleKind>,
    /// γ̃_G; 0 with the accelerated rule gives constant steps.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_g: Option<f64>,
    /// γ̃_F* for the linear rule.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_fstar: Option<f64>,
    /// Override of the initial primal step.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Override of the initial dual step.
    #[arg(long, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    /// Number of recorded iterations.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// The PDE reference is the iterate after ref_multiplier·n_max steps.
    #[arg(long)]
    pub ref_multiplier: Option<usize>,
    /// Seed of the noise generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of nodes hit by impulsive noise.
    #[arg(long, allow_negative_numbers = true)]
    pub noise_fraction: Option<f64>,
    /// Real part of the toy data z.
    #[arg(long, allow_negative_numbers = true)]
    pub z_re: Option<f64>,
    /// Imaginary part of the toy data z.
    #[arg(long, allow_negative_numbers = true)]
    pub z_im: Option<f64>,
}

impl ConfigLayer {
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| CliError::Config(e.message().to_string()))
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! overlay {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        overlay!(
            mesh_n,
            alpha,
            moreau_gamma,
            c,
            rule,
            gamma_g,
            n_max,
            ref_multiplier,
            seed,
            noise_fraction,
            z_re,
            z_im
        );
        if self.gamma_fstar.is_some() {
            cfg.gamma_fstar = self.gamma_fstar;
        }
        if self.tau.is_some() {
            cfg.tau = self.tau;
        }
        if self.sigma.is_some() {
            cfg.sigma = self.sigma;
        }
    }
}

/// Build a validated config from a config document and command-line flags.
///
/// Defaults for the chosen experiment are applied first (optionally at full
/// scale), then the file values, then the flags.
pub fn parse_config(
    source: &str,
    flags: &ConfigLayer,
    full_scale: bool,
) -> Result<ExperimentConfig> {
    let file = ConfigLayer::from_toml(source)?;
    let kind = flags
        .experiment
        .or(file.experiment)
        .ok_or_else(|| CliError::Config("missing field `experiment`".into()))?;
    let mut cfg = ExperimentConfig::new(kind);
    if full_scale {
        cfg = cfg.full_scale();
    }
    file.apply(&mut cfg);
    flags.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}
