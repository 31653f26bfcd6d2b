//! Data generation, problem wiring, reference runs and rate fitting for the
//! PDE experiments and the complex toy.

pub mod config;
pub mod data;
pub mod rates;
pub mod run;
pub mod wiring;

pub use config::{ExperimentConfig, ExperimentKind, RuleKind};
pub use data::{apply_impulsive_noise, generate_ground_truth, true_potential, unit_source};
pub use rates::{check_bound_dominance, fit_linear_rate, fit_power_rate, BoundDominance, RateFit};
pub use run::{
    build_problem, estimate_lipschitz, operator_norm_estimate, record_run, run_experiment,
    theoretical_bound, ExperimentProblem, ExperimentRun, RecordedRun, DIVERGENCE_THRESHOLD,
    ROUNDOFF_REL, TOY_START,
};
pub use wiring::{
    build_l1fit_problem, build_state_constraint_problem, FidelityTerm, PdeSaddleProblem,
};
