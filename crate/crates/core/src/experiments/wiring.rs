//! The PDE experiments as saddle-point problems.
//!
//! Potentials are P0 functions with the `L²` product `h Σ a_k b_k`; states
//! and duals are P1 functions with the lumped `L²` product, under which the
//! pointwise proximal maps are exact resolvents.

use super::config::{ExperimentConfig, ExperimentKind};
use super::data::{apply_impulsive_noise, generate_ground_truth, unit_source};
use crate::error::{Error, Result};
use crate::pde::{
    DualMetric, Linearization, PotentialCoefficient, StateFunction, UniformMesh1D,
    DEFAULT_COEFFICIENT_FLOOR,
};
use crate::problems::prox::{
    prox_linf_ball, prox_linf_ball_moreau_yosida, prox_scaled_quadratic_floor,
    prox_state_constraint_conjugate, prox_state_constraint_conjugate_moreau_yosida,
};
use crate::problems::{SaddleProblem, Vector};

#[derive(Clone, Debug, PartialEq)]
pub enum FidelityTerm {
    /// `F(y) = (1/α)||y||_{L¹}`, so `F*` is the indicator of `[-1/α, 1/α]`.
    L1 { alpha: f64 },
    /// `F(y) = 1/(2α)||y - z^d||² + δ_{(-∞, c]}(y)`.
    StateConstraint { alpha: f64, c: f64, target: Vector },
}

/// `min_x ½||x||² + F(S(x) - shift)` over potentials `x ≥ ε_x`.
#[derive(Clone, Debug)]
pub struct PdeSaddleProblem {
    mesh: UniformMesh1D,
    source: Vector,
    shift: Vector,
    fidelity: FidelityTerm,
    moreau_gamma: f64,
    floor: f64,
    metric: DualMetric,
    ground_truth: (PotentialCoefficient, StateFunction),
    warnings: Vec<String>,
}

impl PdeSaddleProblem {
    pub fn mesh(&self) -> &UniformMesh1D {
        &self.mesh
    }

    pub fn source(&self) -> &Vector {
        &self.source
    }

    /// Data subtracted from `S(x)`: the noisy observation for L¹ fitting, zero
    /// for the state-constraint problem.
    pub fn shift(&self) -> &Vector {
        &self.shift
    }

    pub fn fidelity(&self) -> &FidelityTerm {
        &self.fidelity
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn metric(&self) -> DualMetric {
        self.metric
    }

    /// `(x†, z†)`.
    pub fn ground_truth(&self) -> &(PotentialCoefficient, StateFunction) {
        &self.ground_truth
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The starting point `x⁰ ≡ 1`, `y⁰ ≡ 0`.
    pub fn initial_potential(&self) -> Vector {
        Vector::from_element(self.mesh.n_elements(), 1.0)
    }

    fn coefficient(&self, x: &Vector) -> Result<PotentialCoefficient> {
        PotentialCoefficient::projected(x, self.floor)
    }

    fn linearize(&self, x: &Vector) -> Result<Linearization> {
        Linearization::new(&self.mesh, &self.coefficient(x)?, &self.source)
    }
}

pub fn build_l1fit_problem(cfg: &ExperimentConfig) -> Result<PdeSaddleProblem> {
    build(cfg, ExperimentKind::L1Fit)
}

pub fn build_state_constraint_problem(cfg: &ExperimentConfig) -> Result<PdeSaddleProblem> {
    build(cfg, ExperimentKind::StateConstraint)
}

fn build(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<PdeSaddleProblem> {
    cfg.validate()?;
    if cfg.experiment != kind {
        return Err(Error::invalid(
            "experiment",
            format!(
                "expected `{}`, got `{}`",
                kind.name(),
                cfg.experiment.name()
            ),
        ));
    }
    let mesh = UniformMesh1D::symmetric(cfg.mesh_n)?;
    let (x_true, z_true) = generate_ground_truth(&mesh)?;
    let mut warnings = Vec::new();
    let (shift, fidelity) = match kind {
        ExperimentKind::L1Fit => {
            let noisy = apply_impulsive_noise(&z_true, cfg.noise_fraction, cfg.seed)?;
            (noisy.values, FidelityTerm::L1 { alpha: cfg.alpha })
        }
        ExperimentKind::StateConstraint => {
            if z_true.max() <= cfg.c {
                warnings.push(format!(
                    "target state max {} does not exceed c = {}; the constraint is inactive",
                    z_true.max(),
                    cfg.c
                ));
            }
            (
                Vector::zeros(mesh.n_nodes()),
                FidelityTerm::StateConstraint {
                    alpha: cfg.alpha,
                    c: cfg.c,
                    target: z_true.values.clone(),
                },
            )
        }
        ExperimentKind::ComplexToy => unreachable!("toy is not a PDE problem"),
    };
    Ok(PdeSaddleProblem {
        source: unit_source(&mesh),
        mesh,
        shift,
        fidelity,
        moreau_gamma: cfg.moreau_gamma,
        floor: DEFAULT_COEFFICIENT_FLOOR,
        metric: DualMetric::Lumped,
        ground_truth: (x_true, z_true),
        warnings,
    })
}

impl SaddleProblem for PdeSaddleProblem {
    fn primal_dim(&self) -> usize {
        self.mesh.n_elements()
    }

    fn dual_dim(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// `S(max(x, ε_x)) - shift`. The projection only matters for the
    /// extrapolated point `x̄`; iterates already satisfy the floor.
    fn apply_k(&self, x: &Vector) -> Result<Vector> {
        Ok(self.linearize(x)?.state().values.clone() - &self.shift)
    }

    fn apply_dk(&self, x: &Vector, h: &Vector) -> Result<Vector> {
        self.linearize(x)?.apply_ds(h)
    }

    fn apply_dk_adjoint(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        self.linearize(x)?.apply_ds_adjoint(w, self.metric)
    }

    fn prox_g(&self, tau: f64, v: &Vector) -> Result<Vector> {
        Ok(prox_scaled_quadratic_floor(tau, self.floor, v))
    }

    fn prox_fstar(&self, sigma: f64, v: &Vector) -> Result<Vector> {
        let gamma = self.moreau_gamma;
        match &self.fidelity {
            FidelityTerm::L1 { alpha } if gamma > 0.0 => {
                Ok(prox_linf_ball_moreau_yosida(sigma, gamma, 1.0 / alpha, v))
            }
            FidelityTerm::L1 { alpha } => Ok(prox_linf_ball(1.0 / alpha, v)),
            FidelityTerm::StateConstraint { alpha, c, target } if gamma > 0.0 => {
                prox_state_constraint_conjugate_moreau_yosida(sigma, gamma, *alpha, *c, target, v)
            }
            FidelityTerm::StateConstraint { alpha, c, target } => {
                prox_state_constraint_conjugate(sigma, *alpha, *c, target, v)
            }
        }
    }

    fn primal_inner(&self, a: &Vector, b: &Vector) -> f64 {
        self.mesh.p0_inner(a, b)
    }

    fn dual_inner(&self, a: &Vector, b: &Vector) -> f64 {
        self.metric.inner(&self.mesh, a, b)
    }
}
