//! Assembly, state solves and the derivative/adjoint of `S`.
//!
//! Weak form: `∫ z'v' + ∫ x z v = ∫ f v` for all P1 test functions `v`,
//! giving `A(x) z = M f` with `A(x) = K_stiff + M(x)`.

use serde::{Deserialize, Serialize};

use super::mesh::{PotentialCoefficient, StateFunction, UniformMesh1D};
use super::tridiag::{SymTridiagonal, TridiagonalFactor};
use crate::error::{check_dim, Error, Result};
use crate::problems::Vector;

/// Inner product used on the P1 (state / dual) space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualMetric {
    /// Exact P1 mass matrix.
    Consistent,
    /// Row-sum lumped mass matrix (trapezoidal rule). Diagonal, so nodal
    /// proximal maps are exact resolvents in this metric.
    #[default]
    Lumped,
}

impl DualMetric {
    /// `M w` (consistent) or `D w` (lumped).
    pub fn apply(&self, mesh: &UniformMesh1D, w: &Vector) -> Vector {
        match self {
            DualMetric::Consistent => mass_matrix(mesh).mul_vec(w),
            DualMetric::Lumped => {
                let h = mesh.h();
                let last = mesh.n_nodes() - 1;
                Vector::from_fn(w.len(), |i, _| {
                    let weight = if i == 0 || i == last { 0.5 * h } else { h };
                    weight * w[i]
                })
            }
        }
    }

    pub fn inner(&self, mesh: &UniformMesh1D, a: &Vector, b: &Vector) -> f64 {
        a.dot(&self.apply(mesh, b))
    }
}

pub fn stiffness_matrix(mesh: &UniformMesh1D) -> SymTridiagonal {
    let n = mesh.n_nodes();
    let inv_h = 1.0 / mesh.h();
    let mut m = SymTridiagonal::zeros(n);
    for k in 0..mesh.n_elements() {
        m.diag[k] += inv_h;
        m.diag[k + 1] += inv_h;
        m.off[k] -= inv_h;
    }
    m
}

/// `∫ w φ_i φ_j` for a piecewise-constant weight `w`.
pub fn weighted_mass_matrix(mesh: &UniformMesh1D, weights: &Vector) -> Result<SymTridiagonal> {
    check_dim("mass weights", mesh.n_elements(), weights.len())?;
    let n = mesh.n_nodes();
    let h6 = mesh.h() / 6.0;
    let mut m = SymTridiagonal::zeros(n);
    for (k, &w) in weights.iter().enumerate() {
        m.diag[k] += 2.0 * h6 * w;
        m.diag[k + 1] += 2.0 * h6 * w;
        m.off[k] += h6 * w;
    }
    Ok(m)
}

pub fn mass_matrix(mesh: &UniformMesh1D) -> SymTridiagonal {
    weighted_mass_matrix(mesh, &Vector::from_element(mesh.n_elements(), 1.0))
        .expect("unit weights match the mesh")
}

/// `M(w) z` without assembling `M(w)`.
pub fn weighted_mass_apply(mesh: &UniformMesh1D, weights: &Vector, z: &Vector) -> Result<Vector> {
    check_dim("mass weights", mesh.n_elements(), weights.len())?;
    check_dim("nodal vector", mesh.n_nodes(), z.len())?;
    let h6 = mesh.h() / 6.0;
    let mut out = Vector::zeros(mesh.n_nodes());
    for (k, &w) in weights.iter().enumerate() {
        let (a, b) = (z[k], z[k + 1]);
        out[k] += h6 * w * (2.0 * a + b);
        out[k + 1] += h6 * w * (a + 2.0 * b);
    }
    Ok(out)
}

/// Element integrals `∫_{e_k} z p` of the product of two P1 functions.
pub fn element_products(mesh: &UniformMesh1D, z: &Vector, p: &Vector) -> Result<Vector> {
    check_dim("nodal vector", mesh.n_nodes(), z.len())?;
    check_dim("nodal vector", mesh.n_nodes(), p.len())?;
    let h6 = mesh.h() / 6.0;
    Ok(Vector::from_fn(mesh.n_elements(), |k, _| {
        h6 * (2.0 * z[k] * p[k] + z[k] * p[k + 1] + z[k + 1] * p[k] + 2.0 * z[k + 1] * p[k + 1])
    }))
}

/// `A(x) = K_stiff + M(x)`.
pub fn assemble_system(mesh: &UniformMesh1D, x: &PotentialCoefficient) -> Result<SymTridiagonal> {
    x.check_mesh(mesh)?;
    let mut a = stiffness_matrix(mesh);
    a.add_assign(&weighted_mass_matrix(mesh, x.values())?);
    Ok(a)
}

/// Row sums of `A(x)`: the stiffness rows sum to zero, so these are the
/// row sums `h/2 (x_{k-1} + x_k)` of `M(x)`.
fn system_row_sums(mesh: &UniformMesh1D, x: &PotentialCoefficient) -> Vec<f64> {
    let half_h = 0.5 * mesh.h();
    let mut sums = vec![0.0; mesh.n_nodes()];
    for (k, &w) in x.values().iter().enumerate() {
        sums[k] += half_h * w;
        sums[k + 1] += half_h * w;
    }
    sums
}

/// Factorise `A(x)` through its M-matrix structure.
pub fn factorize_system(
    mesh: &UniformMesh1D,
    x: &PotentialCoefficient,
) -> Result<TridiagonalFactor> {
    assemble_system(mesh, x)?.factorize_m_matrix(&system_row_sums(mesh, x))
}

/// Load vector `M f` of a nodal (P1) right-hand side.
pub fn load_vector(mesh: &UniformMesh1D, f: &Vector) -> Result<Vector> {
    check_dim("right-hand side", mesh.n_nodes(), f.len())?;
    Ok(mass_matrix(mesh).mul_vec(f))
}

/// `z = S(x)` for a nodal right-hand side `f`.
pub fn solve_state(
    mesh: &UniformMesh1D,
    x: &PotentialCoefficient,
    f: &Vector,
) -> Result<StateFunction> {
    Ok(Linearization::new(mesh, x, f)?.into_state())
}

/// `∇S(x) h`, given `z = S(x)`.
pub fn apply_ds(
    mesh: &UniformMesh1D,
    x: &PotentialCoefficient,
    z: &StateFunction,
    h: &Vector,
) -> Result<StateFunction> {
    let factor = factorize_system(mesh, x)?;
    let w = derivative(mesh, &factor, &z.values, h)?;
    StateFunction::new(w)
}

/// `∇S(x)^* w` with respect to the P0 inner product on potentials and the
/// given metric on states, given `z = S(x)`.
pub fn apply_ds_adjoint(
    mesh: &UniformMesh1D,
    x: &PotentialCoefficient,
    z: &StateFunction,
    w: &Vector,
    metric: DualMetric,
) -> Result<Vector> {
    let factor = factorize_system(mesh, x)?;
    adjoint(mesh, &factor, &z.values, w, metric)
}

fn derivative(
    mesh: &UniformMesh1D,
    factor: &TridiagonalFactor,
    z: &Vector,
    h: &Vector,
) -> Result<Vector> {
    // A(x) w = -M(h) z
    let rhs = -weighted_mass_apply(mesh, h, z)?;
    factor.solve(&rhs)
}

fn adjoint(
    mesh: &UniformMesh1D,
    factor: &TridiagonalFactor,
    z: &Vector,
    w: &Vector,
    metric: DualMetric,
) -> Result<Vector> {
    check_dim("dual vector", mesh.n_nodes(), w.len())?;
    // adjoint state A(x) p = M w, then -(1/h) ∫_{e_k} z p
    let p = factor.solve(&metric.apply(mesh, w))?;
    Ok(element_products(mesh, z, &p)? * (-1.0 / mesh.h()))
}

/// `S` linearised at a fixed potential: the factorised system and the state.
#[derive(Clone, Debug)]
pub struct Linearization {
    mesh: UniformMesh1D,
    factor: TridiagonalFactor,
    state: StateFunction,
}

impl Linearization {
    pub fn new(mesh: &UniformMesh1D, x: &PotentialCoefficient, f: &Vector) -> Result<Self> {
        let factor = factorize_system(mesh, x)?;
        let z = factor.solve(&load_vector(mesh, f)?)?;
        Ok(Self {
            mesh: *mesh,
            factor,
            state: StateFunction::new(z)?,
        })
    }

    pub fn state(&self) -> &StateFunction {
        &self.state
    }

    pub fn into_state(self) -> StateFunction {
        self.state
    }

    pub fn apply_ds(&self, h: &Vector) -> Result<Vector> {
        derivative(&self.mesh, &self.factor, &self.state.values, h)
    }

    pub fn apply_ds_adjoint(&self, w: &Vector, metric: DualMetric) -> Result<Vector> {
        adjoint(&self.mesh, &self.factor, &self.state.values, w, metric)
    }
}

/// `max(1, ||∇S(x⁰)x⁰|| / ||x⁰||)` in mesh-weighted norms, a heuristic
/// estimate of the Lipschitz scale used to set initial step lengths.
pub fn estimate_l_tilde(
    mesh: &UniformMesh1D,
    x0: &PotentialCoefficient,
    f: &Vector,
    metric: DualMetric,
) -> Result<f64> {
    let x_norm = mesh.p0_inner(x0.values(), x0.values()).sqrt();
    if !(x_norm > 0.0) {
        return Err(Error::invalid("x0", "must be nonzero"));
    }
    let lin = Linearization::new(mesh, x0, f)?;
    let dx = lin.apply_ds(x0.values())?;
    let ratio = metric.inner(mesh, &dx, &dx).sqrt() / x_norm;
    Ok(ratio.max(1.0))
}
