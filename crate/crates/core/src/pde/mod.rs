//! 1D finite elements for the potential-to-state map `S: x ↦ z`,
//!
//! ```text
//! -z'' + x z = f  on (a, b),    z'(a) = z'(b) = 0,
//! ```
//!
//! with piecewise-constant (P0) potentials `x` and piecewise-linear (P1)
//! states `z` on a uniform mesh. All element integrals are exact.

mod fem;
mod mesh;
mod tridiag;

pub use fem::{
    apply_ds, apply_ds_adjoint, assemble_system, element_products, estimate_l_tilde,
    factorize_system, load_vector, mass_matrix, solve_state, stiffness_matrix, weighted_mass_apply,
    weighted_mass_matrix, DualMetric, Linearization,
};
pub use mesh::{PotentialCoefficient, StateFunction, UniformMesh1D, DEFAULT_COEFFICIENT_FLOOR};
pub use tridiag::{SymTridiagonal, TridiagonalFactor};
