use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pde::{solve_state, PotentialCoefficient, StateFunction, UniformMesh1D};
use crate::problems::Vector;

/// `x†(t) = 2 - |t|`.
pub fn true_potential(t: f64) -> f64 {
    2.0 - t.abs()
}

/// Right-hand side `f ≡ 1` at the mesh nodes.
pub fn unit_source(mesh: &UniformMesh1D) -> Vector {
    Vector::from_element(mesh.n_nodes(), 1.0)
}

/// `x†` sampled at element midpoints and `z† = S(x†)`.
pub fn generate_ground_truth(
    mesh: &UniformMesh1D,
) -> Result<(PotentialCoefficient, StateFunction)> {
    let x = PotentialCoefficient::with_default_floor(mesh.sample_elements(true_potential))?;
    let z = solve_state(mesh, &x, &unit_source(mesh))?;
    Ok((x, z))
}

/// Random-valued impulsive noise: each nodal value is independently replaced,
/// with probability `fraction`, by a uniform draw from `[min z, max z]`.
pub fn apply_impulsive_noise(z: &StateFunction, fraction: f64, seed: u64) -> Result<StateFunction> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(
            "noise_fraction",
            format!("must lie in [0, 1], got {fraction}"),
        ));
    }
    let (lo, hi) = (z.min(), z.max());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = z.values.map(|v| {
        // Draw both numbers unconditionally so that the stream does not
        // depend on the outcome of the coin flip.
        let replace = rng.random_bool(fraction);
        let draw = rng.random_range(lo..=hi);
        if replace {
            draw
        } else {
            v
        }
    });
    StateFunction::new(values)
}
