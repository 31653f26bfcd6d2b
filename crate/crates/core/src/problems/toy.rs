//! Phase and amplitude reconstruction of a complex number.
//!
//! ```text
//! min_{t, υ} ½|z - t e^{iυ}|² + G₀(t),   G₀(t) = α t for t ≥ 0, +∞ otherwise
//! ```
//!
//! written in saddle form with `x = (t, υ)`, `y = (λ, μ)`,
//! `K(t, υ) = (t cos υ - Re z, t sin υ - Im z)` and `F*(y) = ½|y|²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::prox::{prox_nonneg_linear, prox_scaled_quadratic};
use super::{SaddleProblem, Vector};
use crate::error::{check_dim, Error, Result};
use crate::solver::PrimalDualPoint;

/// Residual tolerance used when validating the closed-form saddle point.
const REFERENCE_TOL: f64 = 1e-10;

/// Closed-form saddle point of the toy problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyReference {
    pub point: PrimalDualPoint,
    /// `false` in the `t̂ = 0` regime, where any phase is optimal and
    /// `υ̂ = arg z` is only one representative.
    pub unique: bool,
}

#[derive(Clone, Debug)]
pub struct ComplexToyProblem {
    z: (f64, f64),
    alpha: f64,
    reference: ToyReference,
}

impl ComplexToyProblem {
    pub fn new(z: (f64, f64), alpha: f64) -> Result<Self> {
        let reference = toy_reference_solution(z, alpha)?;
        Ok(Self {
            z,
            alpha,
            reference,
        })
    }

    pub fn z(&self) -> (f64, f64) {
        self.z
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn toy_reference(&self) -> &ToyReference {
        &self.reference
    }

    /// Jacobian `∇K(t, υ)` as a row-major 2×2 array.
    pub fn jacobian(&self, x: &Vector) -> [[f64; 2]; 2] {
        jacobian(x[0], x[1])
    }

    /// Sample the three-point condition
    ///
    /// ```text
    /// <[∇K(x') - ∇K(x̂)]* ŷ, x - x̂>  ≥  θ |K(x̂) - K(x) - ∇K(x)(x̂ - x)|² - L (υ - υ')²
    /// ```
    ///
    /// for `x, x'` drawn uniformly from the disc `B(x̂, eps)`.
    pub fn sample_three_point_condition(
        &self,
        eps: f64,
        theta: f64,
        lipschitz: f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<ThreePointReport> {
        if !self.reference.unique {
            return Err(Error::invalid(
                "z",
                "three-point sampling requires the t̂ > 0 regime",
            ));
        }
        if !(eps > 0.0) {
            return Err(Error::invalid("eps", "must be positive"));
        }
        let t_hat = self.reference.point.x[0];
        if !(lipschitz > self.alpha * t_hat / 4.0) {
            return Err(Error::invalid(
                "L",
                format!("must exceed α t̂ / 4 = {}", self.alpha * t_hat / 4.0),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut report = ThreePointReport {
            samples: n_samples,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_sample: None,
        };
        for _ in 0..n_samples {
            let x = self.sample_disc(&mut rng, eps);
            let x_prime = self.sample_disc(&mut rng, eps);
            let margin = self.three_point_margin(&x, &x_prime, theta, lipschitz);
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_sample = Some(([x[0], x[1]], [x_prime[0], x_prime[1]]));
            }
            if margin < 0.0 {
                report.violations += 1;
            }
        }
        Ok(report)
    }

    /// Left-hand side minus right-hand side of the three-point inequality.
    pub fn three_point_margin(
        &self,
        x: &Vector,
        x_prime: &Vector,
        theta: f64,
        lipschitz: f64,
    ) -> f64 {
        let PrimalDualPoint { x: x_hat, y: y_hat } = &self.reference.point;
        let jp = jacobian(x_prime[0], x_prime[1]);
        let jh = jacobian(x_hat[0], x_hat[1]);
        // [∇K(x') - ∇K(x̂)]^T ŷ
        let mut g = [0.0; 2];
        for (col, gc) in g.iter_mut().enumerate() {
            *gc = (jp[0][col] - jh[0][col]) * y_hat[0] + (jp[1][col] - jh[1][col]) * y_hat[1];
        }
        let lhs = g[0] * (x[0] - x_hat[0]) + g[1] * (x[1] - x_hat[1]);

        let k_hat = self.k(x_hat[0], x_hat[1]);
        let k_x = self.k(x[0], x[1]);
        let jx = jacobian(x[0], x[1]);
        let d = [x_hat[0] - x[0], x_hat[1] - x[1]];
        let r0 = k_hat[0] - k_x[0] - (jx[0][0] * d[0] + jx[0][1] * d[1]);
        let r1 = k_hat[1] - k_x[1] - (jx[1][0] * d[0] + jx[1][1] * d[1]);
        let rhs = theta * (r0 * r0 + r1 * r1) - lipschitz * (x[1] - x_prime[1]).powi(2);
        lhs - rhs
    }

    fn sample_disc(&self, rng: &mut ChaCha8Rng, eps: f64) -> Vector {
        let x_hat = &self.reference.point.x;
        let r = eps * rng.random::<f64>().sqrt();
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        Vector::from_column_slice(&[x_hat[0] + r * phi.cos(), x_hat[1] + r * phi.sin()])
    }

    fn k(&self, t: f64, upsilon: f64) -> [f64; 2] {
        [t * upsilon.cos() - self.z.0, t * upsilon.sin() - self.z.1]
    }
}

fn jacobian(t: f64, upsilon: f64) -> [[f64; 2]; 2] {
    let (s, c) = upsilon.sin_cos();
    [[c, -t * s], [s, t * c]]
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreePointReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed `lhs - rhs`.
    pub worst_margin: f64,
    pub worst_sample: Option<([f64; 2], [f64; 2])>,
}

impl SaddleProblem for ComplexToyProblem {
    fn primal_dim(&self) -> usize {
        2
    }

    fn dual_dim(&self) -> usize {
        2
    }

    fn apply_k(&self, x: &Vector) -> Result<Vector> {
        check_dim("toy primal", 2, x.len())?;
        Ok(Vector::from_column_slice(&self.k(x[0], x[1])))
    }

    fn apply_dk(&self, x: &Vector, h: &Vector) -> Result<Vector> {
        check_dim("toy primal", 2, x.len())?;
        check_dim("toy direction", 2, h.len())?;
        let j = jacobian(x[0], x[1]);
        Ok(Vector::from_column_slice(&[
            j[0][0] * h[0] + j[0][1] * h[1],
            j[1][0] * h[0] + j[1][1] * h[1],
        ]))
    }

    fn apply_dk_adjoint(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        check_dim("toy primal", 2, x.len())?;
        check_dim("toy dual", 2, w.len())?;
        let j = jacobian(x[0], x[1]);
        Ok(Vector::from_column_slice(&[
            j[0][0] * w[0] + j[1][0] * w[1],
            j[0][1] * w[0] + j[1][1] * w[1],
        ]))
    }

    fn prox_g(&self, tau: f64, v: &Vector) -> Result<Vector> {
        check_dim("toy primal", 2, v.len())?;
        Ok(Vector::from_column_slice(&[
            prox_nonneg_linear(tau, self.alpha, v[0]),
            v[1],
        ]))
    }

    fn prox_fstar(&self, sigma: f64, v: &Vector) -> Result<Vector> {
        check_dim("toy dual", 2, v.len())?;
        Ok(prox_scaled_quadratic(sigma, v))
    }

    fn reference(&self) -> Option<&PrimalDualPoint> {
        Some(&self.reference.point)
    }
}

/// Closed-form saddle point `t̂ = |z| - α`, `υ̂ = arg z`, `ŷ = -α e^{iυ̂}`.
///
/// When `|z| ≤ α` the amplitude collapses to `t̂ = 0`; the phase is then
/// arbitrary and `υ̂ = arg z` is returned with `unique = false`.
pub fn toy_reference_solution(z: (f64, f64), alpha: f64) -> Result<ToyReference> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    let modulus = z.0.hypot(z.1);
    let upsilon = if modulus > 0.0 { z.1.atan2(z.0) } else { 0.0 };
    let (s, c) = upsilon.sin_cos();
    let unique = modulus > alpha;
    let t = if unique { modulus - alpha } else { 0.0 };
    // F*(y) = ½|y|² so the dual optimality condition is y = K(x̂).
    let y = [t * c - z.0, t * s - z.1];
    let point = PrimalDualPoint::new(
        Vector::from_column_slice(&[t, upsilon]),
        Vector::from_column_slice(&y),
    );

    // 0 ∈ ∂G(x̂) + ∇K(x̂)^* ŷ: the t-component must lie in -∂G₀(t̂) and the
    // υ-component must vanish.
    let j = jacobian(t, upsilon);
    let g_t = j[0][0] * y[0] + j[1][0] * y[1];
    let g_u = j[0][1] * y[0] + j[1][1] * y[1];
    let t_residual = if unique {
        (g_t + alpha).abs()
    } else {
        (-g_t - alpha).max(0.0)
    };
    let residual = t_residual.max(g_u.abs());
    if residual > REFERENCE_TOL * (1.0 + modulus) {
        return Err(Error::invalid(
            "z",
            format!("closed-form saddle point failed validation (residual {residual:e})"),
        ));
    }
    Ok(ToyReference { point, unique })
}
