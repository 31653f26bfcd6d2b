//! Closed-form proximal maps.
//!
//! All maps act componentwise (pointwise on nodal or elemental values). When
//! the owning discretisation uses a diagonal weighted inner product the
//! weights cancel in the resolvent, so the same formulas are exact in the
//! weighted metric as well.
//!
//! Conjugate pairs are provided on both sides so that the Moreau identity
//! `prox_{σF*}(v) + σ prox_{F/σ}(v/σ) = v` can be checked numerically.

use super::Vector;
use crate::error::{check_dim, Result};

/// Resolvent of `G = ½||·||²`: `v / (1 + tau)`.
pub fn prox_scaled_quadratic(tau: f64, v: &Vector) -> Vector {
    v / (1.0 + tau)
}

/// Resolvent of `½||·||² + δ_{[floor, ∞)}`.
pub fn prox_scaled_quadratic_floor(tau: f64, floor: f64, v: &Vector) -> Vector {
    v.map(|vi| (vi / (1.0 + tau)).max(floor))
}

/// Resolvent of `G₀(t) = α t` for `t ≥ 0` (`+∞` otherwise).
pub fn prox_nonneg_linear(tau: f64, alpha: f64, t: f64) -> f64 {
    (t - tau * alpha).max(0.0)
}

/// Projection onto `[-bound, bound]`, the resolvent of the conjugate of
/// `bound·|·|` for every step length.
pub fn prox_linf_ball(bound: f64, v: &Vector) -> Vector {
    v.map(|vi| vi.clamp(-bound, bound))
}

/// Resolvent of `δ_{[-bound, bound]} + γ/2 |·|²`.
pub fn prox_linf_ball_moreau_yosida(sigma: f64, gamma: f64, bound: f64, v: &Vector) -> Vector {
    let shrink = 1.0 / (1.0 + sigma * gamma);
    v.map(|vi| (vi * shrink).clamp(-bound, bound))
}

/// Soft thresholding, the resolvent of `t·weight·|·|`.
pub fn prox_l1(t: f64, weight: f64, v: &Vector) -> Vector {
    let thresh = t * weight;
    v.map(|vi| vi.signum() * (vi.abs() - thresh).max(0.0))
}

/// Resolvent of the Huber function `F_γ`, the conjugate of
/// `δ_{[-bound, bound]} + γ/2 |·|²`:
/// `F_γ(w) = w²/(2γ)` for `|w| ≤ γ·bound`, `bound|w| - γ bound²/2` otherwise.
pub fn prox_huber(t: f64, gamma: f64, bound: f64, v: &Vector) -> Vector {
    v.map(|wi| {
        let quad = gamma * wi / (gamma + t);
        if quad.abs() <= gamma * bound {
            quad
        } else {
            wi - t * bound * wi.signum()
        }
    })
}

/// Resolvent of `F(y) = 1/(2α)|y - zd|² + δ_{(-∞, c]}(y)` with step `t`.
pub fn prox_state_constraint(
    t: f64,
    alpha: f64,
    c: f64,
    zd: &Vector,
    w: &Vector,
) -> Result<Vector> {
    check_dim("state-constraint data", w.len(), zd.len())?;
    Ok(w.zip_map(zd, |wi, zi| ((alpha * wi + t * zi) / (alpha + t)).min(c)))
}

/// Resolvent of the conjugate of `F(y) = 1/(2α)|y - zd|² + δ_{(-∞, c]}(y)`,
/// evaluated through the Moreau decomposition
/// `prox_{σF*}(v) = v - σ prox_{F/σ}(v/σ)`.
///
/// `c = f64::INFINITY` removes the constraint.
pub fn prox_state_constraint_conjugate(
    sigma: f64,
    alpha: f64,
    c: f64,
    zd: &Vector,
    v: &Vector,
) -> Result<Vector> {
    check_dim("state-constraint data", v.len(), zd.len())?;
    // σ·prox_{F/σ}(v/σ) = min(σc, σ(αv + zd)/(1 + ασ)), written without dividing by σ.
    Ok(v.zip_map(zd, |vi, zi| {
        let inner = sigma * (alpha * vi + zi) / (1.0 + alpha * sigma);
        vi - inner.min(sigma * c)
    }))
}

/// Resolvent of `F* + γ/2||·||²` for the state-constraint `F*`.
pub fn prox_state_constraint_conjugate_moreau_yosida(
    sigma: f64,
    gamma: f64,
    alpha: f64,
    c: f64,
    zd: &Vector,
    v: &Vector,
) -> Result<Vector> {
    let scale = 1.0 + sigma * gamma;
    prox_state_constraint_conjugate(sigma / scale, alpha, c, zd, &(v / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    /// Minimise a 1D function by dense sampling followed by golden refinement.
    fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let mut best = (lo, f(lo));
        for k in 0..=n {
            let t = lo + (hi - lo) * k as f64 / n as f64;
            let ft = f(t);
            if ft < best.1 {
                best = (t, ft);
            }
        }
        let step = (hi - lo) / n as f64;
        let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn scaled_quadratic_examples() {
        assert_eq!(prox_scaled_quadratic(1.0, &v(&[2.0, 4.0])), v(&[1.0, 2.0]));
        assert_eq!(
            prox_scaled_quadratic(0.0, &v(&[2.0, -4.0])),
            v(&[2.0, -4.0])
        );
        assert_eq!(prox_scaled_quadratic(3.0, &v(&[8.0])), v(&[2.0]));
    }

    #[test]
    fn floor_projection_applies_after_shrink() {
        let out = prox_scaled_quadratic_floor(1.0, 1e-3, &v(&[2.0, -4.0]));
        assert_eq!(out, v(&[1.0, 1e-3]));
    }

    #[test]
    fn nonneg_linear_matches_grid_oracle() {
        let cases = [(0.1, 1.0, 0.5), (0.1, 1.0, 0.05), (0.3, 0.7, 2.0)];
        for (alpha, tau, t) in cases {
            let obj = |s: f64| alpha * s + (s - t).powi(2) / (2.0 * tau);
            let oracle = grid_argmin(obj, 0.0, 5.0);
            assert!((prox_nonneg_linear(tau, alpha, t) - oracle).abs() < 1e-7);
        }
        assert_relative_eq!(prox_nonneg_linear(1.0, 0.1, 0.5), 0.4, epsilon = 1e-15);
        assert_eq!(prox_nonneg_linear(1.0, 0.1, 0.05), 0.0);
        assert_eq!(prox_nonneg_linear(1.0, 0.1, -3.0), 0.0);
    }

    #[test]
    fn linf_ball_examples() {
        assert_eq!(
            prox_linf_ball(100.0, &v(&[150.0, -30.0])),
            v(&[100.0, -30.0])
        );
        assert_eq!(prox_linf_ball(1.0, &v(&[0.5, -0.25])), v(&[0.5, -0.25]));
        assert_eq!(prox_linf_ball(1.0, &v(&[-1e6])), v(&[-1.0]));
    }

    #[test]
    fn linf_ball_matches_moreau_decomposition() {
        // prox_{σF*}(v) = v - σ prox_{F/σ}(v/σ) with F = (1/α)|·|.
        let alpha = 0.01;
        let sigma = 0.7;
        let x = v(&[150.0, -30.0]);
        let via_moreau = &x - prox_l1(1.0 / sigma, 1.0 / alpha, &(&x / sigma)) * sigma;
        assert_relative_eq!(via_moreau, prox_linf_ball(1.0 / alpha, &x), epsilon = 1e-12);
    }

    #[test]
    fn moreau_yosida_ball_examples() {
        let obj = |y: f64, vv: f64| {
            if y.abs() > 100.0 {
                f64::INFINITY
            } else {
                0.5 * y * y + (y - vv).powi(2) / 2.0
            }
        };
        let a = prox_linf_ball_moreau_yosida(1.0, 1.0, 100.0, &v(&[150.0]))[0];
        assert_relative_eq!(a, 75.0, epsilon = 1e-14);
        assert!((a - grid_argmin(|y| obj(y, 150.0), -100.0, 100.0)).abs() < 1e-5);
        let b = prox_linf_ball_moreau_yosida(1.0, 1.0, 100.0, &v(&[300.0]))[0];
        assert_eq!(b, 100.0);
        assert!((b - grid_argmin(|y| obj(y, 300.0), -100.0, 100.0)).abs() < 1e-6);
        let x = v(&[3.0, -250.0, 42.0]);
        assert_eq!(
            prox_linf_ball_moreau_yosida(0.3, 0.0, 100.0, &x),
            prox_linf_ball(100.0, &x)
        );
    }

    #[test]
    fn state_constraint_unconstrained_example() {
        let out = prox_state_constraint_conjugate(1.0, 1.0, f64::INFINITY, &v(&[0.0]), &v(&[2.0]))
            .unwrap();
        assert_relative_eq!(out[0], 1.0, epsilon = 1e-15);
        // the conjugate of 1/(2α)y² is α/2 y², resolvent v/(1+σα)
        let obj = |y: f64| 0.5 * y * y + (y - 2.0).powi(2) / 2.0;
        assert!((out[0] - grid_argmin(obj, -5.0, 5.0)).abs() < 1e-6);
    }

    #[test]
    fn state_constraint_saturates_at_c() {
        let zd = v(&[10.0, 20.0]);
        let w = v(&[0.0, 5.0]);
        let primal = prox_state_constraint(0.5, 1e-3, 0.68, &zd, &w).unwrap();
        assert_eq!(primal, v(&[0.68, 0.68]));
    }

    #[test]
    fn state_constraint_rejects_mismatched_data() {
        assert!(
            prox_state_constraint_conjugate(1.0, 1.0, 0.5, &v(&[0.0]), &v(&[1.0, 2.0])).is_err()
        );
    }
}
