//! Saddle-point problem abstraction and concrete problems.

pub mod prox;
pub mod toy;

use nalgebra::DVector;

use crate::error::Result;
use crate::solver::PrimalDualPoint;

pub use toy::{ComplexToyProblem, ThreePointReport, ToyReference};

pub type Vector = DVector<f64>;

/// A saddle-point problem `min_x max_y G(x) + <K(x), y> - F*(y)`.
///
/// Implementations provide `K`, its Fréchet derivative and the Hilbert-space
/// adjoint of that derivative, together with the proximal maps of `G` and
/// `F*`. The adjoint must be taken with respect to [`primal_inner`] and
/// [`dual_inner`], and the proximal maps must be resolvents in those same
/// inner products.
///
/// Problems are immutable after construction and may be shared read-only
/// between concurrent runs.
///
/// [`primal_inner`]: SaddleProblem::primal_inner
/// [`dual_inner`]: SaddleProblem::dual_inner
pub trait SaddleProblem {
    fn primal_dim(&self) -> usize;
    fn dual_dim(&self) -> usize;

    /// `K(x)`.
    fn apply_k(&self, x: &Vector) -> Result<Vector>;

    /// `∇K(x) h`.
    fn apply_dk(&self, x: &Vector, h: &Vector) -> Result<Vector>;

    /// `∇K(x)^* w`.
    fn apply_dk_adjoint(&self, x: &Vector, w: &Vector) -> Result<Vector>;

    /// `argmin_x G(x) + ||x - v||^2 / (2 tau)`.
    fn prox_g(&self, tau: f64, v: &Vector) -> Result<Vector>;

    /// `argmin_y F*(y) + ||y - v||^2 / (2 sigma)`.
    fn prox_fstar(&self, sigma: f64, v: &Vector) -> Result<Vector>;

    fn primal_inner(&self, a: &Vector, b: &Vector) -> f64 {
        a.dot(b)
    }

    fn dual_inner(&self, a: &Vector, b: &Vector) -> f64 {
        a.dot(b)
    }

    /// A known saddle point, if one is available.
    fn reference(&self) -> Option<&PrimalDualPoint> {
        None
    }

    fn primal_norm_sq(&self, a: &Vector) -> f64 {
        self.primal_inner(a, a)
    }

    fn dual_norm_sq(&self, a: &Vector) -> f64 {
        self.dual_inner(a, a)
    }

    /// `||u||^2` in the product space.
    fn point_norm_sq(&self, u: &PrimalDualPoint) -> f64 {
        self.primal_norm_sq(&u.x) + self.dual_norm_sq(&u.y)
    }
}

impl<P: SaddleProblem + ?Sized> SaddleProblem for &P {
    fn primal_dim(&self) -> usize {
        (**self).primal_dim()
    }
    fn dual_dim(&self) -> usize {
        (**self).dual_dim()
    }
    fn apply_k(&self, x: &Vector) -> Result<Vector> {
        (**self).apply_k(x)
    }
    fn apply_dk(&self, x: &Vector, h: &Vector) -> Result<Vector> {
        (**self).apply_dk(x, h)
    }
    fn apply_dk_adjoint(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        (**self).apply_dk_adjoint(x, w)
    }
    fn prox_g(&self, tau: f64, v: &Vector) -> Result<Vector> {
        (**self).prox_g(tau, v)
    }
    fn prox_fstar(&self, sigma: f64, v: &Vector) -> Result<Vector> {
        (**self).prox_fstar(sigma, v)
    }
    fn primal_inner(&self, a: &Vector, b: &Vector) -> f64 {
        (**self).primal_inner(a, b)
    }
    fn dual_inner(&self, a: &Vector, b: &Vector) -> f64 {
        (**self).dual_inner(a, b)
    }
    fn reference(&self) -> Option<&PrimalDualPoint> {
        (**self).reference()
    }
}
