use crate::error::{check_dim, Error, Result};
use crate::problems::Vector;

/// Default lower bound `ε_x` on the potential.
pub const DEFAULT_COEFFICIENT_FLOOR: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformMesh1D {
    a: f64,
    b: f64,
    n_elements: usize,
}

impl Default for UniformMesh1D {
    fn default() -> Self {
        Self {
            a: -1.0,
            b: 1.0,
            n_elements: 1000,
        }
    }
}

impl UniformMesh1D {
    pub fn new(a: f64, b: f64, n_elements: usize) -> Result<Self> {
        if n_elements < 2 {
            return Err(Error::invalid("mesh_n", "need at least two elements"));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(
                "domain",
                format!("need a < b, got ({a}, {b})"),
            ));
        }
        Ok(Self { a, b, n_elements })
    }

    /// Uniform mesh of `(-1, 1)`.
    pub fn symmetric(n_elements: usize) -> Result<Self> {
        Self::new(-1.0, 1.0, n_elements)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_nodes(&self) -> usize {
        self.n_elements + 1
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n_elements as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        self.a + self.h() * k as f64
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        self.a + self.h() * (k as f64 + 0.5)
    }

    /// `f` sampled at element midpoints.
    pub fn sample_elements(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector::from_fn(self.n_elements, |k, _| f(self.midpoint(k)))
    }

    /// `f` sampled at nodes.
    pub fn sample_nodes(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector::from_fn(self.n_nodes(), |k, _| f(self.node(k)))
    }

    /// L² inner product of two piecewise-constant functions.
    pub fn p0_inner(&self, u: &Vector, v: &Vector) -> f64 {
        self.h() * u.dot(v)
    }
}

/// Piecewise-constant potential bounded below by `floor`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialCoefficient {
    values: Vector,
    floor: f64,
}

impl PotentialCoefficient {
    pub fn new(values: Vector, floor: f64) -> Result<Self> {
        if !(floor > 0.0) {
            return Err(Error::invalid("coefficient_floor", "must be positive"));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| !(v >= floor)) {
            return Err(Error::CoefficientBelowFloor {
                index,
                value,
                floor,
            });
        }
        Ok(Self { values, floor })
    }

    pub fn with_default_floor(values: Vector) -> Result<Self> {
        Self::new(values, DEFAULT_COEFFICIENT_FLOOR)
    }

    /// Pointwise projection onto `[floor, ∞)`.
    pub fn projected(values: &Vector, floor: f64) -> Result<Self> {
        Self::new(values.map(|v| v.max(floor)), floor)
    }

    pub fn constant(mesh: &UniformMesh1D, value: f64) -> Result<Self> {
        Self::with_default_floor(Vector::from_element(mesh.n_elements(), value))
    }

    pub(crate) fn check_mesh(&self, mesh: &UniformMesh1D) -> Result<()> {
        check_dim(
            "potential coefficient",
            mesh.n_elements(),
            self.values.len(),
        )
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

/// Nodal values of a piecewise-linear function.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFunction {
    pub values: Vector,
}

impl StateFunction {
    pub fn new(values: Vector) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("state", "non-finite nodal value"));
        }
        Ok(Self { values })
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_geometry() {
        let m = UniformMesh1D::default();
        assert_eq!(m.n_nodes(), 1001);
        assert!((m.h() - 0.002).abs() < 1e-15);
        assert!(UniformMesh1D::symmetric(1).is_err());
        assert!(UniformMesh1D::new(1.0, -1.0, 4).is_err());
    }

    #[test]
    fn coefficient_floor_is_enforced() {
        let bad = Vector::from_column_slice(&[1.0, 1e-4, 2.0]);
        assert!(matches!(
            PotentialCoefficient::with_default_floor(bad.clone()),
            Err(Error::CoefficientBelowFloor { index: 1, .. })
        ));
        let p = PotentialCoefficient::projected(&bad, 1e-3).unwrap();
        assert_eq!(p.values()[1], 1e-3);
    }
}
