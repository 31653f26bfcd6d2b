use crate::problems::Vector;

/// A primal-dual pair `u = (x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalDualPoint {
    pub x: Vector,
    pub y: Vector,
}

impl PrimalDualPoint {
    pub fn new(x: Vector, y: Vector) -> Self {
        Self { x, y }
    }

    pub fn zeros(primal_dim: usize, dual_dim: usize) -> Self {
        Self {
            x: Vector::zeros(primal_dim),
            y: Vector::zeros(dual_dim),
        }
    }

    pub fn sub(&self, other: &PrimalDualPoint) -> PrimalDualPoint {
        PrimalDualPoint {
            x: &self.x - &other.x,
            y: &self.y - &other.y,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|v| v.is_finite())
    }
}
