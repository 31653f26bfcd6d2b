//! Symmetric tridiagonal matrices and their `LDLᵀ` factorisation.

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::problems::Vector;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal {
    /// Main diagonal, length `n`.
    pub diag: Vec<f64>,
    /// Sub/super diagonal, length `n - 1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn add_assign(&mut self, other: &SymTridiagonal) {
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += b;
        }
        for (a, b) in self.off.iter_mut().zip(&other.off) {
            *a += b;
        }
    }

    pub fn mul_vec(&self, v: &Vector) -> Vector {
        let n = self.dim();
        Vector::from_fn(n, |i, _| {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * v[i + 1];
            }
            s
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// `LDLᵀ` factorisation; fails unless every pivot is positive, i.e. the
    /// matrix is positive definite.
    pub fn factorize(&self) -> Result<TridiagonalFactor> {
        let n = self.dim();
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        let mut prev = 0.0;
        for i in 0..n {
            let d = if i == 0 {
                self.diag[0]
            } else {
                let l = self.off[i - 1] / prev;
                lower.push(l);
                self.diag[i] - l * self.off[i - 1]
            };
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { row: i, pivot: d });
            }
            pivots.push(d);
            prev = d;
        }
        Ok(TridiagonalFactor { pivots, lower })
    }

    /// `LDLᵀ` factorisation of a diagonally dominant M-matrix given its row
    /// sums, which must be computed independently of `diag`.
    ///
    /// Pivots are formed from the row sums of the Schur complements, which
    /// stay subtraction-free, so the factors are accurate to a few ulps even
    /// when the matrix is badly conditioned. Falls back to
    /// [`factorize`](Self::factorize) if the sign pattern does not apply.
    pub fn factorize_m_matrix(&self, row_sums: &[f64]) -> Result<TridiagonalFactor> {
        check_dim("row sums", self.dim(), row_sums.len())?;
        if self.off.iter().any(|&e| e > 0.0) || row_sums.iter().any(|&s| !(s >= 0.0)) {
            return self.factorize();
        }
        let n = self.dim();
        let mut pivots = Vec::with_capacity(n);
        let mut lower = Vec::with_capacity(n.saturating_sub(1));
        // Row sum of the current Schur complement row, over columns ≥ i.
        let mut reduced = row_sums.first().copied().unwrap_or(0.0);
        for i in 0..n {
            let d = match self.off.get(i) {
                Some(&e) => reduced - e,
                None => reduced,
            };
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { row: i, pivot: d });
            }
            pivots.push(d);
            if let Some(&e) = self.off.get(i) {
                lower.push(e / d);
                reduced = row_sums[i + 1] + (-e) * (reduced / d);
            }
        }
        Ok(TridiagonalFactor { pivots, lower })
    }
}

/// `A = L D Lᵀ` with unit lower-bidiagonal `L`. Immutable, so a single
/// factorisation can serve concurrent solves.
#[derive(Clone, Debug)]
pub struct TridiagonalFactor {
    pivots: Vec<f64>,
    lower: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        check_dim("tridiagonal right-hand side", self.dim(), rhs.len())?;
        let n = self.dim();
        let mut x = rhs.clone();
        for i in 1..n {
            x[i] -= self.lower[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.pivots[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.lower[i] * x[i + 1];
        }
        Ok(x)
    }
}
