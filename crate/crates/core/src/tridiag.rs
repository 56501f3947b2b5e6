//! Tridiagonal systems and Thomas elimination.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals.
///
/// `lower[i]` sits at `(i + 1, i)`, `upper[i]` at `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::invalid("tridiagonal: inconsistent diagonal lengths"));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![1.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Positive diagonal, non-positive off-diagonals and weak row diagonal
    /// dominance.
    pub fn is_m_matrix(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let lo = if i > 0 { self.lower[i - 1] } else { 0.0 };
            let up = if i + 1 < n { self.upper[i] } else { 0.0 };
            self.diag[i] > 0.0 && lo <= 0.0 && up <= 0.0 && self.diag[i] >= -(lo + up)
        })
    }

    pub fn factor(&self) -> Result<TridiagonalFactor> {
        let n = self.len();
        let mut upper_mod = vec![0.0; n.saturating_sub(1)];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.lower[i - 1] * prev_upper
            };
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::ZeroPivot { row: i });
            }
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                upper_mod[i] = self.upper[i] * inv_pivot[i];
                prev_upper = upper_mod[i];
            }
        }
        Ok(TridiagonalFactor {
            lower: self.lower.clone(),
            upper_mod,
            inv_pivot,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.factor()?.solve_in_place(&mut x)?;
        Ok(x)
    }
}

/// LU factors of a tridiagonal matrix without pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalFactor {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.len();
        if x.len() != n {
            return Err(Error::invalid("tridiagonal solve: rhs length mismatch"));
        }
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.upper_mod[i] * x[i + 1];
        }
        Ok(())
    }
}
