//! Thomas algorithm for tridiagonal systems.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Solves `A x = rhs` where `A` has sub-diagonal `lower`, diagonal `diag` and
/// super-diagonal `upper`.
pub(crate) fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    Factored::new(lower, diag, upper)?.solve(rhs)
}

/// LU factorisation of a tridiagonal matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub(crate) struct Factored {
    lower: Vec<f64>,
    /// Pivots of the eliminated diagonal.
    pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Factored {
    pub(crate) fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(Error::Numeric(format!(
                "tridiagonal shape mismatch: {} / {} / {}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        let mut pivot = Vec::with_capacity(n);
        pivot.push(diag[0]);
        for i in 1..n {
            let p = pivot[i - 1];
            if p == 0.0 || !p.is_finite() {
                return Err(Error::Numeric(format!("zero pivot at row {}", i - 1)));
            }
            pivot.push(diag[i] - lower[i - 1] * upper[i - 1] / p);
        }
        if pivot[n - 1] == 0.0 || !pivot[n - 1].is_finite() {
            return Err(Error::Numeric(format!("zero pivot at row {}", n - 1)));
        }
        Ok(Self { lower: lower.to_vec(), pivot, upper: upper.to_vec() })
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub(crate) fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.pivot.len();
        if x.len() != n {
            return Err(Error::Numeric(format!("rhs of length {} for a system of {n}", x.len())));
        }
        for i in 1..n {
            x[i] -= self.lower[i - 1] / self.pivot[i - 1] * x[i - 1];
        }
        x[n - 1] /= self.pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.pivot[i];
        }
        Ok(())
    }
}
