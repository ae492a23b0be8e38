//! Dense symmetric spectral primitives: extreme eigenvalues and the largest
//! singular value. Every test statistic in this crate bottoms out here.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetry validation tolerance on entry; matrices within it are
/// re-symmetrized as (M + M^T) / 2 to kill asymmetric float accumulation.
const SYMMETRY_TOL: f64 = 1e-12;

/// A dense real symmetric matrix of order >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    mat: DMatrix<f64>,
}

impl DenseSymMatrix {
    /// Validates symmetry (tolerance 1e-12) and finiteness, then enforces
    /// exact symmetry by averaging with the transpose.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let n = mat.nrows();
        if n != mat.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("order {n} < 2")));
        }
        for j in 0..n {
            for i in 0..n {
                let v = mat[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "non-finite entry {v} at ({i}, {j})"
                    )));
                }
                if (v - mat[(j, i)]).abs() > SYMMETRY_TOL {
                    return Err(Error::InvalidInput(format!(
                        "asymmetric at ({i}, {j}): {} vs {}",
                        v,
                        mat[(j, i)]
                    )));
                }
            }
        }
        let sym = (&mat + mat.transpose()) * 0.5;
        Ok(Self { mat: sym })
    }

    /// Builds from a row-major closure without an intermediate allocation of
    /// the caller's own; entries are still validated.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn order(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// Returns (lambda_1, lambda_n), the largest and smallest eigenvalues.
pub fn extreme_eigenvalues(m: &DenseSymMatrix) -> (f64, f64) {
    let eigs = m.as_matrix().clone().symmetric_eigenvalues();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &e in eigs.iter() {
        lo = lo.min(e);
        hi = hi.max(e);
    }
    (hi, lo)
}

/// Largest singular value of a symmetric matrix: max(|lambda_1|, |lambda_n|).
pub fn largest_singular_value(m: &DenseSymMatrix) -> f64 {
    let (hi, lo) = extreme_eigenvalues(m);
    hi.abs().max(lo.abs())
}
