use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Result, SteerError};
use crate::linalg::{frobenius, hermitian_eigenvalues};

/// Unit-trace Hermitian positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates trace (1e-9), Hermiticity (1e-10) and positivity (−1e-9).
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        let rho = DensityMatrix { matrix };
        rho.check(1e-9)?;
        Ok(rho)
    }

    pub fn pure(v: &DVector<C64>) -> Result<Self> {
        Self::new(v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix {
            matrix: DMatrix::identity(n, n) * C64::new(1.0 / n as f64, 0.0),
        }
    }

    pub(crate) fn unchecked(matrix: DMatrix<C64>) -> Self {
        DensityMatrix { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, op: &DMatrix<C64>) -> f64 {
        (op * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let n = self.matrix.nrows();
        if self.matrix.ncols() != n {
            return Err(SteerError::InvalidArgument("density matrix must be square".into()));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(SteerError::StateCorruption(format!("trace {tr} differs from 1")));
        }
        let herm = frobenius(&(&self.matrix - self.matrix.adjoint()));
        if herm > tol.min(1e-10) * n as f64 {
            return Err(SteerError::StateCorruption(format!("Hermiticity defect {herm:.3e}")));
        }
        let w = self.min_eigenvalue();
        if w < -tol {
            return Err(SteerError::StateCorruption(format!("negative eigenvalue {w:.3e}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_states() {
        let m = DMatrix::<C64>::identity(3, 3);
        assert!(DensityMatrix::new(m).is_err());
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(4).into_matrix()).is_ok());
    }
}
