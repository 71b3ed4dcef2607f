use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::ChainLayout;
use crate::error::{Result, SteerError};

/// Dense matrix acting on a short list of chain sites.
///
/// The first listed site is the most significant digit of the local index.
/// Nonzero entries are cached for sparse application.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    sites: Vec<usize>,
    matrix: DMatrix<C64>,
    nonzeros: Vec<(usize, usize, C64)>,
}

impl LocalOperator {
    pub fn new(sites: Vec<usize>, matrix: DMatrix<C64>, local_dim: usize) -> Result<Self> {
        if sites.is_empty() || sites.len() > 3 {
            return Err(SteerError::InvalidArgument(format!(
                "local operators act on 1..=3 sites, got {}",
                sites.len()
            )));
        }
        let n = local_dim.pow(sites.len() as u32);
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(SteerError::InvalidArgument(format!(
                "matrix is {}x{}, expected {n}x{n} for {} sites",
                matrix.nrows(),
                matrix.ncols(),
                sites.len()
            )));
        }
        let mut seen = sites.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != sites.len() {
            return Err(SteerError::InvalidArgument("repeated site".into()));
        }
        let mut nonzeros = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = matrix[(r, c)];
                if v.norm() > 1e-15 {
                    nonzeros.push((r, c, v));
                }
            }
        }
        Ok(LocalOperator {
            sites,
            matrix,
            nonzeros,
        })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn nonzeros(&self) -> &[(usize, usize, C64)] {
        &self.nonzeros
    }

    pub fn check_layout(&self, layout: &ChainLayout) -> Result<()> {
        if let Some(&s) = self.sites.iter().find(|&&s| s >= layout.n_sites()) {
            return Err(SteerError::InvalidArgument(format!(
                "site {s} outside a chain of {} sites",
                layout.n_sites()
            )));
        }
        if layout.local_dim().pow(self.sites.len() as u32) != self.matrix.nrows() {
            return Err(SteerError::InvalidArgument(
                "local dimension does not match the layout".into(),
            ));
        }
        Ok(())
    }

    pub fn adjoint(&self, local_dim: usize) -> Self {
        Self::new(self.sites.clone(), self.matrix.adjoint(), local_dim)
            .expect("adjoint keeps the shape")
    }

    /// Dense `n × n` matrix on the full space of `layout` (small chains only).
    pub fn to_dense(&self, layout: &ChainLayout) -> DMatrix<C64> {
        let dim = layout.dim();
        let d = layout.local_dim();
        let k = self.sites.len();
        let mut out = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut local_c = 0;
            for &s in &self.sites {
                local_c = local_c * d + (col / layout.stride(s)) % d;
            }
            let mut base = col;
            for &s in &self.sites {
                base -= ((col / layout.stride(s)) % d) * layout.stride(s);
            }
            for local_r in 0..d.pow(k as u32) {
                let v = self.matrix[(local_r, local_c)];
                if v.norm() == 0.0 {
                    continue;
                }
                let mut row = base;
                let mut rem = local_r;
                for &s in self.sites.iter().rev() {
                    row += (rem % d) * layout.stride(s);
                    rem /= d;
                }
                out[(row, col)] += v;
            }
        }
        out
    }
}
