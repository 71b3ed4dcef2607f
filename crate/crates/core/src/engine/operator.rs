use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::SitePlan;
use crate::algebra::{ChainLayout, LocalOperator};
use crate::error::Result;

/// Anything that can act on a dense amplitude vector.
pub trait LinearOperator: Sync + Send {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Sum of local operators, applied term by term without materializing the
/// full matrix.
#[derive(Debug, Clone)]
pub struct ChainOperator {
    layout: ChainLayout,
    terms: Vec<(LocalOperator, Arc<SitePlan>)>,
}

impl ChainOperator {
    pub fn new(layout: &ChainLayout, terms: Vec<LocalOperator>) -> Result<Self> {
        let mut planned = Vec::with_capacity(terms.len());
        for t in terms {
            t.check_layout(layout)?;
            let plan = Arc::new(SitePlan::new(layout, t.sites()));
            planned.push((t, plan));
        }
        Ok(ChainOperator {
            layout: layout.clone(),
            terms: planned,
        })
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    pub fn terms(&self) -> impl Iterator<Item = &LocalOperator> {
        self.terms.iter().map(|(t, _)| t)
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// `y += A x`.
    pub fn apply_add(&self, x: &[C64], y: &mut [C64]) {
        for (op, plan) in &self.terms {
            plan.apply_add(op, x, y);
        }
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_add(x, &mut y);
        crate::linalg::vdot(x, &y)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<C64> {
        let n = self.layout.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for (op, _) in &self.terms {
            m += op.to_dense(&self.layout);
        }
        m
    }
}

impl LinearOperator for ChainOperator {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.fill(C64::new(0.0, 0.0));
        self.apply_add(x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn sparse_application_matches_dense_on_noncontiguous_sites() {
        let layout = ChainLayout::spin_one(3).unwrap();
        let m = DMatrix::from_fn(9, 9, |i, j| C64::new((i as f64 - j as f64).sin(), (i * j) as f64 * 0.1));
        let op = LocalOperator::new(vec![4, 0], m, 3).unwrap();
        let chain = ChainOperator::new(&layout, vec![op.clone()]).unwrap();
        let x: Vec<C64> = (0..layout.dim())
            .map(|i| C64::new((i as f64 * 0.7).cos(), (i as f64 * 0.3).sin()))
            .collect();
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        chain.apply(&x, &mut y);
        let dense = op.to_dense(&layout) * DVector::from_vec(x.clone());
        let err: f64 = y.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(err.sqrt() < 1e-10);
    }
}
