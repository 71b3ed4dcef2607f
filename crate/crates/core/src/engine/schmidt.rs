use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::algebra::ChainLayout;
use crate::error::{Result, SteerError};

/// Singular values of the bipartition `sites[0..bond] | sites[bond..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub bond: usize,
    /// Descending, nonnegative.
    pub values: Vec<f64>,
    /// `λᵢ² / Σ λ²`.
    pub weights: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn from_values(bond: usize, mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let total: f64 = values.iter().map(|v| v * v).sum();
        let weights = values.iter().map(|v| v * v / total).collect();
        SchmidtSpectrum { bond, values, weights }
    }

    /// von Neumann entropy `−Σ p log p` (natural log).
    pub fn entropy(&self) -> f64 {
        -self
            .weights
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

pub fn schmidt(layout: &ChainLayout, amps: &[C64], bond: usize) -> Result<SchmidtSpectrum> {
    let n = layout.n_sites();
    if bond == 0 || bond >= n {
        return Err(SteerError::InvalidArgument(format!(
            "bond {bond} must lie in 1..{}",
            n - 1
        )));
    }
    let d = layout.local_dim();
    let rows = d.pow(bond as u32);
    let cols = d.pow((n - bond) as u32);
    // keep the smaller dimension as the row count for a cheaper SVD
    let m = if rows <= cols {
        DMatrix::from_row_slice(rows, cols, amps)
    } else {
        DMatrix::from_column_slice(cols, rows, amps)
    };
    let sv = m.singular_values();
    Ok(SchmidtSpectrum::from_values(bond, sv.iter().cloned().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{InitialState, PureState};
    use crate::linalg::kron;

    #[test]
    fn product_state_has_zero_entropy() {
        let layout = ChainLayout::spin_one(3).unwrap();
        let s = PureState::new(&layout, &InitialState::RandomProduct(5)).unwrap();
        for b in 1..5 {
            let sp = schmidt(&layout, s.amplitudes(), b).unwrap();
            assert!(sp.entropy().abs() < 1e-10);
            assert!((sp.values[0] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn maximally_entangled_pair() {
        let layout = ChainLayout::system_only(2, 3).unwrap();
        let v = 1.0 / 3f64.sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); 9];
        for k in 0..3 {
            amps[4 * k] = C64::new(v, 0.0);
        }
        let sp = schmidt(&layout, &amps, 1).unwrap();
        assert!((sp.entropy() - 3f64.ln()).abs() < 1e-12);
        let total: f64 = sp.values.iter().map(|x| x * x).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn local_unitaries_leave_entropy_unchanged() {
        let layout = ChainLayout::system_only(4, 3).unwrap();
        let s = PureState::new(&layout, &InitialState::RandomState(11)).unwrap();
        let before = schmidt(&layout, s.amplitudes(), 2).unwrap().entropy();
        let h = DMatrix::from_fn(9, 9, |i, j| C64::new((i + j) as f64 * 0.1, i as f64 - j as f64));
        let u = crate::linalg::unitary_exp(&(&h + h.adjoint()), 0.4);
        let full = kron(&u, &DMatrix::identity(9, 9));
        let rotated = full * s.as_dvector();
        let after = schmidt(&layout, rotated.as_slice(), 2).unwrap().entropy();
        assert!((before - after).abs() < 1e-10);
    }

    #[test]
    fn rejects_edge_bonds() {
        let layout = ChainLayout::spin_one(2).unwrap();
        let s = PureState::new(&layout, &InitialState::AllUp).unwrap();
        assert!(schmidt(&layout, s.amplitudes(), 0).is_err());
        assert!(schmidt(&layout, s.amplitudes(), 3).is_err());
    }
}
