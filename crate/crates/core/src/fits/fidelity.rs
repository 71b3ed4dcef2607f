use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::algebra::{aklt_mps_states, GroundSpace};
use crate::error::{Result, SteerError};

/// Ground-space fidelity: the projector value (contractual) and the raw
/// sum over the four normalized valence-bond states, which differs by
/// their finite-size overlaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPair {
    pub projector: f64,
    pub mps_sum: f64,
}

/// `Tr(P_GS ρ)` for a system density matrix.
pub fn fidelity(rho: &DMatrix<C64>, ground: &GroundSpace) -> Result<FidelityPair> {
    let n = ground.vectors[0].len();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(SteerError::InvalidArgument(format!(
            "density matrix is {}×{}, ground space lives in dimension {n}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let value = |vs: &[DVector<C64>]| vs.iter().map(|g| (g.adjoint() * rho * g)[(0, 0)].re).sum::<f64>();
    Ok(FidelityPair {
        projector: value(&ground.vectors),
        mps_sum: value(&aklt_mps_states(ground.ls)?),
    })
}

/// Same for a normalized system state vector.
pub fn fidelity_pure(psi: &[C64], ground: &GroundSpace) -> Result<FidelityPair> {
    let n = ground.vectors[0].len();
    if psi.len() != n {
        return Err(SteerError::InvalidArgument(format!(
            "state has {} amplitudes, expected {n}",
            psi.len()
        )));
    }
    let mps = aklt_mps_states(ground.ls)?;
    let weight = |vs: &[DVector<C64>]| {
        vs.iter()
            .map(|g| g.iter().zip(psi).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr())
            .sum::<f64>()
    };
    Ok(FidelityPair {
        projector: weight(&ground.vectors),
        mps_sum: weight(&mps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::aklt_ground_space;

    #[test]
    fn kernel_vector_and_mixed_state() {
        let g = aklt_ground_space(2).unwrap();
        let f = fidelity_pure(g.vectors[1].as_slice(), &g).unwrap();
        assert!((f.projector - 1.0).abs() < 1e-12);
        let mixed = DMatrix::<C64>::identity(9, 9) / C64::new(9.0, 0.0);
        assert!((fidelity(&mixed, &g).unwrap().projector - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn all_up_at_two_sites() {
        // |↑↑⟩ is the spin-2 state |2,2⟩, orthogonal to the spin-0/1 ground space
        let g = aklt_ground_space(2).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); 9];
        psi[0] = C64::new(1.0, 0.0);
        assert!(fidelity_pure(&psi, &g).unwrap().projector.abs() < 1e-12);
        // |↑↓⟩ has weight 1/2 on |1,0⟩ and 1/3 on |0,0⟩, i.e. 5/6 on the ground space
        let mut psi = vec![C64::new(0.0, 0.0); 9];
        psi[2] = C64::new(1.0, 0.0);
        assert!((fidelity_pure(&psi, &g).unwrap().projector - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn basis_independence() {
        let g = aklt_ground_space(4).unwrap();
        let u = DMatrix::<C64>::from_fn(4, 4, |i, j| C64::from_polar(0.5, 0.3 * (i * j) as f64 + 0.1 * i as f64));
        let q = u.qr().q();
        let mixed: Vec<DVector<C64>> = (0..4)
            .map(|k| (0..4).fold(DVector::zeros(81), |acc, i| acc + &g.vectors[i] * q[(i, k)]))
            .collect();
        let remixed = GroundSpace { ls: 4, vectors: mixed };
        let psi: Vec<C64> = (0..81).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let n = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<C64> = psi.iter().map(|a| a / n).collect();
        let a = fidelity_pure(&psi, &g).unwrap().projector;
        let b = fidelity_pure(&psi, &remixed).unwrap().projector;
        assert!((a - b).abs() < 1e-10);
        assert!((0.0..=1.0).contains(&a));
    }
}
