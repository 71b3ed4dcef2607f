use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::ORACLE_MAX_DIM;
use crate::algebra::ChainLayout;
use crate::error::{Result, SteerError};

/// `∂_t χ = −i[H, χ] + ε Σ_sites (Σ_α P^α χ P^α − χ)`.
///
/// The dephasing part is diagonal in the product basis: element `(i, j)`
/// decays at rate `ε·(number of sites on which i and j differ)`.
#[derive(Debug, Clone)]
pub struct DephasingGenerator {
    hamiltonian: DMatrix<C64>,
    eps: f64,
    mismatch: DMatrix<f64>,
}

fn site_digits(layout: &ChainLayout, index: usize) -> impl Iterator<Item = usize> + '_ {
    (0..layout.n_sites()).map(move |s| (index / layout.stride(s)) % layout.local_dim())
}

impl DephasingGenerator {
    pub fn new(layout: &ChainLayout, hamiltonian: &DMatrix<C64>, eps: f64) -> Result<Self> {
        let n = layout.dim();
        if n > ORACLE_MAX_DIM {
            return Err(SteerError::EngineLimit {
                qutrits: layout.n_sites(),
                local_dim: layout.local_dim(),
                limit: ORACLE_MAX_DIM,
            });
        }
        if hamiltonian.shape() != (n, n) {
            return Err(SteerError::InvalidArgument("Hamiltonian does not match the layout".into()));
        }
        if !(eps >= 0.0) {
            return Err(SteerError::InvalidArgument(format!("dephasing rate must be >= 0, got {eps}")));
        }
        let mismatch = DMatrix::from_fn(n, n, |i, j| {
            site_digits(layout, i).zip(site_digits(layout, j)).filter(|(a, b)| a != b).count() as f64
        });
        Ok(DephasingGenerator {
            hamiltonian: hamiltonian.clone(),
            eps,
            mismatch,
        })
    }

    pub fn apply(&self, chi: &DMatrix<C64>) -> DMatrix<C64> {
        let i = C64::new(0.0, 1.0);
        let mut out = (&self.hamiltonian * chi - chi * &self.hamiltonian) * (-i);
        if self.eps > 0.0 {
            for (o, (c, m)) in out.iter_mut().zip(chi.iter().zip(self.mismatch.iter())) {
                *o -= c * (self.eps * m);
            }
        }
        out
    }

    fn rk4_step(&self, chi: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
        let half = C64::new(h / 2.0, 0.0);
        let k1 = self.apply(chi);
        let k2 = self.apply(&(chi + &k1 * half));
        let k3 = self.apply(&(chi + &k2 * half));
        let k4 = self.apply(&(chi + &k3 * C64::new(h, 0.0)));
        chi + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    }
}

/// Integrate the dephasing master equation to time `t` with RK4 step `h`.
pub fn dephasing_lindblad_evolve(
    gen: &DephasingGenerator,
    chi: &DMatrix<C64>,
    t: f64,
    h: f64,
) -> Result<DMatrix<C64>> {
    if !(t >= 0.0) || !(h > 0.0) {
        return Err(SteerError::InvalidArgument("need t >= 0 and h > 0".into()));
    }
    let steps = (t / h).ceil() as usize;
    let mut chi = chi.clone();
    for k in 0..steps {
        let hk = if k + 1 == steps { t - h * k as f64 } else { h };
        if hk <= 0.0 {
            break;
        }
        let next = gen.rk4_step(&chi, hk);
        let tr = next.trace().re;
        let drift = (tr - chi.trace().re).abs();
        if drift > 1e-6 || !tr.is_finite() {
            return Err(SteerError::Integration { drift, limit: 1e-6 });
        }
        chi = (&next + next.adjoint()) * C64::new(0.5 / tr, 0.0);
    }
    Ok(chi)
}

/// `ρ → (1 − q) ρ + q Σ_α P^α_site ρ P^α_site`.
pub fn dephasing_channel(rho: &DMatrix<C64>, layout: &ChainLayout, site: usize, q: f64) -> DMatrix<C64> {
    let d = layout.local_dim();
    let stride = layout.stride(site);
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
        if (i / stride) % d == (j / stride) % d {
            rho[(i, j)]
        } else {
            rho[(i, j)] * (1.0 - q)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, unitary_exp};

    #[test]
    fn single_qutrit_coherences_decay_exponentially() {
        let layout = ChainLayout::system_only(1, 3).unwrap();
        let h = DMatrix::zeros(3, 3);
        let gen = DephasingGenerator::new(&layout, &h, 0.4).unwrap();
        let chi = DMatrix::from_element(3, 3, C64::new(1.0 / 3.0, 0.0));
        let out = dephasing_lindblad_evolve(&gen, &chi, 2.5, 1e-3).unwrap();
        let expect = (-0.4f64 * 2.5).exp() / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { expect };
                assert!((out[(i, j)].re - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_rate_is_unitary() {
        let layout = ChainLayout::system_only(2, 3).unwrap();
        let a = DMatrix::from_fn(9, 9, |i, j| C64::new((i + j) as f64 * 0.02, (i as f64 - j as f64) * 0.04));
        let h = &a + a.adjoint();
        let gen = DephasingGenerator::new(&layout, &h, 0.0).unwrap();
        let mut chi = DMatrix::<C64>::zeros(9, 9);
        chi[(0, 0)] = C64::new(1.0, 0.0);
        let out = dephasing_lindblad_evolve(&gen, &chi, 1.0, 1e-3).unwrap();
        let u = unitary_exp(&h, 1.0);
        assert!(frobenius(&(out - &u * chi * u.adjoint())) < 1e-9);
    }
}
