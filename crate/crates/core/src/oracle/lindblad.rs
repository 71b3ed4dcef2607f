use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::ORACLE_MAX_DIM;
use crate::algebra::{aklt_hamiltonian, MappingOperatorSet};
use crate::error::{Result, SteerError};
use crate::linalg::{embed, expm, frobenius, identity, kron};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LindbladForm {
    /// `Σ (L ρ L† − ½{L†L, ρ})`.
    Jump,
    /// `Σ L ρ L† − ½{H_AKLT, ρ}` (valid when `Σ M†M = P²`).
    Split,
}

#[derive(Debug, Clone, Copy)]
pub struct LindbladOptions {
    /// Step size; `None` means `1e-3 / rate`.
    pub step: Option<f64>,
    pub form: LindbladForm,
    /// Largest tolerated trace drift per step before renormalization.
    pub max_drift: f64,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        LindbladOptions {
            step: None,
            form: LindbladForm::Jump,
            max_drift: 1e-6,
        }
    }
}

/// `rate · Σ_{l,α} D[M_{l,α}]` on the system-only chain.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    ls: usize,
    rate: f64,
    jumps: Vec<DMatrix<C64>>,
    jump_dag: Vec<DMatrix<C64>>,
    loss: DMatrix<C64>,
    hamiltonian: DMatrix<C64>,
}

impl LindbladGenerator {
    pub fn new(ls: usize, set: &MappingOperatorSet, rate: f64) -> Result<Self> {
        let dim = 3usize.pow(ls as u32);
        if dim > ORACLE_MAX_DIM || ls < 2 {
            return Err(SteerError::InvalidArgument(format!(
                "dense Lindblad integration supports 2 <= L_s <= 5 system sites, got {ls}"
            )));
        }
        let mut jumps = Vec::new();
        for l in 0..ls - 1 {
            for m in set.matrices() {
                jumps.push(embed(m, 3usize.pow(l as u32), 3usize.pow((ls - l - 2) as u32)));
            }
        }
        let jump_dag: Vec<_> = jumps.iter().map(|j| j.adjoint()).collect();
        let mut loss = DMatrix::zeros(dim, dim);
        for (j, jd) in jumps.iter().zip(&jump_dag) {
            loss += jd * j;
        }
        Ok(LindbladGenerator {
            ls,
            rate,
            jumps,
            jump_dag,
            loss,
            hamiltonian: aklt_hamiltonian(ls)?.operator().to_dense(),
        })
    }

    pub fn ls(&self) -> usize {
        self.ls
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn dim(&self) -> usize {
        self.loss.nrows()
    }

    pub fn jumps(&self) -> &[DMatrix<C64>] {
        &self.jumps
    }

    pub fn aklt(&self) -> &DMatrix<C64> {
        &self.hamiltonian
    }

    pub fn apply(&self, rho: &DMatrix<C64>, form: LindbladForm) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(rho.nrows(), rho.ncols());
        for (j, jd) in self.jumps.iter().zip(&self.jump_dag) {
            out += j * rho * jd;
        }
        let k = match form {
            LindbladForm::Jump => &self.loss,
            LindbladForm::Split => &self.hamiltonian,
        };
        out -= (k * rho + rho * k) * C64::new(0.5, 0.0);
        out * C64::new(self.rate, 0.0)
    }

    /// Column-major vectorized generator (`dim² × dim²`).
    pub fn superoperator(&self, form: LindbladForm) -> DMatrix<C64> {
        let n = self.dim();
        let id = identity(n);
        let k = match form {
            LindbladForm::Jump => &self.loss,
            LindbladForm::Split => &self.hamiltonian,
        };
        let mut l = -(kron(&id, k) + kron(&k.transpose(), &id)) * C64::new(0.5, 0.0);
        for j in &self.jumps {
            l += kron(&j.conjugate(), j);
        }
        l * C64::new(self.rate, 0.0)
    }

    /// `ρ(T)` via the matrix exponential of the vectorized generator.
    pub fn exact_evolve(&self, rho: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
        let n = self.dim();
        let prop = expm(&(self.superoperator(LindbladForm::Jump) * C64::new(t, 0.0)));
        let v = prop * DVector::from_column_slice(rho.as_slice());
        DMatrix::from_column_slice(n, n, v.as_slice())
    }

    /// Classical RK4 step.
    pub fn rk4_step(&self, rho: &DMatrix<C64>, h: f64, form: LindbladForm) -> DMatrix<C64> {
        let hc = C64::new(h, 0.0);
        let half = C64::new(h / 2.0, 0.0);
        let k1 = self.apply(rho, form);
        let k2 = self.apply(&(rho + &k1 * half), form);
        let k3 = self.apply(&(rho + &k2 * half), form);
        let k4 = self.apply(&(rho + &k3 * hc), form);
        rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
    }

    /// `‖L_jump(ρ) − L_split(ρ)‖_F`.
    pub fn form_mismatch(&self, rho: &DMatrix<C64>) -> f64 {
        frobenius(&(self.apply(rho, LindbladForm::Jump) - self.apply(rho, LindbladForm::Split)))
    }
}

/// Integrate `∂_t ρ = L(ρ)` to time `t` with fixed RK4 steps (the last step
/// is shortened to land on `t`). Hermiticity and trace are restored after
/// every step; the largest removed drift is returned with the state.
pub fn lindblad_evolve(
    gen: &LindbladGenerator,
    rho: &DMatrix<C64>,
    t: f64,
    opts: &LindbladOptions,
) -> Result<(DMatrix<C64>, f64)> {
    if !(t >= 0.0) {
        return Err(SteerError::InvalidArgument(format!("integration time must be >= 0, got {t}")));
    }
    let h = opts.step.unwrap_or(1e-3 / gen.rate.abs().max(1e-300));
    let steps = (t / h).ceil() as usize;
    let mut rho = rho.clone();
    let mut max_drift: f64 = 0.0;
    for k in 0..steps {
        let hk = if k + 1 == steps { t - h * k as f64 } else { h };
        if hk <= 0.0 {
            break;
        }
        let next = gen.rk4_step(&rho, hk, opts.form);
        let herm = (&next + next.adjoint()) * C64::new(0.5, 0.0);
        let tr = herm.trace().re;
        let drift = (tr - rho.trace().re).abs();
        if drift > opts.max_drift || !tr.is_finite() {
            return Err(SteerError::Integration {
                drift,
                limit: opts.max_drift,
            });
        }
        max_drift = max_drift.max(drift);
        rho = herm / C64::new(tr, 0.0);
    }
    if max_drift > 1e-12 {
        log::debug!("Lindblad integration trace drift up to {max_drift:.3e}");
    }
    Ok((rho, max_drift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{aklt_ground_space, mapping_set, MappingKind};

    fn random_rho(n: usize) -> DMatrix<C64> {
        let a = DMatrix::from_fn(n, n, |i, j| C64::new(((3 * i + j) as f64).sin(), ((i * j + 1) as f64).cos()));
        let m = &a * a.adjoint();
        &m / m.trace()
    }

    #[test]
    fn jump_and_split_forms_coincide() {
        for kind in [MappingKind::M1, MappingKind::M2(0.3), MappingKind::M3] {
            let g = LindbladGenerator::new(3, &mapping_set(kind).unwrap(), 1.0).unwrap();
            assert!(g.form_mismatch(&random_rho(27)) < 1e-12);
        }
    }

    #[test]
    fn ground_mixture_is_stationary() {
        let g = LindbladGenerator::new(3, &mapping_set(MappingKind::M1).unwrap(), 1.0).unwrap();
        let p = aklt_ground_space(3).unwrap().projector() * C64::new(0.25, 0.0);
        let (out, _) = lindblad_evolve(&g, &p, 2.0, &LindbladOptions::default()).unwrap();
        assert!(frobenius(&(out - p)) < 1e-8);
    }

    #[test]
    fn rk4_matches_vectorized_exponential() {
        let g = LindbladGenerator::new(2, &mapping_set(MappingKind::M3).unwrap(), 0.7).unwrap();
        let rho = random_rho(9);
        let (rk, _) = lindblad_evolve(&g, &rho, 3.0, &LindbladOptions::default()).unwrap();
        let ex = g.exact_evolve(&rho, 3.0);
        assert!(frobenius(&(rk - ex)) < 1e-10);
    }
}
