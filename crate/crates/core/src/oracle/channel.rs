use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{DensityMatrix, ORACLE_MAX_DIM};
use crate::algebra::{aklt_ground_space, AkltHamiltonian, ChainLayout, LocalOperator};
use crate::engine::{ChainOperator, RegisterSplit};
use crate::error::{Result, SteerError};
use crate::linalg::unitary_exp;

/// One period of `χ → Tr_A{U χ U†} ⊗ |↑…↑⟩⟨↑…↑|`, `U = e^{−iHδt}`.
///
/// Between resets the state is `ρ_S ⊗ ref`, so only the columns of `U`
/// with all ancillas up are needed: `V = U P_ref`, `ρ_S' = Tr_A(V ρ_S V†)`.
#[derive(Debug, Clone)]
pub struct ResetChannel {
    layout: ChainLayout,
    split: RegisterSplit,
    unitary: DMatrix<C64>,
    isometry: DMatrix<C64>,
}

fn guard(layout: &ChainLayout) -> Result<()> {
    if layout.dim() > ORACLE_MAX_DIM {
        return Err(SteerError::EngineLimit {
            qutrits: layout.n_sites(),
            local_dim: layout.local_dim(),
            limit: ORACLE_MAX_DIM,
        });
    }
    Ok(())
}

impl ResetChannel {
    pub fn new(layout: &ChainLayout, hamiltonian: &DMatrix<C64>, dt: f64) -> Result<Self> {
        guard(layout)?;
        if hamiltonian.nrows() != layout.dim() {
            return Err(SteerError::InvalidArgument("Hamiltonian does not match the layout".into()));
        }
        let split = RegisterSplit::new(layout);
        let unitary = unitary_exp(hamiltonian, dt);
        let cols = split.system_block(0);
        let isometry = DMatrix::from_fn(layout.dim(), cols.len(), |i, s| unitary[(i, cols[s])]);
        Ok(ResetChannel {
            layout: layout.clone(),
            split,
            unitary,
            isometry,
        })
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    /// Full-chain state just before the ancilla measurement.
    pub fn evolve_system(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        &self.isometry * rho * self.isometry.adjoint()
    }

    pub fn trace_ancillas(&self, chi: &DMatrix<C64>) -> DMatrix<C64> {
        let sd = self.split.system_dim();
        let mut rho = DMatrix::zeros(sd, sd);
        for a in 0..self.split.ancilla_dim() {
            let idx = self.split.system_block(a);
            for j in 0..sd {
                for i in 0..sd {
                    rho[(i, j)] += chi[(idx[i], idx[j])];
                }
            }
        }
        rho
    }

    pub fn attach_reference(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = self.layout.dim();
        let idx = self.split.system_block(0);
        let mut chi = DMatrix::zeros(n, n);
        for j in 0..idx.len() {
            for i in 0..idx.len() {
                chi[(idx[i], idx[j])] = rho[(i, j)];
            }
        }
        chi
    }

    /// One period on the system-only state.
    pub fn step_system(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        self.trace_ancillas(&self.evolve_system(rho))
    }

    /// One period on a general full-chain state.
    pub fn step_full(&self, chi: &DensityMatrix) -> Result<DensityMatrix> {
        if chi.dim() != self.layout.dim() {
            return Err(SteerError::InvalidArgument("state does not match the layout".into()));
        }
        let u = &self.unitary;
        let evolved = u * chi.matrix() * u.adjoint();
        let out = self.attach_reference(&self.trace_ancillas(&evolved));
        Ok(DensityMatrix::unchecked(out))
    }

    /// Iterate the channel from `rho0` (system-only), recording observables.
    pub fn trace(&self, rho0: &DMatrix<C64>, periods: usize) -> Result<ChannelTrace> {
        let obs = TraceObservables::new(&self.layout)?;
        let mut rho = rho0.clone();
        let mut out = ChannelTrace::default();
        obs.record(&mut out, &rho, None);
        for _ in 0..periods {
            let chi = self.evolve_system(&rho);
            rho = self.trace_ancillas(&chi);
            obs.record(&mut out, &rho, Some(&chi));
        }
        Ok(out)
    }
}

/// Dense observables recorded by the density-matrix traces.
pub(crate) struct TraceObservables {
    energy: DMatrix<C64>,
    ground: DMatrix<C64>,
    sz: Vec<DMatrix<C64>>,
    bonds: f64,
}

impl TraceObservables {
    pub(crate) fn new(layout: &ChainLayout) -> Result<Self> {
        let ls = layout.n_system();
        Ok(TraceObservables {
            energy: AkltHamiltonian::on_layout(&ChainLayout::system_only(ls, 3)?)?
                .operator()
                .to_dense(),
            ground: aklt_ground_space(ls)?.projector(),
            sz: sz_operators(layout)?,
            bonds: (ls - 1) as f64,
        })
    }

    /// Record the system state `rho` and, when given, the full-chain state
    /// `pre` just before the measurement.
    pub(crate) fn record(&self, out: &mut ChannelTrace, rho: &DMatrix<C64>, pre: Option<&DMatrix<C64>>) {
        out.energy.push((&self.energy * rho).trace().re / self.bonds);
        out.fidelity.push((&self.ground * rho).trace().re);
        out.trace_drift = out.trace_drift.max((rho.trace().re - 1.0).abs());
        if let Some(chi) = pre {
            out.magnetization_pre.push(self.sz.iter().map(|m| (m * chi).trace().re).collect());
        }
    }
}

fn sz_operators(layout: &ChainLayout) -> Result<Vec<DMatrix<C64>>> {
    let mut sz = DMatrix::zeros(3, 3);
    sz[(0, 0)] = C64::new(1.0, 0.0);
    sz[(2, 2)] = C64::new(-1.0, 0.0);
    (0..layout.n_sites())
        .map(|s| Ok(ChainOperator::new(layout, vec![LocalOperator::new(vec![s], sz.clone(), 3)?])?.to_dense()))
        .collect()
}

/// Observables of the channel evolution; index `n` is after `n` periods.
#[derive(Debug, Clone, Default)]
pub struct ChannelTrace {
    /// Energy per bond of the system state (identical before and after the
    /// ancilla reset).
    pub energy: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// `⟨S^z⟩` of every chain site just before the measurement; entry
    /// `n − 1` belongs to period `n`.
    pub magnetization_pre: Vec<Vec<f64>>,
    pub trace_drift: f64,
}

/// Single application on a full-chain state with a dense Hamiltonian.
pub fn reset_channel_step(
    chi: &DensityMatrix,
    layout: &ChainLayout,
    hamiltonian: &DMatrix<C64>,
    dt: f64,
) -> Result<DensityMatrix> {
    ResetChannel::new(layout, hamiltonian, dt)?.step_full(chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{mapping_set, steering_hamiltonian, MappingKind};
    use nalgebra::DVector;

    fn setup(ls: usize) -> (ChainLayout, DMatrix<C64>) {
        let layout = ChainLayout::spin_one(ls).unwrap();
        let set = mapping_set(MappingKind::M1).unwrap();
        let h = steering_hamiltonian(&layout, &set, 1.0).unwrap().operator().to_dense();
        (layout, h)
    }

    #[test]
    fn ground_state_is_a_fixed_point() {
        let (layout, h) = setup(2);
        let ch = ResetChannel::new(&layout, &h, 0.9).unwrap();
        let g = &aklt_ground_space(2).unwrap().vectors[1];
        let rho = g * g.adjoint();
        let chi = DensityMatrix::new(ch.attach_reference(&rho)).unwrap();
        let out = ch.step_full(&chi).unwrap();
        assert!(crate::linalg::frobenius(&(out.matrix() - chi.matrix())) < 1e-12);
    }

    #[test]
    fn trace_preserving_on_random_states() {
        let (layout, h) = setup(2);
        let ch = ResetChannel::new(&layout, &h, 1.3).unwrap();
        let a = DMatrix::from_fn(27, 27, |i, j| C64::new(((i * 7 + j * 3) as f64).sin(), ((i + 2 * j) as f64).cos()));
        let m = &a * a.adjoint();
        let chi = DensityMatrix::new(&m / m.trace()).unwrap();
        let out = ch.step_full(&chi).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-10);
        out.check(1e-9).unwrap();
    }

    #[test]
    fn system_and_full_steps_agree() {
        let (layout, h) = setup(3);
        let ch = ResetChannel::new(&layout, &h, 0.7).unwrap();
        let mut v = DVector::<C64>::zeros(27);
        v[0] = C64::new(1.0, 0.0);
        let rho = &v * v.adjoint();
        let via_sys = ch.attach_reference(&ch.step_system(&rho));
        let via_full = ch.step_full(&DensityMatrix::new(ch.attach_reference(&rho)).unwrap()).unwrap();
        assert!(crate::linalg::frobenius(&(via_sys - via_full.matrix())) < 1e-12);
    }

    #[test]
    fn guard_refuses_large_chains() {
        let layout = ChainLayout::spin_one(4).unwrap();
        let h = DMatrix::zeros(1, 1);
        assert!(matches!(ResetChannel::new(&layout, &h, 1.0), Err(SteerError::EngineLimit { .. })));
    }
}
