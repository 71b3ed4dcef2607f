use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::algebra::{
    aklt_ground_space, steering_hamiltonian, AkltHamiltonian, ChainLayout, GroundSpace, LocalOperator,
    MappingOperatorSet,
};
use crate::engine::{ChainOperator, LinearOperator, RegisterSplit};
use crate::error::Result;

/// Immutable per-ensemble tables shared by every trajectory worker.
#[derive(Debug, Clone)]
pub struct SteeringContext {
    layout: ChainLayout,
    hamiltonian: ChainOperator,
    energy: ChainOperator,
    energy_scale: f64,
    ground: GroundSpace,
    split: RegisterSplit,
    central_bond: usize,
    magnetization: Vec<ChainOperator>,
}

impl SteeringContext {
    /// Spin-1 chain with `ls` system sites steered by `set` at coupling `J = 1`.
    pub fn aklt(ls: usize, set: &MappingOperatorSet) -> Result<Self> {
        let layout = ChainLayout::spin_one(ls)?;
        let h = steering_hamiltonian(&layout, set, 1.0)?;
        let aklt = AkltHamiltonian::on_layout(&layout)?;
        let ground = aklt_ground_space(ls)?;
        // left block s₁ … s_k a_k, k = ⌊L_s/2⌋
        let central_bond = 2 * (ls / 2);
        Self::assemble(
            layout,
            h.operator().clone(),
            aklt.operator().clone(),
            (ls - 1) as f64,
            ground,
            central_bond,
        )
    }

    /// `n` independent qubit pairs with `M = |↑⟩⟨↓|` on every system qubit,
    /// `D† = |↓⟩⟨↑|` on its ancilla. "Energy" counts down spins per site and
    /// the target is the all-up system state.
    pub fn commuting_toy(n: usize) -> Result<Self> {
        let layout = ChainLayout::qubit_pairs(n)?;
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        // ⟨s a|X|t b⟩ = M[s,t] D†[a,b]; nonzero for (s,a)=(↑,↓), (t,b)=(↓,↑)
        let mut x = nalgebra::DMatrix::from_element(4, 4, z);
        x[(1, 2)] = one;
        let term = &x + x.adjoint();
        let mut down = nalgebra::DMatrix::from_element(2, 2, z);
        down[(1, 1)] = one;
        let mut h_terms = Vec::new();
        let mut e_terms = Vec::new();
        for l in 0..n {
            let (s, a) = (layout.system_site(l), layout.ancilla_site(l));
            h_terms.push(LocalOperator::new(vec![s, a], term.clone(), 2)?);
            e_terms.push(LocalOperator::new(vec![s], down.clone(), 2)?);
        }
        let h = ChainOperator::new(&layout, h_terms)?;
        let e = ChainOperator::new(&layout, e_terms)?;
        let mut target = DVector::zeros(layout.system_dim());
        target[0] = one;
        let ground = GroundSpace { ls: n, vectors: vec![target] };
        let bond = 2 * (n / 2).max(1);
        let bond = bond.min(layout.n_sites() - 1).max(1);
        Self::assemble(layout, h, e, n as f64, ground, bond)
    }

    fn assemble(
        layout: ChainLayout,
        hamiltonian: ChainOperator,
        energy: ChainOperator,
        energy_scale: f64,
        ground: GroundSpace,
        central_bond: usize,
    ) -> Result<Self> {
        let d = layout.local_dim();
        let mut sz = nalgebra::DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            sz[(k, k)] = C64::new(1.0 - 2.0 * k as f64 / (d - 1) as f64, 0.0);
        }
        let magnetization = (0..layout.n_sites())
            .map(|site| ChainOperator::new(&layout, vec![LocalOperator::new(vec![site], sz.clone(), d)?]))
            .collect::<Result<Vec<_>>>()?;
        Ok(SteeringContext {
            split: RegisterSplit::new(&layout),
            layout,
            hamiltonian,
            energy,
            energy_scale,
            ground,
            central_bond,
            magnetization,
        })
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    pub fn hamiltonian(&self) -> &ChainOperator {
        &self.hamiltonian
    }

    pub fn ground(&self) -> &GroundSpace {
        &self.ground
    }

    pub fn split(&self) -> &RegisterSplit {
        &self.split
    }

    pub fn central_bond(&self) -> usize {
        self.central_bond
    }

    /// Energy per bond `⟨H_AKLT⟩/(L_s − 1)` (down-spin density for the toy).
    pub fn energy_per_bond(&self, amps: &[C64]) -> f64 {
        self.energy.expectation(amps).re / self.energy_scale
    }

    pub fn energy_operator(&self) -> &ChainOperator {
        &self.energy
    }

    pub fn energy_scale(&self) -> f64 {
        self.energy_scale
    }

    /// `⟨S^z⟩` of every site (qubits: `⟨σ^z⟩`).
    pub fn magnetizations(&self, amps: &[C64]) -> Vec<f64> {
        self.magnetization.iter().map(|m| m.expectation(amps).re).collect()
    }

    /// Weight of the state on `ground ⊗ (any ancilla configuration)`.
    pub fn fidelity(&self, amps: &[C64]) -> f64 {
        let mut f = 0.0;
        let mut block = vec![C64::new(0.0, 0.0); self.split.system_dim()];
        for a in 0..self.split.ancilla_dim() {
            let idx = self.split.system_block(a);
            let mut w = 0.0;
            for (b, &i) in block.iter_mut().zip(idx) {
                *b = amps[i];
                w += b.norm_sqr();
            }
            if w < 1e-300 {
                continue;
            }
            f += self.ground.weight(&block);
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}
