use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{coupled_pair_basis, ChainLayout, LocalOperator, SpinOneSite};
use crate::engine::{lowest_eigenvalues, ChainOperator, LinearOperator};
use crate::error::{Result, SteerError};

/// `P²(S_l + S_{l+1})` on the 9-dimensional pair space.
pub fn aklt_bond_projector() -> DMatrix<C64> {
    coupled_pair_basis().projector(2)
}

/// `½ S·S + (1/6)(S·S)² + 1/3`, the polynomial form of the bond projector.
pub fn aklt_bond_polynomial() -> DMatrix<C64> {
    let dot = SpinOneSite::new().pair_dot();
    let r = |x: f64| C64::new(x, 0.0);
    &dot * r(0.5) + &dot * &dot * r(1.0 / 6.0) + DMatrix::identity(9, 9) * r(1.0 / 3.0)
}

/// `H_AKLT = Σ_l P²_{l,l+1}` placed on the system sites of a layout.
#[derive(Debug, Clone)]
pub struct AkltHamiltonian {
    ls: usize,
    op: ChainOperator,
}

impl AkltHamiltonian {
    /// Bond projectors on the system sites of `layout` (identity on ancillas).
    pub fn on_layout(layout: &ChainLayout) -> Result<Self> {
        let ls = layout.n_system();
        if ls < 2 || layout.local_dim() != 3 {
            return Err(SteerError::InvalidArgument(format!(
                "AKLT Hamiltonian needs at least two spin-1 sites, got {ls}"
            )));
        }
        let p2 = aklt_bond_projector();
        let terms = (0..ls - 1)
            .map(|l| {
                LocalOperator::new(
                    vec![layout.system_site(l), layout.system_site(l + 1)],
                    p2.clone(),
                    3,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AkltHamiltonian {
            ls,
            op: ChainOperator::new(layout, terms)?,
        })
    }

    pub fn n_system(&self) -> usize {
        self.ls
    }

    pub fn n_bonds(&self) -> usize {
        self.ls - 1
    }

    pub fn operator(&self) -> &ChainOperator {
        &self.op
    }

    /// Energy per bond `⟨ψ|H|ψ⟩ / (L_s − 1)`.
    pub fn energy_per_bond(&self, psi: &[C64]) -> f64 {
        self.op.expectation(psi).re / self.n_bonds() as f64
    }
}

impl LinearOperator for AkltHamiltonian {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply(x, y)
    }
}

/// System-only AKLT Hamiltonian on `ls` sites.
pub fn aklt_hamiltonian(ls: usize) -> Result<AkltHamiltonian> {
    if ls < 2 {
        return Err(SteerError::InvalidArgument(format!(
            "AKLT Hamiltonian needs L_s >= 2, got {ls}"
        )));
    }
    AkltHamiltonian::on_layout(&ChainLayout::system_only(ls, 3)?)
}

/// Orthonormal basis of `ker H_AKLT` on the system-only space.
#[derive(Debug, Clone)]
pub struct GroundSpace {
    pub ls: usize,
    pub vectors: Vec<DVector<C64>>,
}

impl GroundSpace {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// `Σ_i |⟨g_i|v⟩|²` for a system-only vector.
    pub fn weight(&self, v: &[C64]) -> f64 {
        self.vectors
            .iter()
            .map(|g| g.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<C64>().norm_sqr())
            .sum()
    }

    /// Dense projector (small `ls` only).
    pub fn projector(&self) -> DMatrix<C64> {
        let n = self.vectors[0].len();
        let mut p = DMatrix::zeros(n, n);
        for g in &self.vectors {
            p += g * g.adjoint();
        }
        p
    }
}

/// Kernel of `H_AKLT(ls)`, grown one site at a time.
///
/// `H_{n+1} = H_n ⊗ I + P²_{n,n+1}` with both terms positive semidefinite, so
/// `ker H_{n+1}` is the null space of the last projector restricted to
/// `ker H_n ⊗ ℂ³`. Every step therefore works in a 12-dimensional space.
pub fn aklt_ground_space(ls: usize) -> Result<GroundSpace> {
    if ls < 2 {
        return Err(SteerError::InvalidArgument(format!(
            "ground space needs L_s >= 2, got {ls}"
        )));
    }
    ChainLayout::system_only(ls, 3)?;
    let basis = coupled_pair_basis();
    let mut kernel: Vec<DVector<C64>> = [(1, 1), (1, 0), (1, -1), (0, 0)]
        .iter()
        .map(|&(j, m)| basis.ket(j, m))
        .collect();
    let p2 = aklt_bond_projector();
    for n in 2..ls {
        let layout = ChainLayout::system_only(n + 1, 3)?;
        let last = ChainOperator::new(&layout, vec![LocalOperator::new(vec![n - 1, n], p2.clone(), 3)?])?;
        let dim = layout.dim();
        let mut candidates = Vec::with_capacity(3 * kernel.len());
        for k in &kernel {
            for d in 0..3 {
                let mut v = DVector::<C64>::zeros(dim);
                for (i, &amp) in k.iter().enumerate() {
                    v[3 * i + d] = amp;
                }
                candidates.push(v);
            }
        }
        let images: Vec<Vec<C64>> = candidates
            .iter()
            .map(|v| {
                let mut y = vec![C64::new(0.0, 0.0); dim];
                last.apply(v.as_slice(), &mut y);
                y
            })
            .collect();
        let m = candidates.len();
        let gram = DMatrix::from_fn(m, m, |i, j| crate::linalg::vdot(&images[i], &images[j]));
        let eig = gram.symmetric_eigen();
        let mut next = Vec::new();
        for (idx, &w) in eig.eigenvalues.iter().enumerate() {
            if w.abs() < 1e-10 {
                let coeff = eig.eigenvectors.column(idx);
                let mut v = DVector::<C64>::zeros(dim);
                for (c, cand) in coeff.iter().zip(&candidates) {
                    v += cand * *c;
                }
                let nv = v.norm();
                next.push(v / C64::new(nv, 0.0));
            }
        }
        kernel = next;
    }
    if kernel.len() != 4 {
        return Err(SteerError::ConstraintViolation {
            condition: "AKLT kernel dimension",
            detail: format!("expected 4, found {}", kernel.len()),
        });
    }
    Ok(GroundSpace { ls, vectors: kernel })
}

/// The four valence-bond states `Σ (A^{s₁}…A^{s_L})_{ab} |s₁…s_L⟩`,
/// `a, b ∈ {↑, ↓}` edge labels, each normalized. They span the ground
/// space but are not mutually orthogonal at finite length.
pub fn aklt_mps_states(ls: usize) -> Result<Vec<DVector<C64>>> {
    if ls < 2 {
        return Err(SteerError::InvalidArgument("need L_s >= 2".into()));
    }
    ChainLayout::system_only(ls, 3)?;
    let s = (2.0f64 / 3.0).sqrt();
    let t = (1.0f64 / 3.0).sqrt();
    // A^↑ = √(2/3) σ⁺, A^0 = −√(1/3) σ^z, A^↓ = −√(2/3) σ⁻
    let a: [[[f64; 2]; 2]; 3] = [
        [[0.0, s], [0.0, 0.0]],
        [[-t, 0.0], [0.0, t]],
        [[0.0, 0.0], [-s, 0.0]],
    ];
    let dim = 3usize.pow(ls as u32);
    let mut out = Vec::with_capacity(4);
    for left in 0..2 {
        for right in 0..2 {
            let mut v = DVector::<C64>::zeros(dim);
            for (idx, amp) in v.iter_mut().enumerate() {
                let mut row = [0.0f64; 2];
                row[left] = 1.0;
                for site in 0..ls {
                    let digit = (idx / 3usize.pow((ls - 1 - site) as u32)) % 3;
                    let m = &a[digit];
                    row = [
                        row[0] * m[0][0] + row[1] * m[1][0],
                        row[0] * m[0][1] + row[1] * m[1][1],
                    ];
                }
                *amp = C64::new(row[right], 0.0);
            }
            let n = v.norm();
            out.push(v / C64::new(n, 0.0));
        }
    }
    Ok(out)
}

/// Lowest nonzero eigenvalue of `H_AKLT(ls)` by Lanczos iteration with the
/// ground space deflated.
pub fn spectral_gap(ls: usize) -> Result<f64> {
    let h = aklt_hamiltonian(ls)?;
    let ground = aklt_ground_space(ls)?;
    let deflate: Vec<Vec<C64>> = ground.vectors.iter().map(|g| g.as_slice().to_vec()).collect();
    let w = lowest_eigenvalues(&h, &deflate, 1, 1e-10)?;
    Ok(w[0])
}
