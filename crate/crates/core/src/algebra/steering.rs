use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{ancilla_operators, ChainLayout, GroundSpace, LocalOperator, MappingOperatorSet};
use crate::engine::{ChainOperator, LinearOperator};
use crate::error::{Result, SteerError};
use crate::linalg::hermiticity_defect;

/// `H_SA = J Σ_{l,α} (D†_{l,α} ⊗ M_{l,α} + h.c.)` with one three-site term
/// on `(s_l, a_l, s_{l+1})` per bond.
#[derive(Debug, Clone)]
pub struct SteeringHamiltonian {
    coupling: f64,
    bond_term: DMatrix<C64>,
    op: ChainOperator,
}

/// 27×27 bond term `Σ_α D_α† ⊗ M_α` on (s, a, s') with s most significant.
fn bond_excitation(set: &MappingOperatorSet) -> DMatrix<C64> {
    let anc = ancilla_operators();
    let mut x = DMatrix::zeros(27, 27);
    for (d, m) in anc.raising.iter().zip(set.matrices()) {
        for s in 0..3 {
            for sp in 0..3 {
                for t in 0..3 {
                    for tp in 0..3 {
                        let mv = m[(3 * s + sp, 3 * t + tp)];
                        if mv == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for a in 0..3 {
                            for b in 0..3 {
                                let dv = d[(a, b)];
                                if dv != C64::new(0.0, 0.0) {
                                    x[(9 * s + 3 * a + sp, 9 * t + 3 * b + tp)] += dv * mv;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    x
}

impl SteeringHamiltonian {
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn layout(&self) -> &ChainLayout {
        self.op.layout()
    }

    pub fn operator(&self) -> &ChainOperator {
        &self.op
    }

    /// The Hermitian three-site term placed on every bond.
    pub fn bond_term(&self) -> &DMatrix<C64> {
        &self.bond_term
    }

    /// `max_i ‖H (|g_i⟩ ⊗ |↑…↑⟩_A)‖` over a ground-space basis.
    pub fn fixed_point_residual(&self, ground: &GroundSpace) -> f64 {
        let layout = self.layout();
        let mut worst: f64 = 0.0;
        for g in &ground.vectors {
            let mut psi = vec![C64::new(0.0, 0.0); layout.dim()];
            for (s, &amp) in g.iter().enumerate() {
                psi[layout.join_index(s, 0)] = amp;
            }
            let mut y = vec![C64::new(0.0, 0.0); psi.len()];
            self.op.apply(&psi, &mut y);
            worst = worst.max(crate::linalg::norm(&y));
        }
        worst
    }
}

impl LinearOperator for SteeringHamiltonian {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.op.apply(x, y)
    }
}

pub fn steering_hamiltonian(
    layout: &ChainLayout,
    set: &MappingOperatorSet,
    coupling: f64,
) -> Result<SteeringHamiltonian> {
    if layout.local_dim() != 3 || layout.n_ancilla() + 1 != layout.n_system() {
        return Err(SteerError::InvalidArgument(
            "steering needs an interleaved spin-1 layout".into(),
        ));
    }
    if set.len() > 2 {
        return Err(SteerError::InvalidArgument(format!(
            "one ancilla qutrit carries at most two mapping operators, got {}",
            set.len()
        )));
    }
    let x = bond_excitation(set);
    let term = (&x + x.adjoint()) * C64::new(coupling, 0.0);
    let defect = hermiticity_defect(&term);
    if defect > 1e-12 {
        return Err(SteerError::ConstraintViolation {
            condition: "Hermiticity",
            detail: format!("bond term defect {defect:.3e}"),
        });
    }
    let terms = (0..layout.n_ancilla())
        .map(|l| {
            LocalOperator::new(
                vec![layout.system_site(l), layout.ancilla_site(l), layout.system_site(l + 1)],
                term.clone(),
                3,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SteeringHamiltonian {
        coupling,
        bond_term: term,
        op: ChainOperator::new(layout, terms)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{aklt_ground_space, mapping_set, MappingKind};
    use crate::linalg::kron;

    #[test]
    fn hermitian_and_fixes_the_target() {
        for kind in [MappingKind::M1, MappingKind::M2(0.404), MappingKind::M3] {
            let set = mapping_set(kind).unwrap();
            for ls in 2..=4 {
                let layout = ChainLayout::spin_one(ls).unwrap();
                let h = steering_hamiltonian(&layout, &set, 1.0).unwrap();
                let g = aklt_ground_space(ls).unwrap();
                assert!(h.fixed_point_residual(&g) < 1e-10);
                if ls <= 3 {
                    assert!(hermiticity_defect(&h.operator().to_dense()) < 1e-12);
                }
            }
        }
    }

    /// Brute-force 27-dimensional product against the explicit Kronecker form.
    #[test]
    fn two_site_chain_matches_kronecker_construction() {
        let set = mapping_set(MappingKind::M1).unwrap();
        let layout = ChainLayout::spin_one(2).unwrap();
        let h = steering_hamiltonian(&layout, &set, 1.0).unwrap().operator().to_dense();
        // reorder (s, a, s') <- (a) ⊗ (s s')
        let anc = ancilla_operators();
        let mut x_as = DMatrix::<C64>::zeros(27, 27);
        for (d, m) in anc.raising.iter().zip(set.matrices()) {
            x_as += kron(d, m);
        }
        let perm = |i: usize| {
            let (s, a, sp) = (i / 9, (i / 3) % 3, i % 3);
            9 * a + 3 * s + sp
        };
        let x = DMatrix::from_fn(27, 27, |i, j| x_as[(perm(i), perm(j))]);
        let expect = &x + x.adjoint();
        assert!(crate::linalg::frobenius(&(h.clone() - expect)) < 1e-14);
        let mut v = nalgebra::DVector::<C64>::zeros(27);
        v[0] = C64::new(1.0, 0.0);
        let hv = &h * &v;
        assert!((hv.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_three_operator_sets() {
        let set = mapping_set(MappingKind::M1).unwrap();
        let mut c = set.coefficients().to_vec();
        c.push(c[0].clone());
        let three = MappingOperatorSet::from_coefficients(MappingKind::Custom, c, true).unwrap();
        let layout = ChainLayout::spin_one(2).unwrap();
        assert!(steering_hamiltonian(&layout, &three, 1.0).is_err());
    }
}
