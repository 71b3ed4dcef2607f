use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{aklt_bond_projector, coupled_pair_basis, M3_ALPHA};
use crate::error::{Result, SteerError};
use crate::linalg::frobenius;

/// Row labels `|J,m⟩` of a coefficient matrix (spin-1 and spin-0 targets).
pub const DEST_LABELS: [(i32, i32); 4] = [(1, 1), (1, 0), (1, -1), (0, 0)];
/// Column labels `⟨2,m|` of a coefficient matrix (spin-2 sources).
pub const SOURCE_LABELS: [(i32, i32); 5] = [(2, 2), (2, 1), (2, 0), (2, -1), (2, -2)];

#[derive(Debug, Clone, PartialEq)]
pub enum MappingKind {
    M1,
    M2(f64),
    M3,
    Custom,
}

impl fmt::Display for MappingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingKind::M1 => write!(f, "M1"),
            MappingKind::M2(a) => write!(f, "M2({a})"),
            MappingKind::M3 => write!(f, "M3"),
            MappingKind::Custom => write!(f, "custom"),
        }
    }
}

/// Two-site mapping operators `M_α = Σ C_α[r,c] |dest_r⟩⟨src_c|` from the
/// spin-2 subspace of a bond into its spin-0/1 subspace.
#[derive(Debug, Clone)]
pub struct MappingOperatorSet {
    kind: MappingKind,
    coefficients: Vec<DMatrix<C64>>,
    matrices: Vec<DMatrix<C64>>,
    sum_waived: bool,
}

fn lift(coeff: &DMatrix<C64>) -> DMatrix<C64> {
    let basis = coupled_pair_basis();
    let dest = DMatrix::from_fn(9, 4, |i, r| {
        let (j, m) = DEST_LABELS[r];
        basis.matrix[(i, basis.column(j, m).unwrap())]
    });
    let src = DMatrix::from_fn(9, 5, |i, c| {
        let (j, m) = SOURCE_LABELS[c];
        basis.matrix[(i, basis.column(j, m).unwrap())]
    });
    dest * coeff * src.adjoint()
}

fn label_row(j: i32, m: i32) -> usize {
    DEST_LABELS.iter().position(|&l| l == (j, m)).unwrap()
}

fn label_col(m: i32) -> usize {
    SOURCE_LABELS.iter().position(|&l| l == (2, m)).unwrap()
}

fn sparse(entries: &[((i32, i32), i32, f64)]) -> DMatrix<C64> {
    let mut c = DMatrix::zeros(4, 5);
    for &((j, m), m2, v) in entries {
        c[(label_row(j, m), label_col(m2))] = C64::new(v, 0.0);
    }
    c
}

impl MappingOperatorSet {
    /// Validate and lift coefficient matrices. With `waive_sum` the
    /// Hamiltonian-sum constraint `Σ C†C = I₅` is not enforced (flagged).
    pub fn from_coefficients(
        kind: MappingKind,
        coefficients: Vec<DMatrix<C64>>,
        waive_sum: bool,
    ) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(SteerError::InvalidArgument("empty mapping set".into()));
        }
        for (a, c) in coefficients.iter().enumerate() {
            if c.shape() != (4, 5) {
                return Err(SteerError::ConstraintViolation {
                    condition: "coefficient shape",
                    detail: format!("operator {} is {:?}, expected 4x5", a + 1, c.shape()),
                });
            }
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(SteerError::ConstraintViolation {
                    condition: "finite coefficients",
                    detail: format!("operator {} has non-finite entries", a + 1),
                });
            }
        }
        let set = MappingOperatorSet {
            kind,
            matrices: coefficients.iter().map(lift).collect(),
            coefficients,
            sum_waived: waive_sum,
        };
        if !waive_sum {
            let v = set.sum_violation();
            if v > 1e-10 {
                return Err(SteerError::ConstraintViolation {
                    condition: "Hamiltonian-sum constraint",
                    detail: format!("|sum C^dag C - I5|_F = {v:.3e}"),
                });
            }
        }
        Ok(set)
    }

    pub fn kind(&self) -> &MappingKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[DMatrix<C64>] {
        &self.coefficients
    }

    /// 9×9 product-basis matrices (left site most significant).
    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    pub fn sum_waived(&self) -> bool {
        self.sum_waived
    }

    /// `‖Σ C†C − I₅‖_F`.
    pub fn sum_violation(&self) -> f64 {
        let mut s = -DMatrix::<C64>::identity(5, 5);
        for c in &self.coefficients {
            s += c.adjoint() * c;
        }
        frobenius(&s)
    }

    /// `‖Σ M†M − P²‖_F` in the product basis.
    pub fn projector_residual(&self) -> f64 {
        let mut s = -aklt_bond_projector();
        for m in &self.matrices {
            s += m.adjoint() * m;
        }
        frobenius(&s)
    }

    /// `max_α ‖M_α (P⁰ + P¹)‖_F`.
    pub fn low_spin_leakage(&self) -> f64 {
        let basis = coupled_pair_basis();
        let low = basis.projector(0) + basis.projector(1);
        self.matrices
            .iter()
            .map(|m| frobenius(&(m * &low)))
            .fold(0.0, f64::max)
    }

    /// Every invariant that applies to this set, as `(name, residual)` pairs.
    pub fn invariant_report(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("spin-(0,1) annihilation", self.low_spin_leakage())];
        if !self.sum_waived {
            v.push(("Hamiltonian-sum constraint", self.projector_residual()));
        }
        v
    }

    /// Fails with the name of the first invariant exceeding `1e-10`.
    pub fn validate(&self) -> Result<()> {
        for (name, r) in self.invariant_report() {
            if r > 1e-10 {
                return Err(SteerError::ConstraintViolation {
                    condition: name,
                    detail: format!("residual {r:.3e}"),
                });
            }
        }
        Ok(())
    }
}

/// Shipped mapping sets. `alpha` is used by `M2` only.
pub fn mapping_set(kind: MappingKind) -> Result<MappingOperatorSet> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let coeffs = match kind {
        MappingKind::M1 => vec![
            sparse(&[((1, 1), 2, 1.0), ((1, 0), 0, h), ((1, -1), -2, 1.0)]),
            sparse(&[((1, 1), 1, 1.0), ((1, 0), 0, h), ((1, -1), -1, 1.0)]),
        ],
        MappingKind::M2(alpha) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(SteerError::InvalidArgument(format!(
                    "M2 requires alpha in [0, 1], got {alpha}"
                )));
            }
            vec![
                sparse(&[((1, 1), 2, 1.0), ((0, 0), -1, alpha), ((1, -1), -2, 1.0)]),
                sparse(&[
                    ((1, 1), 1, 1.0),
                    ((1, -1), -1, (1.0 - alpha * alpha).sqrt()),
                    ((1, 0), 0, 1.0),
                ]),
            ]
        }
        MappingKind::M3 => {
            let a = M3_ALPHA;
            let b = (1.0 - a * a).sqrt();
            vec![
                sparse(&[((1, 1), 2, 1.0), ((1, 0), 1, a), ((0, 0), 1, b), ((1, -1), 0, h)]),
                sparse(&[((1, -1), -2, 1.0), ((1, 0), -1, a), ((0, 0), -1, b), ((1, 1), 0, h)]),
            ]
        }
        MappingKind::Custom => {
            return Err(SteerError::InvalidArgument(
                "custom sets are built with MappingOperatorSet::from_coefficients".into(),
            ))
        }
    };
    MappingOperatorSet::from_coefficients(kind, coeffs, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_sets_sum_to_projector() {
        let mut kinds = vec![MappingKind::M1, MappingKind::M3];
        for i in 0..=10 {
            kinds.push(MappingKind::M2(i as f64 / 10.0));
        }
        kinds.push(MappingKind::M2(0.404));
        for k in kinds {
            let s = mapping_set(k.clone()).unwrap();
            assert!(s.projector_residual() < 1e-12, "{k}");
            assert!(s.low_spin_leakage() < 1e-12, "{k}");
            s.validate().unwrap();
        }
    }

    #[test]
    fn m1_entries_match_the_listed_table() {
        let s = mapping_set(MappingKind::M1).unwrap();
        let c = &s.coefficients()[0];
        assert_eq!(c[(0, 0)].re, 1.0);
        assert!((c[(1, 2)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(c[(2, 4)].re, 1.0);
        assert_eq!(c.iter().filter(|z| z.norm() > 0.0).count(), 3);
        let c = &s.coefficients()[1];
        assert_eq!(c[(0, 1)].re, 1.0);
        assert_eq!(c[(2, 3)].re, 1.0);
    }

    #[test]
    fn m2_at_alpha_one_moves_weight_to_singlet() {
        let s = mapping_set(MappingKind::M2(1.0)).unwrap();
        assert_eq!(s.coefficients()[0][(3, 3)].re, 1.0);
        assert_eq!(s.coefficients()[1][(2, 3)].norm(), 0.0);
    }

    #[test]
    fn rejects_alpha_out_of_range() {
        assert!(mapping_set(MappingKind::M2(1.2)).is_err());
    }

    #[test]
    fn constraint_violation_names_the_condition() {
        let c = DMatrix::from_element(4, 5, C64::new(0.3, 0.0));
        let err = MappingOperatorSet::from_coefficients(MappingKind::Custom, vec![c.clone(), c.clone()], false)
            .unwrap_err();
        assert!(err.to_string().contains("Hamiltonian-sum constraint"));
        let waived = MappingOperatorSet::from_coefficients(MappingKind::Custom, vec![c.clone(), c], true).unwrap();
        assert!(waived.sum_waived());
        assert!(waived.sum_violation() > 0.1);
        assert!(waived.validate().is_ok());
    }
}
