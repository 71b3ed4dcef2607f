use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::algebra::{coupled_pair_basis, mapping_set, MappingKind, MappingOperatorSet, DEST_LABELS, SOURCE_LABELS};
use crate::error::Result;
use crate::linalg::{commutator, frobenius, identity, kron, spectral_norm};

/// How each commutator is measured before summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormConvention {
    /// `‖X‖_F²` — reproduces the published values (default).
    #[default]
    FrobeniusSquared,
    /// `‖X‖_F`.
    Frobenius,
    /// Largest singular value.
    Spectral,
}

impl fmt::Display for NormConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormConvention::FrobeniusSquared => "frobenius-squared",
            NormConvention::Frobenius => "frobenius",
            NormConvention::Spectral => "spectral",
        })
    }
}

impl std::str::FromStr for NormConvention {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "frobenius-squared" | "fro2" => Ok(NormConvention::FrobeniusSquared),
            "frobenius" | "fro" => Ok(NormConvention::Frobenius),
            "spectral" | "2" => Ok(NormConvention::Spectral),
            _ => Err(format!("unknown norm convention '{s}'")),
        }
    }
}

/// One commutator `[M_α ⊗ I, I ⊗ N_β]` or `[M_α ⊗ I, I ⊗ N_β†]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommTerm {
    pub alpha: usize,
    pub beta: usize,
    pub adjoint: bool,
    pub frobenius: f64,
    pub spectral: f64,
}

impl CommTerm {
    pub fn value(&self, c: NormConvention) -> f64 {
        match c {
            NormConvention::FrobeniusSquared => self.frobenius * self.frobenius,
            NormConvention::Frobenius => self.frobenius,
            NormConvention::Spectral => self.spectral,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutationReport {
    pub convention: NormConvention,
    pub terms: Vec<CommTerm>,
    /// Weight applied to every term (0.5 for the even/odd average).
    pub weight: f64,
    /// Weighted sum of the terms under `convention`.
    pub total: f64,
    pub total_frobenius_squared: f64,
    pub total_frobenius: f64,
    pub total_spectral: f64,
}

impl CommutationReport {
    fn from_terms(terms: Vec<CommTerm>, convention: NormConvention, weight: f64) -> Self {
        let sum = |c: NormConvention| weight * terms.iter().map(|t| t.value(c)).sum::<f64>();
        CommutationReport {
            convention,
            weight,
            total: sum(convention),
            total_frobenius_squared: sum(NormConvention::FrobeniusSquared),
            total_frobenius: sum(NormConvention::Frobenius),
            total_spectral: sum(NormConvention::Spectral),
            terms,
        }
    }
}

fn terms_between(left: &[DMatrix<C64>], right: &[DMatrix<C64>]) -> Vec<CommTerm> {
    let id = identity(3);
    let mut out = Vec::new();
    for (a, m) in left.iter().enumerate() {
        let am = kron(m, &id);
        for (b, n) in right.iter().enumerate().skip(a) {
            for adjoint in [false, true] {
                let nb = if adjoint { n.adjoint() } else { n.clone() };
                let c = commutator(&am, &kron(&id, &nb));
                out.push(CommTerm {
                    alpha: a,
                    beta: b,
                    adjoint,
                    frobenius: frobenius(&c),
                    spectral: spectral_norm(&c),
                });
            }
        }
    }
    out
}

/// `Σ_{α ≤ α'} ‖[M_α⊗I, I⊗M_α']‖ + ‖[M_α⊗I, I⊗M_α'†]‖` on three sites,
/// i.e. six terms for a two-operator set.
pub fn comm_measure(set: &MappingOperatorSet, convention: NormConvention) -> CommutationReport {
    comm_of_matrices(set.matrices(), set.matrices(), convention)
}

/// Same as [`comm_measure`] for raw 9×9 operators on the left and right
/// bond of a three-site window.
pub fn comm_of_matrices(
    left: &[DMatrix<C64>],
    right: &[DMatrix<C64>],
    convention: NormConvention,
) -> CommutationReport {
    CommutationReport::from_terms(terms_between(left, right), convention, 1.0)
}

/// Alternating assignment: `even` on one bond, `odd` on the next. Both
/// orders occur along the chain, so the measure is the mean of the
/// `(even, odd)` and `(odd, even)` six-term sums. Identical sets reduce to
/// [`comm_measure`].
pub fn even_odd_variant(
    even: &MappingOperatorSet,
    odd: &MappingOperatorSet,
    convention: NormConvention,
) -> CommutationReport {
    let mut terms = terms_between(even.matrices(), odd.matrices());
    terms.extend(terms_between(odd.matrices(), even.matrices()));
    CommutationReport::from_terms(terms, convention, 0.5)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweep {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub argmin: f64,
    pub min: f64,
}

impl AlphaSweep {
    /// Strictly decreasing up to the minimum, strictly increasing after it.
    pub fn is_u_shaped(&self) -> bool {
        let k = self.values.iter().position(|&v| v == self.min).unwrap();
        self.values[..=k].windows(2).all(|w| w[1] < w[0]) && self.values[k..].windows(2).all(|w| w[1] > w[0])
    }
}

/// `comm(M2(α))` over a grid.
pub fn alpha_sweep(alphas: &[f64], convention: NormConvention) -> Result<AlphaSweep> {
    let mut values = Vec::with_capacity(alphas.len());
    for &a in alphas {
        values.push(comm_measure(&mapping_set(MappingKind::M2(a))?, convention).total);
    }
    let (k, &min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or_else(|| crate::error::SteerError::InvalidArgument("empty alpha grid".into()))?;
    Ok(AlphaSweep {
        alphas: alphas.to_vec(),
        values,
        argmin: alphas[k],
        min,
    })
}

type Mat9 = [[f64; 9]; 9];

/// Real 9×9 mapping matrices built from stacked coefficient blocks, with a
/// contraction-based commutator norm that avoids 27×27 products. This is
/// the optimizer's objective.
#[derive(Debug, Clone)]
pub struct RealMapping {
    dest: [[f64; 4]; 9],
    src: [[f64; 5]; 9],
}

impl Default for RealMapping {
    fn default() -> Self {
        Self::new()
    }
}

impl RealMapping {
    pub fn new() -> Self {
        let b = coupled_pair_basis();
        let mut dest = [[0.0; 4]; 9];
        let mut src = [[0.0; 5]; 9];
        for i in 0..9 {
            for (r, &(j, m)) in DEST_LABELS.iter().enumerate() {
                dest[i][r] = b.matrix[(i, b.column(j, m).unwrap())].re;
            }
            for (c, &(j, m)) in SOURCE_LABELS.iter().enumerate() {
                src[i][c] = b.matrix[(i, b.column(j, m).unwrap())].re;
            }
        }
        RealMapping { dest, src }
    }

    /// `T C Sᵀ` for a 4×5 block stored row-major in `c[..20]`.
    pub fn lift(&self, c: &[f64]) -> Mat9 {
        let mut tc = [[0.0; 5]; 9];
        for i in 0..9 {
            for k in 0..5 {
                tc[i][k] = (0..4).map(|r| self.dest[i][r] * c[5 * r + k]).sum();
            }
        }
        let mut m = [[0.0; 9]; 9];
        for i in 0..9 {
            for j in 0..9 {
                m[i][j] = (0..5).map(|k| tc[i][k] * self.src[j][k]).sum();
            }
        }
        m
    }

    fn transpose(m: &Mat9) -> Mat9 {
        let mut t = [[0.0; 9]; 9];
        for i in 0..9 {
            for j in 0..9 {
                t[j][i] = m[i][j];
            }
        }
        t
    }

    /// `‖[M ⊗ I, I ⊗ N]‖_F²` by direct tensor contraction.
    pub fn comm_sq(m: &Mat9, n: &Mat9) -> f64 {
        let mut total = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for ap in 0..3 {
                        for bp in 0..3 {
                            for cp in 0..3 {
                                let mut x = 0.0;
                                let mut y = 0.0;
                                for q in 0..3 {
                                    x += m[3 * a + b][3 * ap + q] * n[3 * q + c][3 * bp + cp];
                                    y += n[3 * b + c][3 * q + cp] * m[3 * a + q][3 * ap + bp];
                                }
                                let d = x - y;
                                total += d * d;
                            }
                        }
                    }
                }
            }
        }
        total
    }

    fn pair_sum(left: &[Mat9], right: &[Mat9], squared: bool) -> f64 {
        let mut total = 0.0;
        for (a, m) in left.iter().enumerate() {
            for n in right.iter().skip(a) {
                for v in [Self::comm_sq(m, n), Self::comm_sq(m, &Self::transpose(n))] {
                    total += if squared { v } else { v.sqrt() };
                }
            }
        }
        total
    }

    fn dense(ops: &[Mat9]) -> Vec<DMatrix<C64>> {
        ops.iter()
            .map(|m| DMatrix::from_fn(9, 9, |i, j| C64::new(m[i][j], 0.0)))
            .collect()
    }

    /// Measure of a stacked `(4·k) × 5` coefficient block (row-major).
    pub fn measure(&self, stacked: &[f64], convention: NormConvention) -> f64 {
        let ops: Vec<Mat9> = stacked.chunks(20).map(|c| self.lift(c)).collect();
        match convention {
            NormConvention::FrobeniusSquared => Self::pair_sum(&ops, &ops, true),
            NormConvention::Frobenius => Self::pair_sum(&ops, &ops, false),
            NormConvention::Spectral => {
                let d = Self::dense(&ops);
                comm_of_matrices(&d, &d, convention).total
            }
        }
    }

    /// Even/odd measure of two stacked blocks.
    pub fn measure_even_odd(&self, even: &[f64], odd: &[f64], convention: NormConvention) -> f64 {
        let e: Vec<Mat9> = even.chunks(20).map(|c| self.lift(c)).collect();
        let o: Vec<Mat9> = odd.chunks(20).map(|c| self.lift(c)).collect();
        match convention {
            NormConvention::Spectral => {
                let (de, dodd) = (Self::dense(&e), Self::dense(&o));
                let mut terms = terms_between(&de, &dodd);
                terms.extend(terms_between(&dodd, &de));
                CommutationReport::from_terms(terms, convention, 0.5).total
            }
            c => {
                let sq = c == NormConvention::FrobeniusSquared;
                0.5 * (Self::pair_sum(&e, &o, sq) + Self::pair_sum(&o, &e, sq))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::MappingOperatorSet;

    #[test]
    fn published_values_under_the_default_convention() {
        let c = NormConvention::default();
        let m1 = comm_measure(&mapping_set(MappingKind::M1).unwrap(), c).total;
        let m2 = comm_measure(&mapping_set(MappingKind::M2(0.404)).unwrap(), c).total;
        let m3 = comm_measure(&mapping_set(MappingKind::M3).unwrap(), c).total;
        assert!((m1 - 18.2).abs() < 0.1, "{m1}");
        assert!((m2 - 16.7).abs() < 0.1, "{m2}");
        assert!((m3 - 15.5).abs() < 0.1, "{m3}");
    }

    #[test]
    fn report_totals_are_term_sums() {
        let r = comm_measure(&mapping_set(MappingKind::M1).unwrap(), NormConvention::Spectral);
        assert_eq!(r.terms.len(), 6);
        let s: f64 = r.terms.iter().map(|t| t.spectral).sum();
        assert!((r.total - s).abs() < 1e-12);
        assert!(r.terms.iter().all(|t| t.frobenius >= 0.0 && t.spectral >= 0.0));
        assert!(r.total_spectral <= r.total_frobenius + 1e-12);
    }

    fn stacked(set: &MappingOperatorSet) -> Vec<f64> {
        set.coefficients()
            .iter()
            .flat_map(|c| (0..4).flat_map(move |r| (0..5).map(move |k| c[(r, k)].re)))
            .collect()
    }

    #[test]
    fn fast_objective_matches_dense_report() {
        let rm = RealMapping::new();
        for kind in [MappingKind::M1, MappingKind::M2(0.7), MappingKind::M3] {
            let set = mapping_set(kind).unwrap();
            for conv in [NormConvention::FrobeniusSquared, NormConvention::Frobenius, NormConvention::Spectral] {
                let fast = rm.measure(&stacked(&set), conv);
                let dense = comm_measure(&set, conv).total;
                assert!((fast - dense).abs() < 1e-10, "{conv}: {fast} vs {dense}");
            }
        }
        let a = mapping_set(MappingKind::M1).unwrap();
        let b = mapping_set(MappingKind::M3).unwrap();
        for conv in [NormConvention::FrobeniusSquared, NormConvention::Spectral] {
            let fast = rm.measure_even_odd(&stacked(&a), &stacked(&b), conv);
            let dense = even_odd_variant(&a, &b, conv).total;
            assert!((fast - dense).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_invariance() {
        let set = mapping_set(MappingKind::M3).unwrap();
        let phase = C64::from_polar(1.0, 0.83);
        let c: Vec<_> = set
            .coefficients()
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { c * phase } else { c.clone() })
            .collect();
        let rotated = MappingOperatorSet::from_coefficients(MappingKind::Custom, c, false).unwrap();
        for conv in [NormConvention::FrobeniusSquared, NormConvention::Spectral] {
            let a = comm_measure(&set, conv).total;
            let b = comm_measure(&rotated, conv).total;
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn disjoint_supports_commute() {
        // |↑⟩⟨↓| acting only on the left site of each bond
        let mut m = DMatrix::<C64>::zeros(3, 3);
        m[(0, 2)] = C64::new(1.0, 0.0);
        let op = kron(&m, &identity(3));
        let r = comm_of_matrices(&[op.clone()], &[op], NormConvention::Frobenius);
        assert!(r.total < 1e-14);
    }

    #[test]
    fn even_odd_reductions() {
        let a = mapping_set(MappingKind::M1).unwrap();
        let b = mapping_set(MappingKind::M3).unwrap();
        let c = NormConvention::default();
        assert!((even_odd_variant(&a, &a, c).total - comm_measure(&a, c).total).abs() < 1e-10);
        assert!((even_odd_variant(&a, &b, c).total - even_odd_variant(&b, &a, c).total).abs() < 1e-10);
    }

    #[test]
    fn sweep_minimum_location() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let s = alpha_sweep(&grid, NormConvention::default()).unwrap();
        assert!((s.argmin - 0.404).abs() <= 0.01, "{}", s.argmin);
        assert!(s.is_u_shaped());
    }
}
