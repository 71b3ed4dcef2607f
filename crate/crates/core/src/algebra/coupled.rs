use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | J M⟩` for integer spins,
/// Condon–Shortley phase (Racah's closed form).
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if m1 + m2 != m || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if j < (j1 - j2).abs() || j > j1 + j2 {
        return 0.0;
    }
    let f = |n: i32| -> f64 { (1..=n).map(|k| k as f64).product() };
    let pre = ((2 * j + 1) as f64 * f(j + j1 - j2) * f(j - j1 + j2) * f(j1 + j2 - j)
        / f(j1 + j2 + j + 1))
    .sqrt();
    let norm = (f(j + m) * f(j - m) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2)).sqrt();
    let mut sum = 0.0;
    for k in 0..=(j1 + j2 - j) {
        let den = [
            j1 + j2 - j - k,
            j1 - m1 - k,
            j2 + m2 - k,
            j - j2 + m1 + k,
            j - j1 - m2 + k,
        ];
        if den.iter().any(|&d| d < 0) {
            continue;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / (f(k) * den.iter().map(|&d| f(d)).product::<f64>());
    }
    pre * norm * sum
}

/// Change of basis from the two-site product basis `|m_l m_r⟩`
/// (index `3·i_l + i_r`, `i = 1 − m`) to coupled states `|J, M⟩`.
///
/// Coupled states are built right-site-first,
/// `|J,M⟩ = Σ ⟨1 m_r; 1 m_l | J M⟩ |m_l m_r⟩`, which differs from
/// left-first coupling by `(−1)^J`. The relative sign between the `J = 0`
/// and `J = 1` blocks is observable through the commutation measure of
/// mapping sets that mix both blocks.
#[derive(Debug, Clone)]
pub struct CoupledPairBasis {
    /// Columns are the coupled states, in `column_labels` order.
    pub matrix: DMatrix<C64>,
    pub column_labels: Vec<(i32, i32)>,
}

impl CoupledPairBasis {
    pub fn column(&self, j: i32, m: i32) -> Option<usize> {
        self.column_labels.iter().position(|&l| l == (j, m))
    }

    /// Product-basis vector of `|J, M⟩`.
    pub fn ket(&self, j: i32, m: i32) -> DVector<C64> {
        let col = self
            .column(j, m)
            .unwrap_or_else(|| panic!("no coupled state |{j},{m}⟩"));
        self.matrix.column(col).into_owned()
    }

    /// Projector onto total spin `J`.
    pub fn projector(&self, j: i32) -> DMatrix<C64> {
        let mut p = DMatrix::zeros(9, 9);
        for m in -j..=j {
            let k = self.ket(j, m);
            p += &k * k.adjoint();
        }
        p
    }
}

pub fn coupled_pair_basis() -> CoupledPairBasis {
    let mut labels = Vec::with_capacity(9);
    for j in [2, 1, 0] {
        for m in (-j..=j).rev() {
            labels.push((j, m));
        }
    }
    let mut matrix = DMatrix::zeros(9, 9);
    for (col, &(j, m)) in labels.iter().enumerate() {
        for il in 0..3 {
            for ir in 0..3 {
                let (ml, mr) = (1 - il as i32, 1 - ir as i32);
                matrix[(3 * il + ir, col)] = C64::new(clebsch_gordan(1, mr, 1, ml, j, m), 0.0);
            }
        }
    }
    CoupledPairBasis {
        matrix,
        column_labels: labels,
    }
}
