use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Ancilla raising operators `D₁† = |0⟩⟨↑|`, `D₂† = |↓⟩⟨↑|` and the
/// single-site reference state `|↑⟩`.
#[derive(Debug, Clone)]
pub struct AncillaOperators {
    pub raising: [DMatrix<C64>; 2],
    pub reference: DVector<C64>,
}

impl AncillaOperators {
    /// All-`↑` product over `n` ancillas (index 0 of the ancilla register).
    pub fn reference_product(&self, n: usize) -> DVector<C64> {
        let mut v = DVector::zeros(3usize.pow(n as u32));
        v[0] = C64::new(1.0, 0.0);
        v
    }
}

pub fn ancilla_operators() -> AncillaOperators {
    let mut d1 = DMatrix::zeros(3, 3);
    d1[(1, 0)] = C64::new(1.0, 0.0);
    let mut d2 = DMatrix::zeros(3, 3);
    d2[(2, 0)] = C64::new(1.0, 0.0);
    let mut reference = DVector::zeros(3);
    reference[0] = C64::new(1.0, 0.0);
    AncillaOperators {
        raising: [d1, d2],
        reference,
    }
}
