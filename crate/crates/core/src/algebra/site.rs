use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Single-site measurement outcome in the `{↑, 0, ↓}` basis (indices 0, 1, 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Up,
    Zero,
    Down,
}

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::Up => 0,
            Outcome::Zero => 1,
            Outcome::Down => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            0 => Some(Outcome::Up),
            1 => Some(Outcome::Zero),
            2 => Some(Outcome::Down),
            _ => None,
        }
    }

    /// Compact log symbol: `u`, `0`, `d`.
    pub fn symbol(self) -> char {
        match self {
            Outcome::Up => 'u',
            Outcome::Zero => '0',
            Outcome::Down => 'd',
        }
    }

    pub fn magnetization(self) -> i32 {
        1 - self.index() as i32
    }
}

/// Spin-1 matrices in the `{↑, 0, ↓}` basis with ħ = 1.
#[derive(Debug, Clone)]
pub struct SpinOneSite {
    pub sx: DMatrix<C64>,
    pub sy: DMatrix<C64>,
    pub sz: DMatrix<C64>,
}

impl SpinOneSite {
    pub fn new() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let re = |x: f64| C64::new(x, 0.0);
        let im = |x: f64| C64::new(0.0, x);
        let sx = DMatrix::from_row_slice(3, 3, &[z, re(r), z, re(r), z, re(r), z, re(r), z]);
        let sy = DMatrix::from_row_slice(3, 3, &[z, im(-r), z, im(r), z, im(-r), z, im(r), z]);
        let sz = DMatrix::from_row_slice(3, 3, &[re(1.0), z, z, z, z, z, z, z, re(-1.0)]);
        SpinOneSite { sx, sy, sz }
    }

    /// `S⁺ = Sx + i Sy`.
    pub fn raising(&self) -> DMatrix<C64> {
        &self.sx + &self.sy * C64::new(0.0, 1.0)
    }

    pub fn lowering(&self) -> DMatrix<C64> {
        &self.sx - &self.sy * C64::new(0.0, 1.0)
    }

    /// `S_l · S_{l+1}` on the 9-dimensional pair space.
    pub fn pair_dot(&self) -> DMatrix<C64> {
        self.sx.kronecker(&self.sx) + self.sy.kronecker(&self.sy) + self.sz.kronecker(&self.sz)
    }
}

impl Default for SpinOneSite {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, frobenius, identity};

    #[test]
    fn spin_algebra_and_casimir() {
        let s = SpinOneSite::new();
        let i = C64::new(0.0, 1.0);
        assert!(frobenius(&(commutator(&s.sx, &s.sy) - &s.sz * i)) < 1e-14);
        assert!(frobenius(&(commutator(&s.sy, &s.sz) - &s.sx * i)) < 1e-14);
        assert!(frobenius(&(commutator(&s.sz, &s.sx) - &s.sy * i)) < 1e-14);
        let cas = &s.sx * &s.sx + &s.sy * &s.sy + &s.sz * &s.sz;
        assert!(frobenius(&(cas - identity(3) * C64::new(2.0, 0.0))) < 1e-14);
    }

    #[test]
    fn outcome_roundtrip() {
        for i in 0..3 {
            assert_eq!(Outcome::from_index(i).unwrap().index(), i);
        }
        assert_eq!(Outcome::Down.symbol(), 'd');
        assert_eq!(Outcome::from_index(3), None);
    }
}
