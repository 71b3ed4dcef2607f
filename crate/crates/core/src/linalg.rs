//! Small dense helpers shared by the operator builders and the oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// `I_{left} ⊗ op ⊗ I_{right}`.
pub fn embed(op: &DMatrix<C64>, left: usize, right: usize) -> DMatrix<C64> {
    identity(left).kronecker(op).kronecker(&identity(right))
}

pub fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

pub fn anticommutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b + b * a
}

pub fn frobenius(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn spectral_norm(a: &DMatrix<C64>) -> f64 {
    a.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn hermiticity_defect(a: &DMatrix<C64>) -> f64 {
    frobenius(&(a - a.adjoint()))
}

/// `exp(-i h t)` for Hermitian `h` via its eigendecomposition.
pub fn unitary_exp(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&w| C64::from_polar(1.0, -w * t)),
    );
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// Matrix exponential of a general square matrix by scaling and squaring
/// with a Taylor kernel. Used only by the small dense oracles.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let x = a * c(scale);
    let mut term = identity(n);
    let mut sum = identity(n);
    for k in 1..=20 {
        term = &term * &x * c(1.0 / k as f64);
        sum += &term;
        if frobenius(&term) < 1e-18 * frobenius(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Dense Hermitian eigenvalues in ascending order.
pub fn hermitian_eigenvalues(h: &DMatrix<C64>) -> Vec<f64> {
    let mut w: Vec<f64> = h.clone().symmetric_eigenvalues().iter().cloned().collect();
    w.sort_by(|a, b| a.partial_cmp(b).unwrap());
    w
}

/// `⟨a|b⟩` with four independent accumulators so the loop vectorizes;
/// the summation order is fixed, so results stay deterministic.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    let mut re = [0.0f64; 4];
    let mut im = [0.0f64; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let cb = &b[..ca.len()];
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for k in 0..4 {
            re[k] += x[k].re * y[k].re + x[k].im * y[k].im;
            im[k] += x[k].re * y[k].im - x[k].im * y[k].re;
        }
    }
    let mut out = C64::new((re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3]));
    for (x, y) in ra.iter().zip(&b[ca.len()..]) {
        out += x.conj() * y;
    }
    out
}

pub fn norm(a: &[C64]) -> f64 {
    vdot(a, a).re.sqrt()
}

/// Sum with a fixed pairwise tree, so the result only depends on the order
/// of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
