use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::LinearOperator;
use crate::error::{Result, SteerError};
use crate::linalg::{norm, vdot};

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Target 2-norm error of the whole propagation.
    pub tol: f64,
    /// Largest Krylov subspace before the time step is split.
    pub max_subspace: usize,
    /// Upper bound on time-step halvings.
    pub max_splits: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            tol: 1e-10,
            max_subspace: 40,
            max_splits: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PropagationReport {
    pub substeps: usize,
    pub matvecs: usize,
    pub error_estimate: f64,
    /// `| ‖ψ‖ − 1 |` removed by the final renormalization.
    pub norm_drift: f64,
}

fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    // classical Gram-Schmidt, repeated once when cancellation was severe
    // (Kahan–Parlett "twice is enough")
    for _ in 0..2 {
        let before = norm(w);
        for v in basis {
            let p = vdot(v, w);
            axpy(-p, v, w);
        }
        if norm(w) > 0.7 * before {
            break;
        }
    }
}

/// `exp(−i T τ) e₁` for a real symmetric tridiagonal `T`.
fn tridiagonal_exp_e1(alpha: &[f64], beta: &[f64], tau: f64) -> DVector<C64> {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    DVector::from_fn(k, |i, _| {
        (0..k)
            .map(|j| {
                let v = eig.eigenvectors[(i, j)] * eig.eigenvectors[(0, j)];
                C64::from_polar(v, -eig.eigenvalues[j] * tau)
            })
            .sum()
    })
}

enum StepOutcome {
    Done { matvecs: usize, error: f64 },
    TooLong { matvecs: usize },
}

fn lanczos_step<H: LinearOperator + ?Sized>(
    h: &H,
    psi: &mut [C64],
    tau: f64,
    tol: f64,
    max_subspace: usize,
) -> StepOutcome {
    let n = psi.len();
    let nrm = norm(psi);
    if nrm == 0.0 {
        return StepOutcome::Done { matvecs: 0, error: 0.0 };
    }
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(max_subspace);
    basis.push(psi.iter().map(|z| z / nrm).collect());
    let mut alpha = Vec::with_capacity(max_subspace);
    let mut beta = Vec::with_capacity(max_subspace);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let max_k = max_subspace.min(n);
    // The estimate `β_k |y_k|` can vanish by accident (e.g. a partial
    // revival inside a small subspace), so two consecutive estimates must
    // pass before the step is accepted.
    let mut prev_error = f64::INFINITY;
    for k in 0..max_k {
        h.apply(&basis[k], &mut w);
        let a = vdot(&basis[k], &w).re;
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let y = tridiagonal_exp_e1(&alpha, &beta, tau);
        let error = nrm * b * y[k].norm();
        let invariant = b < 1e-13 * (1.0 + a.abs());
        if invariant || (error <= tol && prev_error <= tol) || k + 1 == n {
            psi.fill(C64::new(0.0, 0.0));
            for (v, c) in basis.iter().zip(y.iter()) {
                axpy(c * nrm, v, psi);
            }
            let error = if invariant || k + 1 == n { 0.0 } else { error };
            return StepOutcome::Done { matvecs: k + 1, error };
        }
        prev_error = error;
        beta.push(b);
        let next: Vec<C64> = w.iter().map(|z| z / b).collect();
        basis.push(next);
    }
    StepOutcome::TooLong { matvecs: max_k }
}

/// `ψ ← exp(−i H τ) ψ` by Lanczos propagation with full reorthogonalization.
///
/// The step is split whenever the subspace cap is reached before the error
/// estimate drops below the per-step share of `opts.tol`.
pub fn evolve<H: LinearOperator + ?Sized>(
    h: &H,
    psi: &mut [C64],
    tau: f64,
    opts: &KrylovOptions,
) -> Result<PropagationReport> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(SteerError::InvalidArgument(format!("propagation time must be >= 0, got {tau}")));
    }
    if psi.len() != h.dim() {
        return Err(SteerError::InvalidArgument(format!(
            "state length {} does not match operator dimension {}",
            psi.len(),
            h.dim()
        )));
    }
    let mut report = PropagationReport::default();
    if tau == 0.0 {
        return Ok(report);
    }
    let norm_in = norm(psi);
    let mut remaining = tau;
    let mut dt = tau;
    let mut splits = 0;
    let mut backup = psi.to_vec();
    while remaining > 0.0 {
        let step = dt.min(remaining);
        let local_tol = opts.tol * step / tau;
        backup.copy_from_slice(psi);
        match lanczos_step(h, psi, step, local_tol, opts.max_subspace) {
            StepOutcome::Done { matvecs, error } => {
                report.matvecs += matvecs;
                report.substeps += 1;
                report.error_estimate += error;
                remaining -= step;
                if remaining < 1e-15 * tau {
                    remaining = 0.0;
                }
            }
            StepOutcome::TooLong { matvecs } => {
                report.matvecs += matvecs;
                psi.copy_from_slice(&backup);
                splits += 1;
                if splits > opts.max_splits {
                    return Err(SteerError::Propagation {
                        residual: f64::NAN,
                        iterations: report.matvecs,
                    });
                }
                dt = step / 2.0;
            }
        }
    }
    if report.error_estimate > opts.tol * 10.0 {
        return Err(SteerError::Propagation {
            residual: report.error_estimate,
            iterations: report.matvecs,
        });
    }
    let norm_out = norm(psi);
    if norm_in > 0.0 && norm_out > 0.0 {
        let scale = norm_in / norm_out;
        report.norm_drift = (norm_out / norm_in - 1.0).abs();
        if report.norm_drift > 1e-12 {
            log::debug!("krylov renormalization drift {:.3e}", report.norm_drift);
        }
        for z in psi.iter_mut() {
            *z *= scale;
        }
    }
    Ok(report)
}

fn seeded_start(n: usize) -> Vec<C64> {
    // deterministic, generic start vector
    (0..n)
        .map(|i| {
            let x = (i as f64 + 1.0) * 0.618_033_988_749_894_9;
            C64::new((x * 12.9898).sin(), (x * 78.233).cos())
        })
        .collect()
}

/// Lowest `count` eigenvalues of `h` restricted to the orthogonal complement
/// of `deflate` (vectors assumed orthonormal), by Lanczos with full
/// reorthogonalization. Degenerate levels are reported once.
pub fn lowest_eigenvalues<H: LinearOperator + ?Sized>(
    h: &H,
    deflate: &[Vec<C64>],
    count: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = h.dim();
    let avail = n.saturating_sub(deflate.len());
    if count == 0 || count > avail {
        return Err(SteerError::InvalidArgument(format!(
            "cannot extract {count} eigenvalues from a {avail}-dimensional space"
        )));
    }
    let mut v = seeded_start(n);
    orthogonalize(&mut v, deflate);
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut basis = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let max_iter = avail.min(600);
    let mut last = Vec::new();
    for k in 0..max_iter {
        h.apply(&basis[k], &mut w);
        orthogonalize(&mut w, deflate);
        alpha.push(vdot(&basis[k], &w).re);
        orthogonalize(&mut w, &basis);
        orthogonalize(&mut w, deflate);
        let b = norm(&w);
        let m = alpha.len();
        let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let exhausted = b < 1e-12 || k + 1 == max_iter;
        if m >= count {
            let converged = order[..count]
                .iter()
                .all(|&j| (b * eig.eigenvectors[(m - 1, j)]).abs() < tol);
            last = order[..count].iter().map(|&j| eig.eigenvalues[j]).collect();
            if converged || exhausted {
                if !converged && b >= 1e-12 {
                    return Err(SteerError::Numerical(format!(
                        "Lanczos eigensolver did not converge in {max_iter} iterations"
                    )));
                }
                return Ok(last);
            }
        } else if exhausted {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    if last.len() == count {
        Ok(last)
    } else {
        Err(SteerError::Numerical("Krylov space exhausted before enough eigenvalues were found".into()))
    }
}
