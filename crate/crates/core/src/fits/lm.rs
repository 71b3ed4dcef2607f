use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SteerError};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative step and residual-change tolerance.
    pub tol: f64,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 500,
            tol: 1e-12,
            fd_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmResult {
    pub params: Vec<f64>,
    /// Standard errors from `s² (JᵀJ)⁻¹` at the optimum.
    pub stderr: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: &F, p: &[f64], r0: &[f64], h: f64) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(r0.len(), p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let step = h * p[k].abs().max(1.0);
        q[k] = p[k] + step;
        let rp = f(&q);
        q[k] = p[k] - step;
        let rm = f(&q);
        q[k] = p[k];
        for i in 0..r0.len() {
            j[(i, k)] = (rp[i] - rm[i]) / (2.0 * step);
        }
    }
    j
}

/// Levenberg–Marquardt minimization of `‖r(p)‖²` with a finite-difference
/// Jacobian. `project` maps trial points back into the feasible set.
pub fn levenberg_marquardt<F, P>(residuals: F, project: P, p0: &[f64], opts: &LmOptions) -> Result<LmResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&mut [f64]),
{
    let sq = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let mut p = p0.to_vec();
    project(&mut p);
    let mut r = residuals(&p);
    let mut cost = sq(&r);
    if !cost.is_finite() {
        return Err(SteerError::Fit("non-finite residuals at the starting point".into()));
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let j = jacobian(&residuals, &p, &r, opts.fd_step);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for k in 0..p.len() {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&(-&g));
            let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial);
            let rt = residuals(&trial);
            let ct = sq(&rt);
            if ct.is_finite() && ct < cost {
                let step: f64 = trial.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let scale = p.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
                let small = step < opts.tol * scale || cost - ct < opts.tol * cost.max(1e-300);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left: a local minimum to working precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    let j = jacobian(&residuals, &p, &r, opts.fd_step);
    let dof = r.len().saturating_sub(p.len()).max(1) as f64;
    let s2 = cost / dof;
    let stderr = match (j.transpose() * &j).try_inverse() {
        Some(cov) => (0..p.len()).map(|k| (s2 * cov[(k, k)]).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; p.len()],
    };
    Ok(LmResult {
        params: p,
        stderr,
        residual_norm: cost.sqrt(),
        iterations,
        converged,
    })
}
