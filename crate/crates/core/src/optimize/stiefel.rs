use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::comm::{comm_measure, even_odd_variant, CommutationReport, NormConvention, RealMapping};
use crate::algebra::{MappingKind, MappingOperatorSet};
use crate::error::{Result, SteerError};

const ROWS: usize = 8;
const COLS: usize = 5;
const PARAMS: usize = ROWS * COLS;

/// Which manifold the decision variables live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constraint {
    /// Orthonormal columns of `[C₁; C₂]`, i.e. `Σ C†C = I₅`.
    #[default]
    Stiefel,
    /// Hamiltonian-sum constraint released; only the overall scale
    /// `Tr Σ C†C = 5` is fixed so the measure cannot shrink to zero.
    Sphere,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Stiefel => "constrained",
            Constraint::Sphere => "unconstrained",
        })
    }
}

/// Stacked real `8 × 5` coefficient block `[C₁; C₂]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint {
    data: Vec<f64>,
    constraint: Constraint,
}

impl StiefelPoint {
    /// Retract arbitrary values onto the manifold.
    pub fn new(data: Vec<f64>, constraint: Constraint) -> Result<Self> {
        if data.len() != PARAMS {
            return Err(SteerError::InvalidArgument(format!(
                "expected {PARAMS} coefficients, got {}",
                data.len()
            )));
        }
        Ok(StiefelPoint {
            data: retract(&data, constraint)?,
            constraint,
        })
    }

    /// Gaussian start retracted onto the manifold.
    pub fn random(rng: &mut ChaCha8Rng, constraint: Constraint) -> Result<Self> {
        let data = (0..PARAMS).map(|_| StandardNormal.sample(rng)).collect();
        Self::new(data, constraint)
    }

    /// Real part of a two-operator set; rejects complex coefficients.
    pub fn from_set(set: &MappingOperatorSet, constraint: Constraint) -> Result<Self> {
        if set.len() != 2 {
            return Err(SteerError::InvalidArgument(format!(
                "optimizer works on two-operator sets, got {}",
                set.len()
            )));
        }
        let mut data = Vec::with_capacity(PARAMS);
        for c in set.coefficients() {
            for r in 0..4 {
                for k in 0..COLS {
                    if c[(r, k)].im.abs() > 1e-12 {
                        return Err(SteerError::InvalidArgument("complex coefficients are not optimized".into()));
                    }
                    data.push(c[(r, k)].re);
                }
            }
        }
        Self::new(data, constraint)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    /// `‖XᵀX − I₅‖_F`, which equals the Hamiltonian-sum violation.
    pub fn sum_violation(&self) -> f64 {
        let g = gram(&self.data);
        let mut s = 0.0;
        for i in 0..COLS {
            for j in 0..COLS {
                let d = g[i][j] - if i == j { 1.0 } else { 0.0 };
                s += d * d;
            }
        }
        s.sqrt()
    }

    /// Distance from the declared constraint.
    pub fn constraint_violation(&self) -> f64 {
        match self.constraint {
            Constraint::Stiefel => self.sum_violation(),
            Constraint::Sphere => (self.data.iter().map(|v| v * v).sum::<f64>() - COLS as f64).abs(),
        }
    }

    pub fn to_set(&self) -> Result<MappingOperatorSet> {
        let coeffs = self
            .data
            .chunks(20)
            .map(|c| DMatrix::from_fn(4, COLS, |r, k| C64::new(c[COLS * r + k], 0.0)))
            .collect();
        MappingOperatorSet::from_coefficients(MappingKind::Custom, coeffs, self.constraint == Constraint::Sphere)
    }
}

fn gram(x: &[f64]) -> [[f64; COLS]; COLS] {
    let mut g = [[0.0; COLS]; COLS];
    for i in 0..COLS {
        for j in 0..COLS {
            g[i][j] = (0..ROWS).map(|r| x[COLS * r + i] * x[COLS * r + j]).sum();
        }
    }
    g
}

/// QR retraction with positive `diag(R)`; sphere retraction rescales.
fn retract(x: &[f64], constraint: Constraint) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SteerError::Numerical("retraction of a non-finite point".into()));
    }
    match constraint {
        Constraint::Sphere => {
            let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n < 1e-12 {
                return Err(SteerError::Numerical("retraction of a zero point".into()));
            }
            let s = (COLS as f64).sqrt() / n;
            Ok(x.iter().map(|v| v * s).collect())
        }
        Constraint::Stiefel => {
            let m = DMatrix::from_row_slice(ROWS, COLS, x);
            let qr = m.qr();
            let r = qr.r();
            let q = qr.q();
            let mut out = vec![0.0; PARAMS];
            for j in 0..COLS {
                let d = r[(j, j)];
                if !(d.abs() > 1e-12) {
                    return Err(SteerError::Numerical("rank-deficient point in QR retraction".into()));
                }
                let sign = d.signum();
                for i in 0..ROWS {
                    out[COLS * i + j] = sign * q[(i, j)];
                }
            }
            Ok(out)
        }
    }
}

/// Project a Euclidean gradient onto the tangent space at `x`.
fn project(x: &[f64], g: &[f64], constraint: Constraint) -> Vec<f64> {
    match constraint {
        Constraint::Sphere => {
            let d = x.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() / COLS as f64;
            g.iter().zip(x).map(|(gi, xi)| gi - d * xi).collect()
        }
        Constraint::Stiefel => {
            // G − X sym(XᵀG)
            let mut xtg = [[0.0; COLS]; COLS];
            for i in 0..COLS {
                for j in 0..COLS {
                    xtg[i][j] = (0..ROWS).map(|r| x[COLS * r + i] * g[COLS * r + j]).sum();
                }
            }
            let mut out = g.to_vec();
            for r in 0..ROWS {
                for j in 0..COLS {
                    let s: f64 = (0..COLS).map(|k| x[COLS * r + k] * 0.5 * (xtg[k][j] + xtg[j][k])).sum();
                    out[COLS * r + j] -= s;
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    /// Riemannian gradient norm fell below the tolerance.
    Stationary,
    /// No decrease of the objective across the stall window.
    Converged,
    /// Iteration cap reached.
    MaxIterations,
}

impl fmt::Display for DescentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DescentStatus::Stationary => "stationary",
            DescentStatus::Converged => "converged",
            DescentStatus::MaxIterations => "max-iterations",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub starts: usize,
    pub constraint: Constraint,
    pub convention: NormConvention,
    pub seed: u64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub grad_tol: f64,
    /// Iterations without decrease before declaring convergence.
    pub stall: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            starts: 64,
            constraint: Constraint::Stiefel,
            convention: NormConvention::FrobeniusSquared,
            seed: 1,
            max_iter: 3000,
            fd_step: 1e-6,
            grad_tol: 1e-6,
            stall: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub constraint_violation: f64,
}

/// Outcome of one local descent.
#[derive(Debug, Clone)]
pub struct StartRecord {
    pub start: usize,
    pub initial: f64,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: DescentStatus,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    /// Best set (`[even]` or `[even, odd]`).
    pub sets: Vec<MappingOperatorSet>,
    pub points: Vec<StiefelPoint>,
    pub report: CommutationReport,
    /// Hamiltonian-sum violation of every returned point.
    pub sum_violation: Vec<f64>,
    pub constraint: Constraint,
    /// Every local minimum, in start order.
    pub starts: Vec<StartRecord>,
    pub best_start: usize,
}

impl OptimizeResult {
    pub fn best(&self) -> &StartRecord {
        &self.starts[self.best_start]
    }
}

/// Riemannian descent on a product of `blocks` manifolds.
struct Problem<'a> {
    blocks: usize,
    constraint: Constraint,
    objective: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.blocks * PARAMS
    }

    fn retract(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(x.len());
        for b in x.chunks(PARAMS) {
            out.extend(retract(b, self.constraint)?);
        }
        Ok(out)
    }

    fn riemannian_gradient(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.n()];
        let mut y = x.to_vec();
        for i in 0..self.n() {
            y[i] = x[i] + h;
            let fp = (self.objective)(&y);
            y[i] = x[i] - h;
            let fm = (self.objective)(&y);
            y[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        let mut out = Vec::with_capacity(self.n());
        for (xb, gb) in x.chunks(PARAMS).zip(g.chunks(PARAMS)) {
            out.extend(project(xb, gb, self.constraint));
        }
        out
    }

    fn violation(&self, x: &[f64]) -> f64 {
        x.chunks(PARAMS)
            .map(|b| {
                StiefelPoint {
                    data: b.to_vec(),
                    constraint: self.constraint,
                }
                .constraint_violation()
            })
            .fold(0.0, f64::max)
    }

    /// Armijo backtracking along the negative gradient with a
    /// Barzilai–Borwein initial step.
    fn descend(&self, start: usize, x0: Vec<f64>, opts: &OptimizeOptions) -> Result<(Vec<f64>, StartRecord)> {
        let mut x = self.retract(&x0)?;
        let mut f = (self.objective)(&x);
        let initial = f;
        let mut g = self.riemannian_gradient(&x, opts.fd_step);
        let mut gn = dot(&g, &g).sqrt();
        let mut step = 0.1;
        let mut trace = vec![TraceRow {
            iteration: 0,
            objective: f,
            grad_norm: gn,
            constraint_violation: self.violation(&x),
        }];
        let mut best = f;
        let mut since_best = 0;
        let mut status = DescentStatus::MaxIterations;
        let mut iterations = 0;
        for it in 1..=opts.max_iter {
            if gn < opts.grad_tol {
                status = DescentStatus::Stationary;
                break;
            }
            let mut t = step;
            let (mut xn, mut fnew);
            loop {
                let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
                xn = self.retract(&trial)?;
                fnew = (self.objective)(&xn);
                if fnew <= f - 1e-4 * t * gn * gn || t < 1e-14 {
                    break;
                }
                t *= 0.5;
            }
            if fnew > f {
                // the line search failed to find any decrease
                xn = x.clone();
                fnew = f;
            }
            let gnew = self.riemannian_gradient(&xn, opts.fd_step);
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &yv);
            step = if sy > 1e-16 { (dot(&s, &s) / sy).clamp(1e-6, 10.0) } else { (2.0 * t).min(10.0) };
            x = xn;
            f = fnew;
            g = gnew;
            gn = dot(&g, &g).sqrt();
            iterations = it;
            trace.push(TraceRow {
                iteration: it,
                objective: f,
                grad_norm: gn,
                constraint_violation: self.violation(&x),
            });
            if f < best - 1e-12 * best.abs().max(1.0) {
                best = f;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= opts.stall {
                    status = DescentStatus::Converged;
                    break;
                }
            }
        }
        if gn < opts.grad_tol {
            status = DescentStatus::Stationary;
        }
        let record = StartRecord {
            start,
            initial,
            objective: f,
            grad_norm: gn,
            iterations,
            status,
            trace,
        };
        Ok((x, record))
    }

    fn multistart(&self, opts: &OptimizeOptions) -> Result<(Vec<f64>, Vec<StartRecord>, usize)> {
        if opts.starts == 0 {
            return Err(SteerError::InvalidArgument("seed_count must be at least 1".into()));
        }
        let runs: Vec<Result<(Vec<f64>, StartRecord)>> = (0..opts.starts)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(s as u64);
                let x0: Vec<f64> = (0..self.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
                self.descend(s, x0, opts)
            })
            .collect();
        let mut best: Option<(usize, Vec<f64>)> = None;
        let mut records = Vec::with_capacity(runs.len());
        for run in runs {
            let (x, rec) = run?;
            let better = best.as_ref().is_none_or(|(b, _)| rec.objective < records_obj(&records, *b));
            if better {
                best = Some((records.len(), x));
            }
            records.push(rec);
        }
        let (k, x) = best.unwrap();
        Ok((x, records, k))
    }
}

fn records_obj(records: &[StartRecord], k: usize) -> f64 {
    records[k].objective
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finish(
    blocks: Vec<Vec<f64>>,
    constraint: Constraint,
    convention: NormConvention,
    starts: Vec<StartRecord>,
    best_start: usize,
) -> Result<OptimizeResult> {
    let points: Vec<StiefelPoint> = blocks
        .into_iter()
        .map(|data| StiefelPoint { data, constraint })
        .collect();
    for p in &points {
        let v = p.constraint_violation();
        if v > 1e-10 {
            return Err(SteerError::Numerical(format!("optimizer output violates its constraint by {v:.2e}")));
        }
    }
    let sets = points.iter().map(StiefelPoint::to_set).collect::<Result<Vec<_>>>()?;
    let report = match sets.as_slice() {
        [s] => comm_measure(s, convention),
        [e, o] => even_odd_variant(e, o, convention),
        _ => unreachable!(),
    };
    Ok(OptimizeResult {
        sum_violation: points.iter().map(StiefelPoint::sum_violation).collect(),
        sets,
        points,
        report,
        constraint,
        starts,
        best_start,
    })
}

/// Multi-start minimization of the commutation measure of a single
/// two-operator set used on every bond.
pub fn optimize_maps(opts: &OptimizeOptions) -> Result<OptimizeResult> {
    let rm = RealMapping::new();
    let conv = opts.convention;
    let obj = |x: &[f64]| rm.measure(x, conv);
    let p = Problem {
        blocks: 1,
        constraint: opts.constraint,
        objective: &obj,
    };
    let (x, records, k) = p.multistart(opts)?;
    finish(vec![x], opts.constraint, conv, records, k)
}

/// Local descent from a given point (single start, no randomness).
pub fn descend_from(point: &StiefelPoint, opts: &OptimizeOptions) -> Result<OptimizeResult> {
    let rm = RealMapping::new();
    let conv = opts.convention;
    let obj = |x: &[f64]| rm.measure(x, conv);
    let p = Problem {
        blocks: 1,
        constraint: point.constraint,
        objective: &obj,
    };
    let (x, rec) = p.descend(0, point.data.clone(), opts)?;
    finish(vec![x], point.constraint, conv, vec![rec], 0)
}

/// Multi-start minimization over pairs of sets alternating between even
/// and odd bonds.
pub fn optimize_even_odd(opts: &OptimizeOptions) -> Result<OptimizeResult> {
    let rm = RealMapping::new();
    let conv = opts.convention;
    let obj = |x: &[f64]| rm.measure_even_odd(&x[..PARAMS], &x[PARAMS..], conv);
    let p = Problem {
        blocks: 2,
        constraint: opts.constraint,
        objective: &obj,
    };
    let (x, records, k) = p.multistart(opts)?;
    finish(
        vec![x[..PARAMS].to_vec(), x[PARAMS..].to_vec()],
        opts.constraint,
        conv,
        records,
        k,
    )
}

/// `iteration,objective,grad_norm,constraint_violation`.
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceRow]) -> Result<()> {
    writeln!(w, "iteration,objective,grad_norm,constraint_violation")?;
    for r in trace {
        writeln!(
            w,
            "{},{:.12e},{:.6e},{:.3e}",
            r.iteration, r.objective, r.grad_norm, r.constraint_violation
        )?;
    }
    Ok(())
}
