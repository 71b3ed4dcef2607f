use super::linear::{linear_fit, LinearFit};
use crate::error::{Result, SteerError};
use crate::protocol::{EnsembleResult, PeriodStats, TrajectoryRecord};

/// Energies below this are treated as numerically converged and dropped
/// from logarithmic fits.
const ENERGY_FLOOR: f64 = 1e-11;
/// Minimum number of post-convergence samples for an exponential fit.
const MIN_SAMPLES: usize = 5;

/// Ensemble-mean energy per bond after each trajectory's last ancilla
/// excitation, one series per reset interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSeries {
    pub dt: f64,
    /// Entry `k` is the mean energy `k` periods after convergence.
    pub energy: Vec<PeriodStats>,
}

/// `log E(t) = c·t + a` over the post-convergence times `t = k·δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFit {
    pub dt: f64,
    pub c: f64,
    pub a: f64,
    pub c_se: f64,
    pub residual_norm: f64,
    /// Inclusive range of aligned periods used.
    pub window: (usize, usize),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapFit {
    pub per_dt: Vec<ExpFit>,
    /// `c(δt) ≈ −ΔĒ·δt + b` over the linear region.
    pub slope: LinearFit,
    pub gap: f64,
    pub gap_se: f64,
    pub max_dt: f64,
}

/// Align every valid trajectory at its convergence period and average the
/// post-reset energy. Offsets seen by fewer than half the trajectories are
/// dropped.
pub fn aligned_energy(records: &[TrajectoryRecord]) -> Result<Vec<PeriodStats>> {
    let good: Vec<&TrajectoryRecord> = records.iter().filter(|r| r.valid).collect();
    if good.is_empty() {
        return Err(SteerError::Fit("no valid trajectories to align".into()));
    }
    let mut out = Vec::new();
    for k in 0.. {
        let values: Vec<f64> = good
            .iter()
            .filter_map(|r| {
                let p = r.conv_period + k;
                match p {
                    0 => Some(r.initial.energy),
                    p if p <= r.periods() => Some(r.post[p - 1].energy),
                    _ => None,
                }
            })
            .collect();
        if 2 * values.len() < good.len() {
            break;
        }
        out.push(PeriodStats::from_values(&values));
    }
    Ok(out)
}

/// Exponential fit of one aligned series over `k ≥ 1` against the time
/// `t = k·δt` since convergence, weighted by the standard errors when they
/// are available.
pub fn fit_exponential(series: &GapSeries) -> Result<ExpFit> {
    let mut k = Vec::new();
    let mut y = Vec::new();
    let mut w = Vec::new();
    for (i, s) in series.energy.iter().enumerate().skip(1) {
        if s.mean <= ENERGY_FLOOR || !s.mean.is_finite() {
            break;
        }
        k.push(i as f64 * series.dt);
        y.push(s.mean.ln());
        let rel = s.se / s.mean;
        w.push(if rel > 0.0 { 1.0 / (rel * rel) } else { f64::NAN });
    }
    if k.len() < MIN_SAMPLES {
        return Err(SteerError::Fit(format!(
            "only {} post-convergence samples at dt = {:.4} (need {MIN_SAMPLES})",
            k.len(),
            series.dt
        )));
    }
    let weighted = w.iter().all(|v| v.is_finite());
    let fit = linear_fit(&k, &y, weighted.then_some(w.as_slice()))?;
    Ok(ExpFit {
        dt: series.dt,
        c: fit.slope,
        a: fit.intercept,
        c_se: fit.slope_se,
        residual_norm: fit.residual_norm,
        window: (1, k.len()),
        samples: k.len(),
    })
}

/// Per-interval exponents followed by a linear fit of `c` against `δt`
/// over `δt ≤ max_dt`.
pub fn fit_gap_series(series: &[GapSeries], max_dt: f64) -> Result<GapFit> {
    let per_dt = series.iter().map(fit_exponential).collect::<Result<Vec<_>>>()?;
    let linear: Vec<&ExpFit> = per_dt.iter().filter(|f| f.dt <= max_dt * (1.0 + 1e-9)).collect();
    if linear.len() < 2 {
        return Err(SteerError::Fit(format!(
            "need at least two reset intervals below {max_dt:.4}, got {}",
            linear.len()
        )));
    }
    let x: Vec<f64> = linear.iter().map(|f| f.dt).collect();
    let y: Vec<f64> = linear.iter().map(|f| f.c).collect();
    let w: Vec<f64> = linear.iter().map(|f| 1.0 / (f.c_se * f.c_se)).collect();
    let weighted = w.iter().all(|v| v.is_finite() && *v > 0.0);
    let slope = linear_fit(&x, &y, weighted.then_some(w.as_slice()))?;
    Ok(GapFit {
        gap: -slope.slope,
        gap_se: slope.slope_se,
        slope,
        per_dt,
        max_dt,
    })
}

/// Gap fit over ensembles run at different reset intervals.
pub fn fit_gap(ensembles: &[&EnsembleResult], max_dt: f64) -> Result<GapFit> {
    let series = ensembles
        .iter()
        .map(|e| {
            Ok(GapSeries {
                dt: e.dt,
                energy: aligned_energy(&e.records)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fit_gap_series(&series, max_dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn synthetic(dt: f64, rate: f64, n: usize) -> GapSeries {
        GapSeries {
            dt,
            energy: (0..n)
                .map(|k| PeriodStats {
                    // E(t) ∝ e^{−ΔE·δt·t} at t = k·δt
                    mean: (-rate * dt * dt * k as f64).exp(),
                    se: 0.0,
                })
                .collect(),
        }
    }

    #[test]
    fn synthetic_exponentials() {
        let s: Vec<GapSeries> = [0.2, 0.3, 0.4, 0.5].iter().map(|f| synthetic(f * PI, 0.35, 30)).collect();
        let g = fit_gap_series(&s, 0.5 * PI).unwrap();
        assert!((g.gap - 0.35).abs() < 5e-4, "{}", g.gap);
        assert!(g.per_dt.iter().all(|f| f.c <= 0.0));
    }

    #[test]
    fn short_series_are_refused() {
        let s = vec![synthetic(0.5, 0.35, 4), synthetic(1.0, 0.35, 30)];
        assert!(matches!(fit_gap_series(&s, 2.0), Err(SteerError::Fit(_))));
    }
}
