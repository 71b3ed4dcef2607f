use rayon::prelude::*;

use super::{run_trajectory, ProtocolConfig, Sample, SteeringContext, TrajectoryRecord};
use crate::error::{Result, SteerError};
use crate::linalg::pairwise_sum;

/// Mean and standard error of one observable at one period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeriodStats {
    pub mean: f64,
    pub se: f64,
}

impl PeriodStats {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return PeriodStats { mean: f64::NAN, se: f64::NAN };
        }
        let mean = pairwise_sum(values) / n as f64;
        if n == 1 {
            return PeriodStats { mean, se: 0.0 };
        }
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1) as f64;
        PeriodStats {
            mean,
            se: (var / n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TconvStats {
    pub mean: f64,
    pub se: f64,
    pub median: f64,
    pub std: f64,
    pub values: Vec<f64>,
}

impl TconvStats {
    pub fn from_values(values: Vec<f64>) -> Self {
        let st = PeriodStats::from_values(&values);
        let n = values.len();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if n == 0 {
            f64::NAN
        } else if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        TconvStats {
            mean: st.mean,
            se: st.se,
            median,
            std: st.se * (n as f64).sqrt(),
            values,
        }
    }
}

/// Observables at the stop-scheme time versus the unconditioned end time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StopSummary {
    pub window: usize,
    /// Trajectories in which the scheme triggered.
    pub triggered: usize,
    pub median_fidelity: f64,
    pub mean_infidelity: f64,
    pub mean_energy: f64,
    pub mean_stop_time: f64,
    /// Unconditioned post-reset values averaged over trajectories and the
    /// last quarter of the periods.
    pub equilibrium_infidelity: f64,
    pub equilibrium_energy: f64,
}

impl StopSummary {
    /// Unconditioned equilibrium infidelity over scheme infidelity.
    pub fn improvement(&self) -> f64 {
        self.equilibrium_infidelity / self.mean_infidelity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub config: ProtocolConfig,
    pub trajectories: usize,
    pub excluded: usize,
    pub dt: f64,
    /// Period 0 is the initial state, period `n` ends at `n·δt`.
    pub times: Vec<f64>,
    pub energy_pre: Vec<PeriodStats>,
    pub energy_post: Vec<PeriodStats>,
    pub infidelity_pre: Vec<PeriodStats>,
    pub infidelity_post: Vec<PeriodStats>,
    pub entropy_pre: Vec<PeriodStats>,
    pub entropy_post: Vec<PeriodStats>,
    pub flips_mean: Vec<f64>,
    /// Per-period, per-site `⟨S^z⟩` before measurement and after reset.
    pub magnetization_pre: Vec<Vec<PeriodStats>>,
    pub magnetization_post: Vec<Vec<PeriodStats>>,
    /// Trailing one-period average of the energy (trapezoid of the value
    /// after the previous reset and before the current measurement).
    pub smoothed_energy: Vec<f64>,
    pub t_conv: TconvStats,
    /// Peak of the mean pre-measurement entropy and its time.
    pub s_max: f64,
    pub t_max: f64,
    /// Set when the entropy curve has no interior maximum.
    pub t_max_at_end: bool,
    pub stop: Option<StopSummary>,
    pub records: Vec<TrajectoryRecord>,
}

fn column<F: Fn(&TrajectoryRecord) -> f64>(records: &[&TrajectoryRecord], f: F) -> PeriodStats {
    let v: Vec<f64> = records.iter().map(|r| f(r)).collect();
    PeriodStats::from_values(&v)
}

fn stats_series<F: Fn(&Sample) -> f64 + Copy>(
    records: &[&TrajectoryRecord],
    periods: usize,
    pre: bool,
    f: F,
) -> Vec<PeriodStats> {
    let mut out = vec![column(records, |r| f(&r.initial))];
    for n in 0..periods {
        out.push(column(records, |r| f(if pre { &r.pre[n] } else { &r.post[n] })));
    }
    out
}

impl EnsembleResult {
    /// Aggregate completed records (in trajectory-index order).
    pub fn from_records(config: &ProtocolConfig, records: Vec<TrajectoryRecord>) -> Result<Self> {
        let good: Vec<&TrajectoryRecord> = records.iter().filter(|r| r.valid).collect();
        let excluded = records.len() - good.len();
        if good.is_empty() {
            return Err(SteerError::Numerical(format!(
                "all {} trajectories failed; first error: {}",
                records.len(),
                records.first().and_then(|r| r.error.clone()).unwrap_or_default()
            )));
        }
        let periods = config.periods;
        let times: Vec<f64> = (0..=periods).map(|n| n as f64 * config.dt).collect();
        let energy_pre = stats_series(&good, periods, true, |s| s.energy);
        let energy_post = stats_series(&good, periods, false, |s| s.energy);
        let infidelity_pre = stats_series(&good, periods, true, |s| 1.0 - s.fidelity);
        let infidelity_post = stats_series(&good, periods, false, |s| 1.0 - s.fidelity);
        let entropy_pre = stats_series(&good, periods, true, |s| s.entropy);
        let entropy_post = stats_series(&good, periods, false, |s| s.entropy);
        let mut flips_mean = vec![0.0];
        for n in 0..periods {
            flips_mean.push(column(&good, |r| r.flips(n) as f64).mean);
        }
        let n_sites = good[0].magnetization_pre.first().map_or(0, |m| m.len());
        let mag = |pre: bool| -> Vec<Vec<PeriodStats>> {
            (0..periods)
                .map(|n| {
                    (0..n_sites)
                        .map(|s| {
                            column(&good, |r| {
                                if pre {
                                    r.magnetization_pre[n][s]
                                } else {
                                    r.magnetization_post[n][s]
                                }
                            })
                        })
                        .collect()
                })
                .collect()
        };
        let magnetization_pre = mag(true);
        let magnetization_post = mag(false);
        let mut smoothed_energy = vec![energy_post[0].mean];
        for n in 1..=periods {
            smoothed_energy.push(0.5 * (energy_post[n - 1].mean + energy_pre[n].mean));
        }
        let t_conv = TconvStats::from_values(good.iter().map(|r| r.t_conv).collect());
        let (mut arg, mut s_max) = (0, f64::NEG_INFINITY);
        for (n, s) in entropy_pre.iter().enumerate() {
            if s.mean > s_max {
                s_max = s.mean;
                arg = n;
            }
        }
        let t_max_at_end = arg == periods || arg == 0;
        let mut t_max = if arg == 0 { times[periods] } else { times[arg] };
        if !config.track_entropy {
            s_max = f64::NAN;
            t_max = f64::NAN;
        }
        let stop = config.stop_window.map(|window| {
            let mut fid = Vec::new();
            let mut energy = Vec::new();
            let mut stop_t = Vec::new();
            for r in &good {
                if let Some(p) = r.stop_period {
                    fid.push(r.post[p - 1].fidelity);
                    energy.push(r.post[p - 1].energy);
                    stop_t.push(p as f64 * config.dt);
                }
            }
            let infid: Vec<f64> = fid.iter().map(|f| 1.0 - f).collect();
            let tail = (periods - periods / 4).min(periods.saturating_sub(1))..periods;
            let tail_mean = |f: &dyn Fn(&Sample) -> f64| -> f64 {
                let v: Vec<f64> = good.iter().flat_map(|r| r.post[tail.clone()].iter().map(f)).collect();
                PeriodStats::from_values(&v).mean
            };
            StopSummary {
                window,
                triggered: fid.len(),
                median_fidelity: TconvStats::from_values(fid).median,
                mean_infidelity: PeriodStats::from_values(&infid).mean,
                mean_energy: PeriodStats::from_values(&energy).mean,
                mean_stop_time: PeriodStats::from_values(&stop_t).mean,
                equilibrium_infidelity: tail_mean(&|s| 1.0 - s.fidelity),
                equilibrium_energy: tail_mean(&|s| s.energy),
            }
        });
        Ok(EnsembleResult {
            config: config.clone(),
            trajectories: good.len(),
            excluded,
            dt: config.dt,
            times,
            energy_pre,
            energy_post,
            infidelity_pre,
            infidelity_post,
            entropy_pre,
            entropy_post,
            flips_mean,
            magnetization_pre,
            magnetization_post,
            smoothed_energy,
            t_conv,
            s_max,
            t_max,
            t_max_at_end,
            stop,
            records,
        })
    }

    pub fn periods(&self) -> usize {
        self.times.len() - 1
    }
}

/// Run `config.trajectories` independent trajectories in parallel and
/// aggregate them. Results depend only on `(config, context)`, not on the
/// scheduling.
pub fn run_ensemble(ctx: &SteeringContext, config: &ProtocolConfig) -> Result<EnsembleResult> {
    config.validate()?;
    if config.periods == 0 {
        return Err(SteerError::InvalidArgument("need at least one period".into()));
    }
    let records: Vec<TrajectoryRecord> = (0..config.trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(ctx, config, i))
        .collect();
    for r in records.iter().filter(|r| !r.valid) {
        log::warn!("trajectory {} excluded: {}", r.index, r.error.as_deref().unwrap_or("?"));
    }
    EnsembleResult::from_records(config, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{mapping_set, MappingKind};

    #[test]
    fn stats_basics() {
        let s = PeriodStats::from_values(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.se - (5.0f64 / 12.0).sqrt()).abs() < 1e-14);
        let t = TconvStats::from_values(vec![3.0, 1.0, 2.0, 10.0]);
        assert_eq!(t.median, 2.5);
    }

    #[test]
    fn deterministic_and_bounded() {
        let set = mapping_set(MappingKind::M1).unwrap();
        let ctx = SteeringContext::aklt(3, &set).unwrap();
        let config = ProtocolConfig {
            periods: 8,
            trajectories: 12,
            stop_window: Some(2),
            ..Default::default()
        };
        let a = run_ensemble(&ctx, &config).unwrap();
        let b = run_ensemble(&ctx, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.excluded, 0);
        for (n, e) in a.energy_pre.iter().enumerate() {
            let vals: Vec<f64> = a
                .records
                .iter()
                .map(|r| if n == 0 { r.initial.energy } else { r.pre[n - 1].energy })
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(e.mean >= lo - 1e-12 && e.mean <= hi + 1e-12);
        }
    }
}
