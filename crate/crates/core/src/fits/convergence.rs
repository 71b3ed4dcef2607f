use crate::protocol::{EnsembleResult, TconvStats, TrajectoryRecord};

/// `t_conv` statistics over the valid trajectories.
pub fn extract_convergence(records: &[TrajectoryRecord]) -> TconvStats {
    TconvStats::from_values(records.iter().filter(|r| r.valid).map(|r| r.t_conv).collect())
}

/// Peak of the mean central-bond entropy curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPeak {
    pub s_max: f64,
    pub t_max: f64,
    /// Entanglement buildup rate `S_max / t_max`.
    pub rate: f64,
    /// No interior peak: `t_max` is the end time.
    pub at_end: bool,
}

pub fn extract_entropy_peak(ensemble: &EnsembleResult) -> EntropyPeak {
    EntropyPeak {
        s_max: ensemble.s_max,
        t_max: ensemble.t_max,
        rate: if ensemble.t_max > 0.0 { ensemble.s_max / ensemble.t_max } else { f64::NAN },
        at_end: ensemble.t_max_at_end,
    }
}
