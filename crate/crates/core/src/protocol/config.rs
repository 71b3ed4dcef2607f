use std::fmt::Write as _;

use crate::engine::InitialState;
use crate::error::{Result, SteerError};

/// Settings of one protocol ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    /// Reset interval δt (units of 1/J).
    pub dt: f64,
    pub periods: usize,
    /// Dephasing rate ε per unit time.
    pub eps: f64,
    /// Noise slice length; `None` means δt/20.
    pub slice: Option<f64>,
    /// Stop-scheme window in periods (`t_wait / δt`); `None` disables it.
    pub stop_window: Option<usize>,
    pub initial: InitialState,
    pub seed: u64,
    pub trajectories: usize,
    /// Krylov propagation tolerance per period.
    pub tol: f64,
    /// Entropy cut; `None` means the central cut.
    pub entropy_bond: Option<usize>,
    /// Compute the Schmidt entropy at every sample (NaN when off).
    pub track_entropy: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            dt: std::f64::consts::FRAC_PI_2,
            periods: 40,
            eps: 0.0,
            slice: None,
            stop_window: None,
            initial: InitialState::AllUp,
            seed: 1,
            trajectories: 128,
            tol: 1e-10,
            entropy_bond: None,
            track_entropy: true,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SteerError::InvalidArgument(m));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("reset interval must be positive, got {}", self.dt));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return bad(format!("dephasing rate must be >= 0, got {}", self.eps));
        }
        if let Some(s) = self.slice {
            if !(s > 0.0) || s > self.dt * (1.0 + 1e-12) {
                return bad(format!("noise slice must lie in (0, dt], got {s}"));
            }
        }
        if self.stop_window == Some(0) {
            return bad("stop window must span at least one period".into());
        }
        if self.trajectories == 0 {
            return bad("trajectory count must be >= 1".into());
        }
        if !(self.tol > 0.0) {
            return bad(format!("propagation tolerance must be positive, got {}", self.tol));
        }
        Ok(())
    }

    /// Number of equal noise slices per period.
    pub fn slices(&self) -> usize {
        if self.eps == 0.0 {
            return 1;
        }
        let s = self.slice.unwrap_or(self.dt / 20.0);
        ((self.dt / s) - 1e-9).ceil().max(1.0) as usize
    }

    /// Canonical `key = value` text (stable field order), used for digests
    /// and manifests.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "protocol.dt = {:?}", self.dt);
        let _ = writeln!(s, "protocol.periods = {}", self.periods);
        let _ = writeln!(s, "protocol.initial = {}", self.initial.label());
        let _ = writeln!(s, "noise.eps = {:?}", self.eps);
        let _ = writeln!(s, "noise.slices = {}", self.slices());
        match self.stop_window {
            Some(w) => {
                let _ = writeln!(s, "stop.twait_periods = {w}");
            }
            None => {
                let _ = writeln!(s, "stop.twait_periods = off");
            }
        }
        let _ = writeln!(s, "ensemble.traj = {}", self.trajectories);
        let _ = writeln!(s, "ensemble.seed = {}", self.seed);
        let _ = writeln!(s, "engine.tol = {:?}", self.tol);
        if let Some(b) = self.entropy_bond {
            let _ = writeln!(s, "entropy.bond = {b}");
        }
        if !self.track_entropy {
            let _ = writeln!(s, "entropy.track = false");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = ProtocolConfig::default();
        ok.validate().unwrap();
        let mut c = ok.clone();
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.slice = Some(ok.dt * 2.0);
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.stop_window = Some(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn slices_follow_slice_length() {
        let mut c = ProtocolConfig {
            eps: 0.01,
            ..Default::default()
        };
        assert_eq!(c.slices(), 20);
        c.slice = Some(c.dt / 3.0);
        assert_eq!(c.slices(), 3);
        c.eps = 0.0;
        assert_eq!(c.slices(), 1);
    }
}
