//! The stroboscopic steer–measure–reset loop, dephasing noise, the stopping
//! scheme, the parallel ensemble runner and the commuting toy model.

mod config;
mod context;
mod ensemble;
mod output;
mod toy;
mod trajectory;

pub use config::ProtocolConfig;
pub use context::SteeringContext;
pub use ensemble::{run_ensemble, EnsembleResult, PeriodStats, StopSummary, TconvStats};
pub use output::{config_digest, operator_digest, outcome_log, sha256_hex, write_ensemble_csv};
pub use toy::{commuting_toy_model, sine_law_step, ToyModelResult};
pub use trajectory::{
    apply_dephasing, dephasing_probability, run_trajectory, run_trajectory_state, stop_scheme, Sample, TrajectoryRecord,
};
