//! Dense density-matrix ground truth: the periodic reset channel, the
//! effective Lindbladian in jump and split form, the dephasing master
//! equation and the weak-coupling comparison.

mod channel;
mod compare;
mod density;
mod dephasing;
mod limit;
mod lindblad;

pub use channel::{reset_channel_step, ChannelTrace, ResetChannel};
pub use compare::{
    channel_comparison, compare_with_trace, dephasing_comparison, dephasing_trace, ObservableComparison, OracleComparison,
    NUMERIC_FLOOR,
};
pub use density::DensityMatrix;
pub use dephasing::{dephasing_channel, dephasing_lindblad_evolve, DephasingGenerator};
pub use limit::{lindblad_limit_check, write_limit_csv, LimitRow, LimitTable};
pub use lindblad::{lindblad_evolve, LindbladForm, LindbladGenerator, LindbladOptions};

/// Largest density-matrix dimension handled by the oracles.
pub const ORACLE_MAX_DIM: usize = 243;
