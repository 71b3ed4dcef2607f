//! Post-processing: ground-space fidelity, convergence statistics, the
//! exponential gap fit and the entanglement-entropy extrapolation.

mod convergence;
mod entropy;
mod fidelity;
mod gap;
mod linear;
mod lm;

pub use convergence::{extract_convergence, extract_entropy_peak, EntropyPeak};
pub use entropy::{
    entropy_curve, fit_entropy_extrapolation, fit_entropy_pair, fit_entropy_window, truncated_entropy,
    EntropyExtrapolation, TanhFit,
};
pub use fidelity::{fidelity, fidelity_pure, FidelityPair};
pub use gap::{aligned_energy, fit_exponential, fit_gap, fit_gap_series, ExpFit, GapFit, GapSeries};
pub use linear::{linear_fit, LinearFit};
pub use lm::{levenberg_marquardt, LmOptions, LmResult};
