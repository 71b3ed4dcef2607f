//! Dense pure-state engine for the interleaved chain: sparse local operator
//! application, Krylov propagation, projective measurement, reset and
//! Schmidt analysis.

mod krylov;
mod operator;
mod plan;
mod schmidt;
mod snapshot;
mod state;

pub use krylov::{evolve, lowest_eigenvalues, KrylovOptions, PropagationReport};
pub use operator::{ChainOperator, LinearOperator};
pub use plan::SitePlan;
pub use schmidt::{schmidt, SchmidtSpectrum};
pub use snapshot::{read_snapshot, write_snapshot};
pub use state::{InitialState, PureState, RegisterSplit};
