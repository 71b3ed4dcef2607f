//! Stroboscopic ancilla-reset steering of spin-1 chains into the AKLT ground
//! space.
//!
//! * [`algebra`] — spin-1 operators, coupled basis, AKLT Hamiltonian and
//!   ground space, mapping sets and the steering Hamiltonian.
//! * [`engine`] — dense state vectors, Krylov propagation, measurement,
//!   reset and Schmidt spectra.
//! * [`protocol`] — steer–measure–reset trajectories, ensembles, noise and
//!   the commuting toy model.
//! * [`oracle`] — exact density-matrix channels and Lindblad references.
//! * [`optimize`] — commutation measure and mapping-set optimization.
//! * [`fits`] — gap and entanglement-entropy fits.

pub mod algebra;
pub mod engine;
pub mod error;
pub mod fits;
pub mod linalg;
pub mod optimize;
pub mod oracle;
pub mod protocol;

pub use num_complex::Complex64 as C64;

pub use algebra::{ChainLayout, LocalOperator, MappingKind, MappingOperatorSet, Outcome};
pub use engine::{InitialState, KrylovOptions, PureState, SchmidtSpectrum};
pub use error::{Result, SteerError};
