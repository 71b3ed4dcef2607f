//! Commutation measure of mapping sets and its minimization over the
//! Stiefel manifold of Hamiltonian-sum-preserving coefficient matrices.

mod comm;
mod stiefel;

pub use comm::{
    alpha_sweep, comm_measure, comm_of_matrices, even_odd_variant, AlphaSweep, CommTerm, CommutationReport,
    NormConvention, RealMapping,
};
pub use stiefel::{
    descend_from, optimize_even_odd, optimize_maps, write_trace_csv, Constraint, DescentStatus, OptimizeOptions,
    OptimizeResult, StartRecord, StiefelPoint, TraceRow,
};
