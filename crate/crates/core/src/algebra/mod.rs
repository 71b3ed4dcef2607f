//! Spin-1 operators, the coupled two-site basis, the AKLT Hamiltonian and its
//! ground space, mapping-operator families and the steering Hamiltonian on the
//! interleaved system/ancilla chain.

mod aklt;
mod ancilla;
mod coupled;
mod layout;
mod mapping;
mod operator;
mod opformat;
mod site;
mod steering;

pub use aklt::{
    aklt_bond_polynomial, aklt_bond_projector, aklt_hamiltonian, aklt_ground_space,
    aklt_mps_states, spectral_gap, AkltHamiltonian, GroundSpace,
};
pub use ancilla::{ancilla_operators, AncillaOperators};
pub use coupled::{clebsch_gordan, coupled_pair_basis, CoupledPairBasis};
pub use layout::{ChainLayout, SiteRole};
pub use mapping::{mapping_set, MappingKind, MappingOperatorSet, DEST_LABELS, SOURCE_LABELS};
pub use operator::LocalOperator;
pub use opformat::{parse_operator_set, write_operator_set};
pub use site::{Outcome, SpinOneSite};
pub use steering::{steering_hamiltonian, SteeringHamiltonian};

/// Mixing coefficient of the optimized mapping set `M3`.
pub const M3_ALPHA: f64 = 0.8482;
