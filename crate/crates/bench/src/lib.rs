//! Fixtures shared by the criterion benchmarks.

use steer_core::algebra::{mapping_set, steering_hamiltonian, SteeringHamiltonian};
use steer_core::{ChainLayout, InitialState, MappingKind, PureState};

pub use steer_core;

/// Steering Hamiltonian (M1 maps) and a random product state on `ls` sites.
pub fn fixture(ls: usize) -> (SteeringHamiltonian, PureState) {
    let layout = ChainLayout::spin_one(ls).expect("layout");
    let set = mapping_set(MappingKind::M1).expect("maps");
    let h = steering_hamiltonian(&layout, &set, 1.0).expect("hamiltonian");
    let psi = PureState::new(&layout, &InitialState::RandomProduct(1)).expect("state");
    (h, psi)
}
