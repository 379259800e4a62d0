//! Two-atom cavity-QED teleportation with optical Stern-Gerlach translational
//! channels.
//!
//! Atom 2 carries an unknown qubit; atom 1 starts excited. Each crosses a
//! resonant cavity mode in turn, and the gradient of the mode function splits
//! every atom into dressed-state branches that leave along different paths.
//! Counting photons, reading the internal state of atom 2 and locating both
//! atoms decides whether the qubit now sits on atom 1.

pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod grid_oracle;
pub mod params;
pub mod phase_space;
pub mod protocol;
pub mod qubit;
pub mod state;

pub use error::{Error, Result};
pub use gaussian::{gaussian_overlap, minimum_uncertainty_packet, GaussianState};
pub use params::{PhysicalParams, Scales, HBAR};
pub use phase_space::{OmegaConvention, Region};
pub use qubit::QubitState;
pub use state::{state_norm, BranchIndex, CompositeState, InternalLabel, Sign};

/// Parameter set with validation, as a free function.
pub fn make_params(mass: f64, epsilon: f64, k: f64) -> Result<PhysicalParams> {
    PhysicalParams::new(mass, epsilon, k)
}
