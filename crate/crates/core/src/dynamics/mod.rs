//! Hamiltonians, switching profiles and time evolution.

mod hamiltonian;
mod impulsive;
mod prediction;
mod profile;
mod propagate;

pub use hamiltonian::{Apparatus, CompositeHamiltonian, GridApparatus};
pub use impulsive::{impulsive_propagator, BRANCH_MARGIN_WIDTHS};
pub use prediction::{first_order_prediction, system_eigenstate, Prediction};
pub use profile::{CouplingProfile, ProfileShape};
pub use propagate::{evolve_sliced, propagate, PropagationOptions, PropagationReport, MIN_STEPS};
