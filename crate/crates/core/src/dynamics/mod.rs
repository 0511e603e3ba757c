//! Dispersive Hamiltonian, drives, collapse channels and Lindblad evolution.
//!
//! Every mode is treated in the frame rotating at its own bare frequency, so
//! the static Hamiltonian is diagonal in the Fock basis and drives reduce to
//! slowly varying envelopes.

mod channels;
mod evolve;
mod hamiltonian;
mod integrator;
mod params;

pub use channels::{collapse_channels, collapse_channels_with, ChannelToggles, CollapseChannel};
pub use evolve::{
    evolve, evolve_sampled, liouvillian, EvolutionSpec, Method, StaticPropagator, Trajectory,
    CLOSED_FORM_MAX, PROPAGATOR_MAX,
};
pub use hamiltonian::{build_drive, build_static_hamiltonian, DriveKind, DriveTerm, Envelope};
pub use integrator::{Dopri5, Stats, Tolerances};
pub use params::SystemParams;
