//! Desk-scale simulator for a long-lived superconducting cavity qubit.
//!
//! The crate is organised the way the physics pipeline runs:
//!
//! * [`hilbert`] builds truncated Fock spaces, operators, states and
//!   phase-space functions.
//! * [`dynamics`] assembles the dispersive Hamiltonian, drive terms and
//!   collapse channels and integrates the Lindblad master equation.
//! * [`protocols`] composes dynamics into the experiment sequences
//!   (sideband encoding, parity measurements, cat states, T1/T2/T_d).
//! * [`analysis`] fits experiment curves and evaluates closed-form models.
//! * [`lossbudget`] evaluates cavity loss channels and ring-down arithmetic.
//!
//! Angular rates (rad/s) are used everywhere internally. Conversion to and
//! from `Hz` happens at the I/O boundary.

pub mod analysis;
pub mod dynamics;
mod error;
pub mod hilbert;
pub mod linalg;
pub mod lossbudget;
pub mod protocols;
pub mod units;

pub use error::{Error, Result};

/// Crate version, recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Complex scalar used for every amplitude and matrix element.
pub type C64 = nalgebra::Complex<f64>;
