//! Truncated Fock spaces, operators on them, states, and phase-space tools.
//!
//! Subsystems are ordered; the first subsystem is the most significant factor
//! of the Kronecker product. That order never changes once a [`FockSpace`] is
//! built, and every [`Operator`] and [`QuantumState`] refers back to its space
//! through an `Arc` so the order is shared rather than copied.

mod operator;
mod phase_space;
mod state;

use std::sync::Arc;

pub use operator::{
    annihilation, creation, displacement, identity, number, parity_operator, Operator,
};
pub use phase_space::{wigner, wigner_origin_parity, WignerConvention};
pub use state::{cat_state, coherent_amplitudes, coherent_state, QuantumState, StateData};

use crate::{Error, Result};

pub const CAVITY: &str = "cavity";
pub const TRANSMON: &str = "transmon";
pub const READOUT: &str = "readout";

/// Tensor product of truncated oscillator spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockSpace {
    dims: Vec<usize>,
    labels: Vec<String>,
}

impl FockSpace {
    /// Builds a space from `(label, dimension)` pairs in Kronecker order.
    pub fn new(subsystems: &[(&str, usize)]) -> Result<Arc<Self>> {
        if subsystems.is_empty() {
            return Err(Error::InvalidSpace("no subsystems".into()));
        }
        let mut labels: Vec<String> = Vec::with_capacity(subsystems.len());
        let mut dims = Vec::with_capacity(subsystems.len());
        for (label, dim) in subsystems {
            if *dim < 2 {
                return Err(Error::InvalidSpace(format!(
                    "subsystem `{label}` has dimension {dim}; at least 2 required"
                )));
            }
            if labels.iter().any(|l| l == label) {
                return Err(Error::InvalidSpace(format!("duplicate subsystem `{label}`")));
            }
            labels.push((*label).to_string());
            dims.push(*dim);
        }
        Ok(Arc::new(Self { dims, labels }))
    }

    /// Cavity-only space.
    pub fn cavity(dim: usize) -> Result<Arc<Self>> {
        Self::new(&[(CAVITY, dim)])
    }

    /// Cavity ⊗ transmon.
    pub fn cavity_transmon(cavity_dim: usize, transmon_dim: usize) -> Result<Arc<Self>> {
        Self::new(&[(CAVITY, cavity_dim), (TRANSMON, transmon_dim)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownSubsystem(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?])
    }

    /// Distance in the flat index between neighbouring levels of subsystem `k`.
    pub fn stride(&self, k: usize) -> usize {
        self.dims[k + 1..].iter().product()
    }

    /// Flat index of a product basis state.
    pub fn basis_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} occupations for {} subsystems",
                occupations.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (k, (&n, &d)) in occupations.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(Error::DimensionMismatch(format!(
                    "level {n} outside `{}` (dim {d})",
                    self.labels[k]
                )));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Occupation of subsystem `k` in flat basis state `index`.
    #[inline]
    pub fn occupation(&self, index: usize, k: usize) -> usize {
        (index / self.stride(k)) % self.dims[k]
    }
}

/// Same space (by identity or by value).
pub(crate) fn same_space(a: &Arc<FockSpace>, b: &Arc<FockSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Mean photon number the truncation guard allows for dimension `dim`:
/// the guard `n̄ + 5√n̄ + 10 ≤ dim` keeps the Poisson tail below ~1e-8.
pub fn truncation_guard(label: &str, mean_photons: f64, dim: usize) -> Result<()> {
    let m = mean_photons.max(0.0);
    let needed = m + 5.0 * m.sqrt() + 10.0;
    if needed <= dim as f64 {
        Ok(())
    } else {
        Err(Error::Truncation {
            subsystem: label.to_string(),
            mean_photons: m,
            required: needed.ceil() as usize,
            dim,
        })
    }
}

/// Smallest dimension that passes the truncation guard for `mean_photons`.
pub fn guarded_dim(mean_photons: f64) -> usize {
    let m = mean_photons.max(0.0);
    (m + 5.0 * m.sqrt() + 10.0).ceil() as usize
}
