//! Experiment sequences built from the dynamics layer.
//!
//! Every sweep is embarrassingly parallel; points are evaluated with rayon
//! and merged back in sweep order, so results do not depend on the thread
//! count.

mod cat;
mod coherence;
mod parity;
mod reset;
mod sideband;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemParams;
use crate::hilbert::{FockSpace, QuantumState, StateData, CAVITY};
use crate::{Error, Result};

pub use cat::{
    cat_decoherence_experiment, cat_delay_grid, prepare_cat, spam_error_budget, vacuum_axis_scale, wigner_cut_experiment,
    CatDecoherence, SpamConfig, SpamEntry,
};
pub use coherence::{measure_t1_experiment, measure_t2_experiment, CoherenceSettings};
pub use parity::{
    calibrate_parity_drive, parity_branches, parity_measure, parity_postselect, ParityCalibration, ParityMode,
    ParityOutcome, SimulatedParity,
};
pub use reset::{passive_reset_wait, reset_drive_for_decay_time, reset_rate, simulate_reset_decay, ResetRates};
pub use sideband::{decode_qubit, encode_qubit, sideband_rate, Encoded, SidebandSettings};

/// What the observable column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// Values in `[0, 1]`.
    Probability,
    /// Values in `[−1, 1]`.
    Parity,
}

/// Parameters and protocol settings recorded with each experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub params: SystemParams,
    pub settings: BTreeMap<String, f64>,
    pub labels: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(params: &SystemParams) -> Self {
        Self { params: params.clone(), settings: BTreeMap::new(), labels: BTreeMap::new() }
    }

    pub fn set(mut self, key: &str, value: f64) -> Self {
        self.settings.insert(key.to_string(), value);
        self
    }

    pub fn label(mut self, key: &str, value: &str) -> Self {
        self.labels.insert(key.to_string(), value.to_string());
        self
    }
}

/// One simulated sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub sweep_name: String,
    pub sweep_values: Vec<f64>,
    pub observable_name: String,
    pub kind: ObservableKind,
    pub observable: Vec<f64>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn new(
        sweep_name: &str,
        sweep_values: Vec<f64>,
        observable_name: &str,
        kind: ObservableKind,
        observable: Vec<f64>,
        metadata: Metadata,
    ) -> Result<Self> {
        let r = Self {
            sweep_name: sweep_name.to_string(),
            sweep_values,
            observable_name: observable_name.to_string(),
            kind,
            observable,
            metadata,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep_values.len() != self.observable.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} sweep values but {} observations",
                self.sweep_values.len(),
                self.observable.len()
            )));
        }
        let (lo, hi) = match self.kind {
            ObservableKind::Probability => (0.0, 1.0),
            ObservableKind::Parity => (-1.0, 1.0),
        };
        const SLACK: f64 = 1e-6;
        if let Some(v) = self.observable.iter().find(|v| !(**v >= lo - SLACK && **v <= hi + SLACK)) {
            return Err(Error::InvalidState(format!("observable {v} outside [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// Replaces each value by a finite-shot estimate (binomial sampling),
    /// reproducible from `seed`.
    pub fn with_shot_noise(&self, shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shot count must be > 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = self.clone();
        for v in out.observable.iter_mut() {
            let p = match self.kind {
                ObservableKind::Probability => *v,
                ObservableKind::Parity => 0.5 * (1.0 + *v),
            }
            .clamp(0.0, 1.0);
            let k = Binomial::new(shots, p)
                .map_err(|e| Error::InvalidParameter(format!("binomial: {e}")))?
                .sample(&mut rng) as f64;
            let est = k / shots as f64;
            *v = match self.kind {
                ObservableKind::Probability => est,
                ObservableKind::Parity => 2.0 * est - 1.0,
            };
        }
        out.metadata.settings.insert("shots".into(), shots as f64);
        out.metadata.settings.insert("noise_seed".into(), seed as f64);
        Ok(out)
    }
}

/// `ρ_c ⊗ |g⟩⟨g|` on `cavity ⊗ transmon(transmon_dim)`.
pub(crate) fn attach_transmon(state: &QuantumState, transmon_dim: usize) -> Result<QuantumState> {
    let labels = state.space().labels();
    if labels.len() != 1 || labels[0] != CAVITY {
        return Err(Error::InvalidState("expected a cavity-only state".into()));
    }
    let d = state.dim();
    let space = FockSpace::cavity_transmon(d, transmon_dim)?;
    let mut g = DVector::zeros(transmon_dim);
    g[0] = crate::linalg::ONE;
    match state.data() {
        StateData::Pure(v) => QuantumState::from_ket(&space, v.kronecker(&g)),
        StateData::Mixed(m) => {
            let gg = &g * g.adjoint();
            QuantumState::from_density_unchecked(&space, m.kronecker(&gg))
        }
    }
}

/// `e^{iH₀t}` applied to a state, for a diagonal `H₀` given by its energies:
/// moves a rotating-frame state into the interaction picture of `H₀`.
pub(crate) fn interaction_picture(state: &QuantumState, energies: &[f64], t: f64) -> Result<QuantumState> {
    let u = DMatrix::from_diagonal(&DVector::from_iterator(
        energies.len(),
        energies.iter().map(|e| crate::C64::from_polar(1.0, e * t)),
    ));
    state.transform(&u)
}
