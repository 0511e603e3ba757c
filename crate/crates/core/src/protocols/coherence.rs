//! Single-photon T1 and Ramsey-style T2 of the cavity qubit.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sideband::{decode_qubit, encode_qubit, Encoded, SidebandSettings};
use super::{interaction_picture, ExperimentResult, Metadata, ObservableKind};
use crate::dynamics::{build_static_hamiltonian, collapse_channels, evolve, EvolutionSpec, SystemParams};
use crate::hilbert::TRANSMON;
use crate::linalg::{c, ZERO};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoherenceSettings {
    pub sideband: SidebandSettings,
    /// Artificial Ramsey detuning imprinted on the decode phase (Hz).
    pub fringe_detuning: f64,
}

impl Default for CoherenceSettings {
    fn default() -> Self {
        Self { sideband: SidebandSettings::default(), fringe_detuning: 40.0 }
    }
}

fn check_delays(delays: &[f64]) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::InvalidParameter("no delays".into()));
    }
    if let Some(d) = delays.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::InvalidParameter(format!("delay {d} must be finite and >= 0")));
    }
    Ok(())
}

/// Idles for `delay` after `enc.end`, then decodes with `phase`.
/// Returns the transmon density matrix in the interaction picture of `H₀`.
fn idle_and_decode(
    enc: &Encoded,
    params: &SystemParams,
    sb: &SidebandSettings,
    delay: f64,
    phase: f64,
) -> Result<nalgebra::DMatrix<crate::C64>> {
    let space = enc.state.space().clone();
    let h0 = build_static_hamiltonian(params, &space)?;
    let idled = if delay > 0.0 {
        let spec = EvolutionSpec::new(h0.clone(), enc.end, enc.end + delay)
            .with_collapse(collapse_channels(params, &space)?);
        evolve(&enc.state, &spec)?
    } else {
        enc.state.clone()
    };
    let (decoded, end) = decode_qubit(&idled, params, sb, enc.end + delay, phase)?;
    let energies: Vec<f64> = h0.diagonal().iter().map(|z| z.re).collect();
    interaction_picture(&decoded, &energies, end)?.reduced_density(TRANSMON)
}

/// Encodes `|1⟩`, idles for each delay, decodes and records `P(f)`.
pub fn measure_t1_experiment(
    params: &SystemParams,
    delays: &[f64],
    settings: &CoherenceSettings,
) -> Result<ExperimentResult> {
    check_delays(delays)?;
    let sb = settings.sideband;
    let enc = encode_qubit(ZERO, c(1.0), params, &sb, true)?;
    let obs: Vec<f64> = delays
        .par_iter()
        .map(|&d| Ok(idle_and_decode(&enc, params, &sb, d, 0.0)?[(2, 2)].re.clamp(0.0, 1.0)))
        .collect::<Result<_>>()?;
    let meta = Metadata::new(params)
        .set("xi", sb.xi)
        .set("ramp_s", sb.ramp)
        .set("cavity_dim", sb.cavity_dim as f64)
        .set("transmon_dim", sb.transmon_dim as f64)
        .set("encode_fidelity", enc.fidelity)
        .label("protocol", "t1");
    ExperimentResult::new("delay_s", delays.to_vec(), "p_f", ObservableKind::Probability, obs, meta)
}

/// Encodes `(|0⟩ + |1⟩)/√2`, idles, decodes along an axis advanced by
/// `2π·fringe_detuning·delay` and records the overlap with `(|g⟩ + |f⟩)/√2`.
pub fn measure_t2_experiment(
    params: &SystemParams,
    delays: &[f64],
    settings: &CoherenceSettings,
) -> Result<ExperimentResult> {
    check_delays(delays)?;
    if !settings.fringe_detuning.is_finite() {
        return Err(Error::InvalidParameter("fringe detuning is not finite".into()));
    }
    let sb = settings.sideband;
    let enc = encode_qubit(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), params, &sb, true)?;
    let obs: Vec<f64> = delays
        .par_iter()
        .map(|&d| {
            let phase = 2.0 * PI * settings.fringe_detuning * d;
            let rho = idle_and_decode(&enc, params, &sb, d, phase)?;
            let p = 0.5 * (rho[(0, 0)] + rho[(2, 2)] + rho[(0, 2)] + rho[(2, 0)]).re;
            Ok(p.clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    let meta = Metadata::new(params)
        .set("xi", sb.xi)
        .set("ramp_s", sb.ramp)
        .set("fringe_detuning_hz", settings.fringe_detuning)
        .set("cavity_dim", sb.cavity_dim as f64)
        .set("transmon_dim", sb.transmon_dim as f64)
        .set("encode_fidelity", enc.fidelity)
        .label("protocol", "t2");
    ExperimentResult::new("delay_s", delays.to_vec(), "p_plus", ObservableKind::Probability, obs, meta)
}
