//! Cavity parity measurement (ideal projectors or a simulated transmon
//! Ramsey sequence) and the drive-frequency calibration that goes with it.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{attach_transmon, ExperimentResult, Metadata, ObservableKind};
use crate::analysis::{fit_cosine, FitResult};
use crate::dynamics::{
    build_static_hamiltonian, collapse_channels_with, evolve, ChannelToggles, EvolutionSpec, SystemParams,
};
use crate::hilbert::{
    coherent_state, guarded_dim, identity, parity_operator, wigner_origin_parity, FockSpace, Operator,
    QuantumState, CAVITY, TRANSMON,
};
use crate::linalg::{c, ONE, ZERO};
use crate::units::per_two_pi;
use crate::{Error, Result, C64};

/// Settings of the simulated parity measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulatedParity {
    /// Probability that the transmon readout reports the true level.
    pub readout_fidelity: f64,
    /// `ω_q − ω_d` (rad/s): how far below the bare transmon line the drive sits.
    pub drive_detuning: f64,
    pub channels: ChannelToggles,
    pub transmon_dim: usize,
}

impl Default for SimulatedParity {
    fn default() -> Self {
        Self { readout_fidelity: 0.95, drive_detuning: 0.0, channels: ChannelToggles::all(), transmon_dim: 2 }
    }
}

impl SimulatedParity {
    /// Perfect readout, no decoherence.
    pub fn noiseless() -> Self {
        Self { readout_fidelity: 1.0, channels: ChannelToggles::none(), ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.readout_fidelity) {
            return Err(Error::InvalidParameter(format!(
                "readout fidelity {} outside [0.5, 1]",
                self.readout_fidelity
            )));
        }
        if !self.drive_detuning.is_finite() {
            return Err(Error::InvalidParameter("drive detuning is not finite".into()));
        }
        if self.transmon_dim < 2 {
            return Err(Error::InvalidSpace("transmon needs at least two levels".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ParityMode {
    /// Exact projectors `(I ± P)/2`.
    Ideal,
    /// π/2 – wait π/χ – π/2 on the transmon, then a noisy projective readout.
    Simulated(SimulatedParity),
}

#[derive(Debug, Clone)]
pub struct ParityOutcome {
    /// `+1` (even) or `−1` (odd).
    pub outcome: i8,
    pub probability: f64,
    pub post_state: QuantumState,
}

/// Unnormalised cavity states for (even, odd) reported outcomes.
struct Branches {
    prob: [f64; 2],
    states: [Option<QuantumState>; 2],
}

fn check_cavity_only(state: &QuantumState) -> Result<()> {
    let labels = state.space().labels();
    if labels.len() == 1 && labels[0] == CAVITY {
        Ok(())
    } else {
        Err(Error::InvalidState("parity measurement expects a cavity-only state".into()))
    }
}

fn ideal_branches(state: &QuantumState) -> Result<Branches> {
    let space = state.space();
    let id = identity(space);
    let p = parity_operator(space, CAVITY)?;
    let even = (id.clone() + p.clone())?.scale_re(0.5);
    let odd = (id - p)?.scale_re(0.5);
    let (pe, se) = state.measure_with(&even)?;
    let (po, so) = state.measure_with(&odd)?;
    Ok(Branches { prob: [pe, po], states: [se, so] })
}

/// `R_y(π/2)` on the g–e pair of the transmon, identity above.
fn half_pi(space: &std::sync::Arc<FockSpace>, d: usize) -> Result<Operator> {
    let mut m = DMatrix::<C64>::identity(d, d);
    m[(0, 0)] = c(FRAC_1_SQRT_2);
    m[(0, 1)] = c(-FRAC_1_SQRT_2);
    m[(1, 0)] = c(FRAC_1_SQRT_2);
    m[(1, 1)] = c(FRAC_1_SQRT_2);
    Operator::embed(space, TRANSMON, &m)
}

/// First π/2 pulse and free evolution for `wait` (bare transmon frame).
fn ramsey_wait(
    state: &QuantumState,
    params: &SystemParams,
    sim: &SimulatedParity,
    wait: f64,
) -> Result<QuantumState> {
    let joint = attach_transmon(state, sim.transmon_dim)?;
    let space = joint.space().clone();
    let joint = joint.apply_operator(&half_pi(&space, sim.transmon_dim)?)?;
    let spec = EvolutionSpec::new(build_static_hamiltonian(params, &space)?, 0.0, wait)
        .with_collapse(collapse_channels_with(params, &space, &sim.channels)?);
    evolve(&joint, &spec)
}

/// Moves to the drive frame after `wait` and applies the second π/2 pulse.
fn close_ramsey(joint: &QuantumState, detuning: f64, wait: f64, d: usize) -> Result<QuantumState> {
    let space = joint.space().clone();
    let phase = DMatrix::from_fn(d, d, |i, j| if i == j { C64::from_polar(1.0, -detuning * wait * i as f64) } else { ZERO });
    let frame = Operator::embed(&space, TRANSMON, &phase)?;
    joint.apply_operator(&frame)?.apply_operator(&half_pi(&space, d)?)
}

/// (P(e), cavity state given e), (P(not e), cavity state given not e).
fn transmon_split(joint: &QuantumState, d: usize) -> Result<[(f64, Option<QuantumState>); 2]> {
    let space = joint.space().clone();
    let mut pe = DMatrix::<C64>::zeros(d, d);
    pe[(1, 1)] = ONE;
    let mut pg = DMatrix::<C64>::identity(d, d);
    pg[(1, 1)] = ZERO;
    let mut out = [(0.0, None), (0.0, None)];
    for (k, proj) in [pe, pg].iter().enumerate() {
        let (p, s) = joint.measure_with(&Operator::embed(&space, TRANSMON, proj)?)?;
        out[k] = (p, s.map(|s| s.partial_trace(&[CAVITY])).transpose()?);
    }
    Ok(out)
}

fn weighted(parts: &[(f64, &Option<QuantumState>)]) -> Result<Option<QuantumState>> {
    let mut acc: Option<DMatrix<C64>> = None;
    let mut space = None;
    for (w, s) in parts {
        if let Some(s) = s {
            if *w > 0.0 {
                let m = s.to_density() * c(*w);
                acc = Some(match acc {
                    Some(a) => a + m,
                    None => m,
                });
                space = Some(s.space().clone());
            }
        }
    }
    match (acc, space) {
        (Some(m), Some(sp)) => Ok(Some(QuantumState::from_density_unchecked(&sp, m)?)),
        _ => Ok(None),
    }
}

fn simulated_branches(state: &QuantumState, params: &SystemParams, sim: &SimulatedParity) -> Result<Branches> {
    sim.validate()?;
    if !(params.chi > 0.0) {
        return Err(Error::InvalidParameter("parity measurement needs chi > 0".into()));
    }
    let wait = PI / params.chi;
    let joint = ramsey_wait(state, params, sim, wait)?;
    let joint = close_ramsey(&joint, sim.drive_detuning, wait, sim.transmon_dim)?;
    let [(p_e, s_e), (p_g, s_g)] = transmon_split(&joint, sim.transmon_dim)?;
    // even parity lands in e unless the drive frame flips the fringe
    let even_is_e = (sim.drive_detuning * wait).cos() >= 0.0;
    let ((p_even_lvl, s_even_lvl), (p_odd_lvl, s_odd_lvl)) =
        if even_is_e { ((p_e, s_e), (p_g, s_g)) } else { ((p_g, s_g), (p_e, s_e)) };
    let f = sim.readout_fidelity;
    let p_even = f * p_even_lvl + (1.0 - f) * p_odd_lvl;
    let p_odd = f * p_odd_lvl + (1.0 - f) * p_even_lvl;
    let norm = |w: f64, p: f64| if p > 0.0 { w / p } else { 0.0 };
    let even = weighted(&[
        (norm(f * p_even_lvl, p_even), &s_even_lvl),
        (norm((1.0 - f) * p_odd_lvl, p_even), &s_odd_lvl),
    ])?;
    let odd = weighted(&[
        (norm(f * p_odd_lvl, p_odd), &s_odd_lvl),
        (norm((1.0 - f) * p_even_lvl, p_odd), &s_even_lvl),
    ])?;
    Ok(Branches { prob: [p_even, p_odd], states: [even, odd] })
}

fn branches(state: &QuantumState, params: &SystemParams, mode: &ParityMode) -> Result<Branches> {
    check_cavity_only(state)?;
    match mode {
        ParityMode::Ideal => ideal_branches(state),
        ParityMode::Simulated(sim) => simulated_branches(state, params, sim),
    }
}

/// Probabilities of reporting (even, odd).
pub fn parity_branches(state: &QuantumState, params: &SystemParams, mode: &ParityMode) -> Result<(f64, f64)> {
    let b = match mode {
        ParityMode::Ideal => {
            check_cavity_only(state)?;
            let p = wigner_origin_parity(state, CAVITY)?;
            return Ok((0.5 * (1.0 + p), 0.5 * (1.0 - p)));
        }
        _ => branches(state, params, mode)?,
    };
    Ok((b.prob[0], b.prob[1]))
}

fn outcome(b: Branches, even: bool) -> Result<ParityOutcome> {
    let k = if even { 0 } else { 1 };
    let probability = b.prob[k];
    let [se, so] = b.states;
    let post = if even { se } else { so };
    match post {
        Some(post_state) if probability > 1e-12 => {
            Ok(ParityOutcome { outcome: if even { 1 } else { -1 }, probability, post_state })
        }
        _ => Err(Error::InvalidState(format!(
            "{} outcome has vanishing probability {probability:e}",
            if even { "even" } else { "odd" }
        ))),
    }
}

/// Samples an outcome with its Born probability.
pub fn parity_measure<R: Rng + ?Sized>(
    state: &QuantumState,
    params: &SystemParams,
    mode: &ParityMode,
    rng: &mut R,
) -> Result<ParityOutcome> {
    let b = branches(state, params, mode)?;
    let even = rng.random::<f64>() < b.prob[0];
    outcome(b, even)
}

/// Conditions on the requested outcome.
pub fn parity_postselect(
    state: &QuantumState,
    params: &SystemParams,
    mode: &ParityMode,
    even: bool,
) -> Result<ParityOutcome> {
    outcome(branches(state, params, mode)?, even)
}

#[derive(Debug, Clone)]
pub struct ParityCalibration {
    pub experiment: ExperimentResult,
    pub fit: FitResult,
    /// Fitted fringe period in detuning (Hz).
    pub period_hz: f64,
    /// Fringe maximum nearest the mean transmon shift `n̄χ` (rad/s).
    pub optimal_detuning: f64,
}

/// Displaces to `|α⟩`, runs π/2 – wait 2π/χ – π/2 for every drive detuning
/// and records `P(e)`. Detunings are `ω_q − ω_d` in rad/s.
pub fn calibrate_parity_drive(
    params: &SystemParams,
    alpha: C64,
    detunings: &[f64],
    sim: &SimulatedParity,
) -> Result<ParityCalibration> {
    sim.validate()?;
    if detunings.len() < 5 {
        return Err(Error::InvalidParameter("calibration needs at least 5 detunings".into()));
    }
    let nbar = alpha.norm_sqr();
    let shift = nbar * params.chi;
    let (lo, hi) = detunings.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), d| (l.min(*d), h.max(*d)));
    if shift < lo || shift > hi {
        return Err(Error::InvalidParameter(format!(
            "detuning grid [{lo:e}, {hi:e}] does not span the expected shift {shift:e} rad/s"
        )));
    }
    let space = FockSpace::cavity(guarded_dim(nbar).max(4))?;
    let wait = 2.0 * PI / params.chi;
    let joint = ramsey_wait(&coherent_state(&space, CAVITY, alpha)?, params, sim, wait)?;
    let f = sim.readout_fidelity;
    let p_e: Vec<f64> = detunings
        .par_iter()
        .map(|&d| {
            let closed = close_ramsey(&joint, d, wait, sim.transmon_dim)?;
            let pop = closed.populations(TRANSMON)?[1];
            Ok((f * pop + (1.0 - f) * (1.0 - pop)).clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    let x_hz: Vec<f64> = detunings.iter().map(|d| per_two_pi(*d)).collect();
    let fit = fit_cosine(&x_hz, &p_e)?;
    let freq = fit.value("frequency");
    let phi = fit.value("phase");
    let target = per_two_pi(shift);
    let k = (target * freq + phi / (2.0 * PI)).round();
    let optimal_hz = (k - phi / (2.0 * PI)) / freq;
    let meta = Metadata::new(params)
        .set("alpha_re", alpha.re)
        .set("alpha_im", alpha.im)
        .set("wait_s", wait)
        .set("readout_fidelity", f)
        .label("protocol", "parity_calibration");
    let experiment = ExperimentResult::new("detuning_hz", x_hz, "p_e", ObservableKind::Probability, p_e, meta)?;
    Ok(ParityCalibration { experiment, fit, period_hz: 1.0 / freq, optimal_detuning: 2.0 * PI * optimal_hz })
}
