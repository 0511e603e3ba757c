//! Qubit encoding through the `|0,f⟩ ↔ |1,g⟩` sideband.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_drive, build_static_hamiltonian, collapse_channels, evolve, DriveKind, Envelope, EvolutionSpec,
    SystemParams, Tolerances,
};
use crate::hilbert::{FockSpace, QuantumState, CAVITY, TRANSMON};
use crate::units::NS;
use crate::{Error, Result, C64};

/// Sideband interaction rate `Ω = 2ξ√(Kq χ)`.
pub fn sideband_rate(xi: f64, params: &SystemParams) -> Result<f64> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!("sideband drive strength must be >= 0, got {xi}")));
    }
    Ok(2.0 * xi * (params.k_q * params.chi).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SidebandSettings {
    /// Dimensionless pump strength ξ.
    pub xi: f64,
    /// Cosine rise/fall time of the square pulse (s).
    pub ramp: f64,
    pub cavity_dim: usize,
    pub transmon_dim: usize,
    pub tolerance_scale: f64,
}

impl Default for SidebandSettings {
    fn default() -> Self {
        Self { xi: 0.0961, ramp: 10.0 * NS, cavity_dim: 4, transmon_dim: 3, tolerance_scale: 1.0 }
    }
}

impl SidebandSettings {
    pub fn space(&self) -> Result<Arc<FockSpace>> {
        if self.transmon_dim < 3 {
            return Err(Error::InvalidSpace("the sideband needs the transmon f level (dim >= 3)".into()));
        }
        FockSpace::cavity_transmon(self.cavity_dim, self.transmon_dim)
    }

    /// Flat-top-equivalent π-swap time `π/Ω`.
    pub fn swap_time(&self, params: &SystemParams) -> Result<f64> {
        let omega = sideband_rate(self.xi, params)?;
        if omega == 0.0 {
            return Err(Error::InvalidParameter("sideband rate is zero".into()));
        }
        Ok(std::f64::consts::PI / omega)
    }

    /// Total pulse length including both ramps' flanks.
    pub fn pulse_length(&self, params: &SystemParams) -> Result<f64> {
        Ok(self.swap_time(params)? + self.ramp)
    }
}

/// Result of [`encode_qubit`].
#[derive(Debug, Clone)]
pub struct Encoded {
    pub state: QuantumState,
    /// Overlap with `(a|0⟩ + b|1⟩)|g⟩`.
    pub fidelity: f64,
    /// Time at which the pulse ends.
    pub end: f64,
}

/// One π-area sideband pulse starting at `start` with drive phase `phase`.
/// Phase `π/2` maps `|0,f⟩ → |1,g⟩`, phase `−π/2` maps `|1,g⟩ → |0,f⟩`, both
/// without extra phase factors.
pub(crate) fn sideband_pulse(
    state: &QuantumState,
    params: &SystemParams,
    settings: &SidebandSettings,
    start: f64,
    phase: f64,
) -> Result<(QuantumState, f64)> {
    let space = state.space().clone();
    let omega = sideband_rate(settings.xi, params)?;
    let env = Envelope::square_with_area(omega, std::f64::consts::PI, start, settings.ramp)?.with_phase(phase);
    let (_, end) = env.support().ok_or_else(|| Error::InvalidParameter("empty sideband pulse".into()))?;
    let drive = build_drive(DriveKind::SidebandQqC, params, &space, env, 0.0)?;
    let spec = EvolutionSpec::new(build_static_hamiltonian(params, &space)?, start, end)
        .with_drives(vec![drive])
        .with_collapse(collapse_channels(params, &space)?)
        .with_tolerances(Tolerances::default().scaled(settings.tolerance_scale));
    Ok((evolve(state, &spec)?, end))
}

/// Starts from `|0⟩(a|g⟩ + b|f⟩)` and swaps the transmon excitation into the
/// cavity. With `with_noise = false` every decoherence channel is disabled.
pub fn encode_qubit(
    a: C64,
    b: C64,
    params: &SystemParams,
    settings: &SidebandSettings,
    with_noise: bool,
) -> Result<Encoded> {
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("|a|² + |b|² = {norm}, expected 1")));
    }
    let space = settings.space()?;
    let p = if with_noise { params.clone() } else { params.noiseless() };
    let mut q = DVector::zeros(settings.transmon_dim);
    q[0] = a;
    q[2] = b;
    let init = QuantumState::with_local(&space, TRANSMON, q)?;
    let (state, end) = sideband_pulse(&init, &p, settings, 0.0, FRAC_PI_2)?;

    let mut c = DVector::zeros(settings.cavity_dim);
    c[0] = a;
    c[1] = b;
    let target = QuantumState::with_local(&space, CAVITY, c)?;
    let fidelity = state.fidelity(&target)?;
    Ok(Encoded { state, fidelity, end })
}

/// Maps `|1,g⟩ → |0,f⟩` with a pulse starting at `start`. `phase_offset`
/// rotates the decoding axis (used to imprint Ramsey fringes).
pub fn decode_qubit(
    state: &QuantumState,
    params: &SystemParams,
    settings: &SidebandSettings,
    start: f64,
    phase_offset: f64,
) -> Result<(QuantumState, f64)> {
    sideband_pulse(state, params, settings, start, -FRAC_PI_2 + phase_offset)
}
