//! Cavity reset through the lossy readout resonator.

use serde::{Deserialize, Serialize};

use super::{ExperimentResult, Metadata, ObservableKind};
use crate::dynamics::{
    build_drive, build_static_hamiltonian, collapse_channels, evolve_sampled, DriveKind, Envelope, EvolutionSpec,
    SystemParams,
};
use crate::hilbert::{number, FockSpace, QuantumState, CAVITY, READOUT};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResetRates {
    pub xi_cr: f64,
    /// Cavity–readout beamsplitter rate `Ω_cr` (rad/s).
    pub omega_cr: f64,
    /// Extra cavity decay rate `Ω_cr² T1_r` (1/s).
    pub kappa_driven: f64,
    /// `1 / (1/T1_c + κ_driven)`.
    pub decay_time: f64,
}

/// Rates produced by a reset pump of strength `ξ_cr`:
/// `Ω_cr = 2ξ²√(χ_qr χ)` and `κ_driven = Ω_cr² T1_r`.
pub fn reset_rate(xi_cr: f64, params: &SystemParams) -> Result<ResetRates> {
    if !(xi_cr >= 0.0) || !xi_cr.is_finite() {
        return Err(Error::InvalidParameter(format!("reset drive strength must be >= 0, got {xi_cr}")));
    }
    let omega_cr = 2.0 * xi_cr * xi_cr * (params.chi_qr * params.chi).sqrt();
    let kappa_driven = omega_cr * omega_cr * params.t1_r;
    Ok(ResetRates { xi_cr, omega_cr, kappa_driven, decay_time: 1.0 / (1.0 / params.t1_c + kappa_driven) })
}

/// Inverts [`reset_rate`] for a requested total single-photon decay time.
pub fn reset_drive_for_decay_time(decay_time: f64, params: &SystemParams) -> Result<ResetRates> {
    if !(decay_time > 0.0) || decay_time > params.t1_c {
        return Err(Error::InvalidParameter(format!(
            "decay time {decay_time:e} s must lie in (0, T1_c = {:e} s]",
            params.t1_c
        )));
    }
    let kappa = 1.0 / decay_time - 1.0 / params.t1_c;
    let omega_cr = (kappa / params.t1_r).sqrt();
    let xi_cr = (omega_cr / (2.0 * (params.chi_qr * params.chi).sqrt())).sqrt();
    reset_rate(xi_cr, params)
}

/// Time for passive decay to bring `n_initial` photons down to `n_final`.
pub fn passive_reset_wait(n_initial: f64, n_final: f64, t1_c: f64) -> Result<f64> {
    if !(n_final > 0.0) || !(n_initial >= n_final) || !(t1_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need n_initial >= n_final > 0 and T1_c > 0 (got {n_initial}, {n_final}, {t1_c})"
        )));
    }
    Ok(t1_c * (n_initial / n_final).ln())
}

/// Starts from `|1⟩_c |0⟩_r`, switches the reset pump on and records the
/// cavity photon number at each time.
pub fn simulate_reset_decay(params: &SystemParams, xi_cr: f64, times: &[f64]) -> Result<ExperimentResult> {
    let rates = reset_rate(xi_cr, params)?;
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("reset sample times must be finite and >= 0".into()));
    }
    let space = FockSpace::new(&[(CAVITY, 3), (READOUT, 3)])?;
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let mut h = build_static_hamiltonian(params, &space)?;
    if rates.omega_cr > 0.0 {
        // constant pump in the rotating frame
        let drive = build_drive(DriveKind::ResetCR, params, &space, Envelope::square(rates.omega_cr, 0.0, 1.0, 0.0), 0.0)?;
        h = (h + drive.hamiltonian_at(0.5)?)?;
    }
    let spec = EvolutionSpec::new(h, 0.0, t_end.max(f64::MIN_POSITIVE)).with_collapse(collapse_channels(params, &space)?);
    let mut sorted: Vec<f64> = times.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let traj = evolve_sampled(&QuantumState::basis(&space, &[1, 0])?, &spec, &sorted, &[number(&space, CAVITY)?])?;
    let obs: Vec<f64> = times
        .iter()
        .map(|t| {
            let k = sorted.iter().position(|s| s == t).unwrap_or(0);
            traj.expectations[k][0].re.clamp(0.0, 1.0)
        })
        .collect();
    let meta = Metadata::new(params)
        .set("xi_cr", xi_cr)
        .set("omega_cr", rates.omega_cr)
        .set("kappa_driven", rates.kappa_driven)
        .label("protocol", "reset");
    ExperimentResult::new("time_s", times.to_vec(), "n_cavity", ObservableKind::Probability, obs, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{per_two_pi, MS};

    #[test]
    fn zero_drive() {
        let p = SystemParams::table_i();
        let r = reset_rate(0.0, &p).unwrap();
        assert_eq!(r.omega_cr, 0.0);
        assert_eq!(r.kappa_driven, 0.0);
        assert!((r.decay_time - p.t1_c).abs() < 1e-15);
        assert!(reset_rate(-0.1, &p).is_err());
    }

    #[test]
    fn drive_for_fast_reset() {
        let p = SystemParams::table_i();
        let r = reset_drive_for_decay_time(0.6 * MS, &p).unwrap();
        assert!((per_two_pi(r.omega_cr) - 10.42e3).abs() < 0.01e3, "{}", per_two_pi(r.omega_cr));
        assert!((r.decay_time - 0.6 * MS).abs() < 1e-12);
        let back = reset_rate(r.xi_cr, &p).unwrap();
        assert!((back.kappa_driven - r.kappa_driven).abs() < 1e-9 * r.kappa_driven);
    }

    #[test]
    fn passive_wait() {
        let w = passive_reset_wait(256.0, 0.01, 25.6 * MS).unwrap();
        assert!((w - 0.26).abs() < 0.005);
        assert!(passive_reset_wait(0.01, 256.0, 25.6 * MS).is_err());
    }

    #[test]
    fn simulated_decay_matches_rate() {
        let p = SystemParams::table_i();
        let r = reset_drive_for_decay_time(0.6 * MS, &p).unwrap();
        let times = [0.0, 0.3 * MS, 0.6 * MS, 1.2 * MS];
        let e = simulate_reset_decay(&p, r.xi_cr, &times).unwrap();
        for (t, n) in times.iter().zip(&e.observable) {
            let expect = (-t / r.decay_time).exp();
            assert!((n - expect).abs() < 0.01 * expect.max(0.05), "t={t}: {n} vs {expect}");
        }
    }
}
