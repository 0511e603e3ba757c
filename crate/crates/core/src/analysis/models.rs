//! Closed-form figures of merit: thermal dephasing, T2 budget, cat parity
//! decay and Kerr/critical-photon estimates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemParams;
use crate::{Error, Result, C64};

/// Cavity dephasing rate induced by thermal transmon jumps (rad/s).
///
/// Written as `½ Re[√((Γ + iχ)² + 4iχn̄Γ) − Γ]`, which equals the usual
/// `(Γ/2) Re[√((1 + iχ/Γ)² + 4iχn̄/Γ) − 1]` and stays finite at `Γ = 0`.
/// The principal square root is the branch that vanishes at `n̄ = 0`.
pub fn thermal_dephasing_rate(chi: f64, gamma_down: f64, nth: f64) -> Result<f64> {
    for (name, v) in [("chi", chi), ("gamma_down", gamma_down), ("nth", nth)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let z = C64::new(gamma_down, chi);
    let delta = C64::new(0.0, 4.0 * chi * nth * gamma_down);
    if delta.im == 0.0 {
        return Ok(0.0);
    }
    // √(z² + δ) − z rewritten to avoid cancellation
    let root = (z * z + delta).sqrt();
    Ok(0.5 * (delta / (root + z)).re.max(0.0))
}

/// A measured value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

impl From<f64> for Measured {
    fn from(v: f64) -> Self {
        Self::exact(v)
    }
}

/// Split of the cavity coherence rate `1/T2 = 1/2T1 + 1/T↑ + 1/Tφ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingBudget {
    pub one_over_2t1: f64,
    pub heating_rate: f64,
    /// Residual rate after clamping to zero.
    pub residual_rate: f64,
    /// Residual before clamping.
    pub residual_raw: f64,
    pub residual_sigma: f64,
    /// `1/(residual + σ)`; a one-sigma lower bound on `Tφ`.
    pub t_phi_lower_bound: f64,
    /// `1/residual` when the residual exceeds its uncertainty.
    pub t_phi: Option<f64>,
    /// `1/(one_over_2t1 + heating_rate + residual_rate)`.
    pub predicted_t2: f64,
}

/// Uncertainty-aware decomposition of a measured cavity `T2`.
///
/// Negative residuals within two sigma are clamped to zero; anything lower is
/// reported as unphysical.
pub fn t2_decomposition(
    t1_c: impl Into<Measured>,
    t2_c: impl Into<Measured>,
    t_up_q: impl Into<Measured>,
) -> Result<DephasingBudget> {
    let (t1, t2, tup) = (t1_c.into(), t2_c.into(), t_up_q.into());
    for (name, m) in [("T1", t1), ("T2", t2), ("T_up", tup)] {
        if !(m.value > 0.0) || !(m.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be > 0 with sigma >= 0")));
        }
    }
    let one_over_2t1 = 0.5 / t1.value;
    let heating_rate = if tup.value.is_infinite() { 0.0 } else { 1.0 / tup.value };
    let raw = 1.0 / t2.value - one_over_2t1 - heating_rate;
    let heating_sigma = if tup.value.is_infinite() { 0.0 } else { tup.sigma / (tup.value * tup.value) };
    let sigma = ((t2.sigma / (t2.value * t2.value)).powi(2)
        + (t1.sigma / (2.0 * t1.value * t1.value)).powi(2)
        + heating_sigma.powi(2))
    .sqrt();
    // float round-off in exactly balanced inputs
    let noise = 1e-12 / t2.value;
    if raw < -2.0 * sigma - noise {
        return Err(Error::Unphysical(format!(
            "1/T2 falls short of 1/2T1 + 1/T_up by {:.3e} /s (sigma {sigma:.3e} /s)",
            -raw
        )));
    }
    let residual_rate = raw.max(0.0);
    let bound_rate = residual_rate + sigma;
    Ok(DephasingBudget {
        one_over_2t1,
        heating_rate,
        residual_rate,
        residual_raw: raw,
        residual_sigma: sigma,
        t_phi_lower_bound: if bound_rate > noise { 1.0 / bound_rate } else { f64::INFINITY },
        t_phi: (raw > sigma && raw > noise).then(|| 1.0 / raw),
        predicted_t2: 1.0 / (one_over_2t1 + heating_rate + residual_rate),
    })
}

/// Predicted cavity `T2` from `T1` and the thermal dephasing rate alone.
pub fn predicted_t2(t1_c: f64, chi: f64, gamma_down: f64, nth: f64) -> Result<f64> {
    if !(t1_c > 0.0) {
        return Err(Error::InvalidParameter("T1 must be > 0".into()));
    }
    Ok(1.0 / (0.5 / t1_c + thermal_dephasing_rate(chi, gamma_down, nth)?))
}

/// Wigner value at the origin of a cat `N(|α⟩ ± |−α⟩)` after decaying for `dt`,
/// in the normalisation where the vacuum reads `4/π`.
pub fn cat_parity_vs_time(nbar: f64, even: bool, t1_c: f64, dt: f64) -> Result<f64> {
    if !(nbar >= 0.0) || !(dt >= 0.0) || !(t1_c > 0.0) {
        return Err(Error::InvalidParameter("need nbar >= 0, dt >= 0, T1 > 0".into()));
    }
    let sign = if even { 1.0 } else { -1.0 };
    let norm = 1.0 + sign * (-2.0 * nbar).exp();
    if norm <= 0.0 {
        return Err(Error::InvalidParameter("odd cat needs nbar > 0".into()));
    }
    let decay = (-dt / t1_c).exp();
    let bracket = (-2.0 * nbar * decay).exp() + sign * (-2.0 * nbar * (1.0 - decay)).exp();
    Ok(4.0 / (PI * norm) * bracket)
}

/// Short-time, large-cat form `±(4/π) e^{−2n̄Δt/T1}`.
pub fn cat_parity_limit(nbar: f64, even: bool, t1_c: f64, dt: f64) -> f64 {
    let sign = if even { 1.0 } else { -1.0 };
    sign * 4.0 / PI * (-2.0 * nbar * dt / t1_c).exp()
}

/// `T_d = T1/2n̄ = 2T1/S`.
pub fn cat_decoherence_time(size: f64, t1_c: f64) -> f64 {
    2.0 * t1_c / size
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrEstimates {
    /// `χ²/4Kq` (rad/s).
    pub k_c: f64,
    /// Phase-collapse time using the device Kerr `params.k_c` (s).
    pub t_col: f64,
    /// `Kq/6χ`.
    pub n_crit: f64,
    /// `1/(√n_crit χ)` (s).
    pub t_g_min: f64,
}

/// `π/(2√n̄ Kc)`.
pub fn collapse_time(nbar: f64, k_c: f64) -> f64 {
    PI / (2.0 * nbar.sqrt() * k_c)
}

/// Kerr and dispersive-limit figures of merit. The collapse time uses the
/// device Kerr `params.k_c`, or the `χ²/4Kq` estimate when that is zero.
pub fn kerr_estimates(params: &SystemParams, nbar: f64) -> Result<KerrEstimates> {
    if !(nbar >= 0.0) {
        return Err(Error::InvalidParameter("nbar must be >= 0".into()));
    }
    if !(params.chi > 0.0) || !(params.k_q > 0.0) {
        return Err(Error::InvalidParameter("chi and K_q must be > 0".into()));
    }
    let k_c = params.chi * params.chi / (4.0 * params.k_q);
    let kerr = if params.k_c > 0.0 { params.k_c } else { k_c };
    let n_crit = params.k_q / (6.0 * params.chi);
    Ok(KerrEstimates {
        k_c,
        t_col: collapse_time(nbar, kerr),
        n_crit,
        t_g_min: 1.0 / (n_crit.sqrt() * params.chi),
    })
}
