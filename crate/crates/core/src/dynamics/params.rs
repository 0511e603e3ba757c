use serde::{Deserialize, Serialize};

use crate::units::{two_pi, GHZ, KHZ, MHZ, MS, US};
use crate::{Error, Result};

const DEPHASING_CLAMP: f64 = 1e-9;

/// Device parameters. Frequencies and rates in rad/s, times in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_c: f64,
    pub omega_q: f64,
    pub omega_r: f64,
    pub k_c: f64,
    pub k_q: f64,
    pub k_r: f64,
    pub chi: f64,
    pub chi_qr: f64,
    pub chi_cr: f64,
    pub t1_c: f64,
    pub t2_c: f64,
    pub t1_q: f64,
    pub t2_q: f64,
    pub t2e_q: f64,
    pub t1_r: f64,
    pub nth_c: f64,
    pub nth_q: f64,
    /// Ramsey time of the g–f superposition. When set, the transmon dephasing
    /// operator weights the f level so that this coherence time is reproduced;
    /// when absent the plain `q†q` operator is used.
    pub t2_gf_q: Option<f64>,
}

impl SystemParams {
    /// Nominal device.
    pub fn table_i() -> Self {
        Self {
            omega_c: two_pi(4.301 * GHZ),
            omega_q: two_pi(3.099 * GHZ),
            omega_r: two_pi(7.889 * GHZ),
            k_c: two_pi(3.6),
            k_q: two_pi(146.0 * MHZ),
            k_r: two_pi(2.3 * KHZ),
            chi: two_pi(42.0 * KHZ),
            chi_qr: two_pi(1.3 * MHZ),
            chi_cr: two_pi(0.2 * KHZ),
            t1_c: 25.6 * MS,
            t2_c: 34.0 * MS,
            t1_q: 110.0 * US,
            t2_q: 16.0 * US,
            t2e_q: 80.0 * US,
            t1_r: 0.38 * US,
            nth_c: 0.0,
            nth_q: 1.2e-3,
            t2_gf_q: Some(45.0 * US),
        }
    }

    /// Same device with every decoherence channel switched off.
    pub fn noiseless(&self) -> Self {
        Self {
            t1_c: f64::INFINITY,
            t2_c: f64::INFINITY,
            t1_q: f64::INFINITY,
            t2_q: f64::INFINITY,
            t2e_q: f64::INFINITY,
            t1_r: f64::INFINITY,
            nth_c: 0.0,
            nth_q: 0.0,
            t2_gf_q: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let times = [
            ("t1_c", self.t1_c),
            ("t2_c", self.t2_c),
            ("t1_q", self.t1_q),
            ("t2_q", self.t2_q),
            ("t2e_q", self.t2e_q),
            ("t1_r", self.t1_r),
        ];
        for (name, t) in times {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {t}")));
            }
        }
        if let Some(t) = self.t2_gf_q {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidParameter(format!("t2_gf_q must be > 0, got {t}")));
            }
        }
        for (name, n) in [("nth_c", self.nth_c), ("nth_q", self.nth_q)] {
            if !(0.0..1.0).contains(&n) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1), got {n}")));
            }
        }
        let rates = [
            ("omega_c", self.omega_c),
            ("omega_q", self.omega_q),
            ("omega_r", self.omega_r),
            ("k_c", self.k_c),
            ("k_q", self.k_q),
            ("k_r", self.k_r),
            ("chi", self.chi),
            ("chi_qr", self.chi_qr),
            ("chi_cr", self.chi_cr),
        ];
        for (name, r) in rates {
            if !r.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} is not finite")));
            }
        }
        self.transmon_dephasing_rate()?;
        self.f_dephasing_weight()?;
        Ok(())
    }

    /// Pure-dephasing rate `1/T2 − 1/(2T1)` of the transmon g–e coherence.
    pub fn transmon_pure_dephasing(&self) -> Result<f64> {
        pure_dephasing("transmon", self.t1_q, self.t2_q)
    }

    /// Rate of the `q†q`-type dephasing collapse operator, twice the pure
    /// dephasing rate.
    pub fn transmon_dephasing_rate(&self) -> Result<f64> {
        Ok(2.0 * self.transmon_pure_dephasing()?)
    }

    /// Weight `b` of the f level in the dephasing operator `diag(0, 1, b, …)`.
    pub fn f_dephasing_weight(&self) -> Result<f64> {
        let Some(t2_gf) = self.t2_gf_q else {
            return Ok(2.0);
        };
        let gamma_phi = self.transmon_pure_dephasing()?;
        // g–f coherence decays at 1/T1 (f relaxes at 2/T1) plus γφ·b².
        let excess = 1.0 / t2_gf - 1.0 / self.t1_q;
        if excess < -DEPHASING_CLAMP {
            return Err(Error::Unphysical(format!(
                "t2_gf_q = {t2_gf:e} s is longer than t1_q allows"
            )));
        }
        if gamma_phi == 0.0 {
            return Ok(0.0);
        }
        Ok((excess.max(0.0) / gamma_phi).sqrt())
    }

    /// Pure-dephasing rate of the cavity implied by (T1c, T2c).
    pub fn cavity_pure_dephasing(&self) -> Result<f64> {
        pure_dephasing("cavity", self.t1_c, self.t2_c)
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::table_i()
    }
}

fn pure_dephasing(name: &str, t1: f64, t2: f64) -> Result<f64> {
    let r = 1.0 / t2 - 0.5 / t1;
    if r < -DEPHASING_CLAMP * (1.0 / t2).max(1.0) {
        return Err(Error::Unphysical(format!(
            "{name}: T2 = {t2:e} s exceeds 2·T1 = {:e} s",
            2.0 * t1
        )));
    }
    Ok(r.max(0.0))
}
