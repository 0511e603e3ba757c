//! Cavity loss channels, the summed budget and ring-down arithmetic.
//!
//! Rates are angular (rad/s) in every function; [`LossBudget`] reports
//! `κ/2π` in Hz next to the lifetime `1/κ`.

use serde::{Deserialize, Serialize};

use crate::units::{per_two_pi, two_pi, GHZ, HBAR, K_B, KHZ, MHZ, US};
use crate::{Error, Result};

/// Geometry-derived inputs (all from electromagnetic simulation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    pub omega_c: f64,
    pub filling_factor: f64,
    /// Ω.
    pub geometry_factor: f64,
    /// 1/(Ω·m).
    pub seam_admittance: f64,
    pub p_bulk: f64,
    pub p_ma: f64,
    pub p_ms: f64,
    pub p_sa: f64,
    /// Coupling to the RF ports, rad/s.
    pub external_rate: f64,
}

/// Material constants and the magnetic environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub tan_delta_ox: f64,
    pub tan_delta_bulk: f64,
    pub tan_delta_ma: f64,
    pub tan_delta_ms: f64,
    pub tan_delta_sa: f64,
    /// 1/(Ω·m).
    pub g_seam: f64,
    /// Surface resistance per trapped milligauss, Ω.
    pub r_s_per_mg: f64,
    /// mG.
    pub ambient_field: f64,
    pub shield_attenuations: Vec<f64>,
    /// Ω.
    pub r_res_bound: f64,
    /// K.
    pub temperature: f64,
}

/// Transmon quantities behind the inverse-Purcell channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellInputs {
    pub chi: f64,
    pub k_q: f64,
    pub t2e_q: f64,
}

/// Interface participation that, shared equally by the three chip
/// interfaces, gives a surface loss of 2.9e-2 Hz with the default tangents.
/// Solved-for, not a simulated value.
pub const EQUAL_INTERFACE_PARTICIPATION: f64 = 2.6134e-10;

impl CavityGeometry {
    pub fn nominal() -> Self {
        Self {
            omega_c: two_pi(4.301 * GHZ),
            filling_factor: 1.4e-8,
            geometry_factor: 210.0,
            seam_admittance: 3.3e-7,
            p_bulk: 1.0e-4,
            p_ma: EQUAL_INTERFACE_PARTICIPATION,
            p_ms: EQUAL_INTERFACE_PARTICIPATION,
            p_sa: EQUAL_INTERFACE_PARTICIPATION,
            external_rate: two_pi(9.6e-2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_c", self.omega_c),
            ("filling_factor", self.filling_factor),
            ("geometry_factor", self.geometry_factor),
            ("seam_admittance", self.seam_admittance),
            ("p_bulk", self.p_bulk),
            ("p_ma", self.p_ma),
            ("p_ms", self.p_ms),
            ("p_sa", self.p_sa),
            ("external_rate", self.external_rate),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        for (name, v) in [("filling_factor", self.filling_factor), ("p_bulk", self.p_bulk)] {
            if v >= 1.0 {
                return Err(Error::InvalidParameter(format!("{name} must be ≪ 1, got {v}")));
            }
        }
        Ok(())
    }
}

impl MaterialParams {
    pub fn nominal() -> Self {
        Self {
            tan_delta_ox: 1e-2,
            tan_delta_bulk: 6e-8,
            tan_delta_ma: 2.1e-2,
            tan_delta_ms: 2.6e-3,
            tan_delta_sa: 2.2e-3,
            g_seam: 1e6,
            r_s_per_mg: 2e-9,
            ambient_field: 500.0,
            shield_attenuations: vec![1e2, 1e3],
            r_res_bound: 70e-9,
            temperature: 10e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tangents = [
            ("tan_delta_ox", self.tan_delta_ox),
            ("tan_delta_bulk", self.tan_delta_bulk),
            ("tan_delta_ma", self.tan_delta_ma),
            ("tan_delta_ms", self.tan_delta_ms),
            ("tan_delta_sa", self.tan_delta_sa),
        ];
        for (name, v) in tangents {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        for a in &self.shield_attenuations {
            if !(*a >= 1.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("shield attenuation {a} must be ≥ 1")));
            }
        }
        let positive = [("g_seam", self.g_seam), ("temperature", self.temperature)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("r_s_per_mg", self.r_s_per_mg),
            ("ambient_field", self.ambient_field),
            ("r_res_bound", self.r_res_bound),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be ≥ 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl PurcellInputs {
    pub fn nominal() -> Self {
        Self { chi: two_pi(42.0 * KHZ), k_q: two_pi(146.0 * MHZ), t2e_q: 80.0 * US }
    }
}

/// `tanh(ħω/2k_BT)`.
pub fn thermal_factor(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    (HBAR * omega / (2.0 * K_B * temperature)).tanh()
}

/// `ω F tanδ_ox tanh(ħω/2k_BT)`.
pub fn oxide_loss(geom: &CavityGeometry, mat: &MaterialParams) -> Result<f64> {
    if !(mat.temperature > 0.0) {
        return Err(Error::InvalidParameter("temperature must be > 0".into()));
    }
    Ok(geom.omega_c * geom.filling_factor * mat.tan_delta_ox * thermal_factor(geom.omega_c, mat.temperature))
}

/// `(χ/K_q)/T2E`.
pub fn inverse_purcell(chi: f64, k_q: f64, t2e_q: f64) -> Result<f64> {
    if !(t2e_q > 0.0) || k_q == 0.0 {
        return Err(Error::InvalidParameter("inverse Purcell needs T2E > 0 and K_q ≠ 0".into()));
    }
    Ok((chi / k_q).abs() / t2e_q)
}

/// `ω y_seam / g_seam`.
pub fn seam_loss(geom: &CavityGeometry, mat: &MaterialParams) -> Result<f64> {
    if !(mat.g_seam > 0.0) {
        return Err(Error::InvalidParameter("seam conductance must be > 0".into()));
    }
    Ok(geom.omega_c * geom.seam_admittance / mat.g_seam)
}

/// `ω R_s / G`.
pub fn conductive_loss(geom: &CavityGeometry, r_s: f64) -> Result<f64> {
    if !(geom.geometry_factor > 0.0) {
        return Err(Error::InvalidParameter("geometry factor must be > 0".into()));
    }
    Ok(geom.omega_c * r_s / geom.geometry_factor)
}

/// Field left after the shields, mG.
pub fn trapped_field(mat: &MaterialParams) -> f64 {
    mat.ambient_field / mat.shield_attenuations.iter().product::<f64>()
}

/// Conductive loss from vortices trapped out of the residual field.
pub fn magnetic_vortex_loss(geom: &CavityGeometry, mat: &MaterialParams) -> Result<f64> {
    conductive_loss(geom, mat.r_s_per_mg * trapped_field(mat))
}

/// `(ω p_bulk tanδ_bulk, ω Σ pᵢ tanδᵢ)`.
pub fn dielectric_chip_losses(geom: &CavityGeometry, mat: &MaterialParams) -> (f64, f64) {
    let bulk = geom.omega_c * geom.p_bulk * mat.tan_delta_bulk;
    let surface = geom.omega_c
        * (geom.p_ma * mat.tan_delta_ma + geom.p_ms * mat.tan_delta_ms + geom.p_sa * mat.tan_delta_sa);
    (bulk, surface)
}

/// Upper bound `G/Q0` on the residual surface resistance.
pub fn residual_resistance_bound(geometry_factor: f64, q0: f64) -> Result<f64> {
    if !(q0 > 0.0) {
        return Err(Error::InvalidParameter("Q0 must be > 0".into()));
    }
    Ok(geometry_factor / q0)
}

/// One row of the budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub name: String,
    pub mitigation: String,
    pub kappa_over_2pi_hz: f64,
    pub lifetime_s: f64,
}

impl LossChannel {
    pub fn from_rate(name: &str, mitigation: &str, rate: f64) -> Self {
        Self {
            name: name.to_string(),
            mitigation: mitigation.to_string(),
            kappa_over_2pi_hz: per_two_pi(rate),
            lifetime_s: if rate > 0.0 { 1.0 / rate } else { f64::INFINITY },
        }
    }

    /// Angular rate.
    pub fn rate(&self) -> f64 {
        two_pi(self.kappa_over_2pi_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossBudget {
    pub channels: Vec<LossChannel>,
    pub total_kappa_over_2pi_hz: f64,
    pub total_lifetime_s: f64,
}

impl LossBudget {
    /// Sums the rows; the total is exactly the sum of the channel rates.
    pub fn from_channels(channels: Vec<LossChannel>) -> Self {
        let total: f64 = channels.iter().map(|c| c.kappa_over_2pi_hz).sum();
        let rate = two_pi(total);
        Self {
            channels,
            total_kappa_over_2pi_hz: total,
            total_lifetime_s: if rate > 0.0 { 1.0 / rate } else { f64::INFINITY },
        }
    }

    pub fn channel(&self, name: &str) -> Option<&LossChannel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn total_rate(&self) -> f64 {
        two_pi(self.total_kappa_over_2pi_hz)
    }
}

pub const OXIDE: &str = "surface_oxides";
pub const PURCELL: &str = "inverse_purcell";
pub const SEAM: &str = "seam";
pub const BULK: &str = "sapphire_bulk";
pub const SURFACE: &str = "chip_surface";
pub const MAGNETIC: &str = "magnetic_vortices";
pub const EXTERNAL: &str = "external_coupling";

/// Every channel, in the usual table order.
pub fn assemble_budget(
    geom: &CavityGeometry,
    mat: &MaterialParams,
    purcell: &PurcellInputs,
) -> Result<LossBudget> {
    geom.validate()?;
    mat.validate()?;
    let (bulk, surface) = dielectric_chip_losses(geom, mat);
    let channels = vec![
        LossChannel::from_rate(OXIDE, "filling-factor reduction; chemical etching", oxide_loss(geom, mat)?),
        LossChannel::from_rate(
            PURCELL,
            "weak cavity-transmon coupling; high-coherence transmon",
            inverse_purcell(purcell.chi, purcell.k_q, purcell.t2e_q)?,
        ),
        LossChannel::from_rate(SEAM, "seam inside a narrow waveguide; indium gasket", seam_loss(geom, mat)?),
        LossChannel::from_rate(BULK, "minor chip protrusion into the cavity", bulk),
        LossChannel::from_rate(SURFACE, "minor chip protrusion into the cavity", surface),
        LossChannel::from_rate(MAGNETIC, "two magnetic shields", magnetic_vortex_loss(geom, mat)?),
        LossChannel::from_rate(EXTERNAL, "undercoupled RF ports", geom.external_rate),
    ];
    Ok(LossBudget::from_channels(channels))
}

/// Known external loss, either as a quality factor or a decay time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExternalLoss {
    None,
    QualityFactor(f64),
    DecayTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ringdown {
    pub q_loaded: f64,
    pub tau_loaded: f64,
    pub tau_ext: f64,
    pub q_ext: f64,
    pub tau_int: f64,
    pub q_int: f64,
}

/// `Q = ωτ` and `1/τ_int = 1/τ_loaded − 1/τ_ext`.
pub fn ringdown_conversions(omega_c: f64, tau_loaded: f64, external: ExternalLoss) -> Result<Ringdown> {
    if !(omega_c > 0.0) || !(tau_loaded > 0.0) {
        return Err(Error::InvalidParameter("ω and τ must be > 0".into()));
    }
    let tau_ext = match external {
        ExternalLoss::None => f64::INFINITY,
        ExternalLoss::QualityFactor(q) if q > 0.0 => q / omega_c,
        ExternalLoss::DecayTime(t) if t > 0.0 => t,
        _ => return Err(Error::InvalidParameter("external Q or τ must be > 0".into())),
    };
    let inv_int = 1.0 / tau_loaded - 1.0 / tau_ext;
    if inv_int <= 0.0 {
        return Err(Error::Unphysical(format!(
            "external decay time {tau_ext:e} s is shorter than the loaded one {tau_loaded:e} s"
        )));
    }
    let tau_int = 1.0 / inv_int;
    Ok(Ringdown {
        q_loaded: omega_c * tau_loaded,
        tau_loaded,
        tau_ext,
        q_ext: omega_c * tau_ext,
        tau_int,
        q_int: omega_c * tau_int,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hz(rate: f64) -> f64 {
        per_two_pi(rate)
    }

    #[test]
    fn oxide_rate() {
        let g = CavityGeometry::nominal();
        let m = MaterialParams::nominal();
        let k = hz(oxide_loss(&g, &m).unwrap());
        // f·F·tanδ = 4.301e9 · 1.4e-8 · 1e-2
        assert!((k - 4.301e9 * 1.4e-8 * 1e-2).abs() < 1e-6);
        assert!((k - 0.60).abs() < 0.01);
        assert!((thermal_factor(g.omega_c, 10e-3) - 1.0).abs() < 1e-4);
        let stub = CavityGeometry { filling_factor: 7.6e-8, ..g.clone() };
        let ratio = oxide_loss(&stub, &m).unwrap() / oxide_loss(&g, &m).unwrap();
        assert!((ratio - 5.43).abs() < 0.01);
        let zero = CavityGeometry { filling_factor: 0.0, ..g };
        assert_eq!(oxide_loss(&zero, &m).unwrap(), 0.0);
    }

    #[test]
    fn thermal_factor_limits() {
        let w = two_pi(4.3e9);
        let x = |t: f64| HBAR * w / (2.0 * K_B * t);
        assert!((thermal_factor(w, 1e-4) - 1.0).abs() < 1e-12);
        assert!((thermal_factor(w, 100.0) / x(100.0) - 1.0).abs() < 1e-6);
        let temps = [0.01, 0.05, 0.1, 0.5, 1.0];
        for t in temps.windows(2) {
            assert!(thermal_factor(w, t[0]) >= thermal_factor(w, t[1]));
        }
    }

    #[test]
    fn purcell_rate() {
        let p = PurcellInputs::nominal();
        let k = inverse_purcell(p.chi, p.k_q, p.t2e_q).unwrap();
        assert!((hz(k) - 0.572).abs() < 0.005);
        assert!((1.0 / k - 0.278).abs() < 0.001);
        assert_eq!(inverse_purcell(0.0, p.k_q, p.t2e_q).unwrap(), 0.0);
    }

    #[test]
    fn seam_and_magnetic() {
        let g = CavityGeometry::nominal();
        let m = MaterialParams::nominal();
        let s = hz(seam_loss(&g, &m).unwrap());
        assert!((s - 4.301e9 * 3.3e-7 / 1e6).abs() < 1e-12);
        let doubled = MaterialParams { g_seam: 2e6, ..m.clone() };
        assert!((hz(seam_loss(&g, &doubled).unwrap()) - s / 2.0).abs() < 1e-15);
        let mag = hz(magnetic_vortex_loss(&g, &m).unwrap());
        assert!((mag - 2.0e-4).abs() < 0.1 * 2.0e-4);
        assert!((residual_resistance_bound(210.0, 3e9).unwrap() - 70e-9).abs() < 1e-15);
        assert_eq!(conductive_loss(&g, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn chip_losses() {
        let g = CavityGeometry::nominal();
        let m = MaterialParams::nominal();
        let (b, s) = dielectric_chip_losses(&g, &m);
        assert!((hz(b) - 2.58e-2).abs() < 1e-4);
        assert!((hz(s) - 2.9e-2).abs() < 1e-4, "{}", hz(s));
        let none = CavityGeometry { p_bulk: 0.0, p_ma: 0.0, p_ms: 0.0, p_sa: 0.0, ..g };
        assert_eq!(dielectric_chip_losses(&none, &m), (0.0, 0.0));
    }

    #[test]
    fn budget_totals() {
        let b = assemble_budget(&CavityGeometry::nominal(), &MaterialParams::nominal(), &PurcellInputs::nominal())
            .unwrap();
        let sum: f64 = b.channels.iter().map(|c| c.kappa_over_2pi_hz).sum();
        assert_eq!(sum, b.total_kappa_over_2pi_hz);
        assert!((b.total_lifetime_s - 0.120).abs() < 0.012);
        for c in &b.channels {
            assert!((c.lifetime_s * c.rate() - 1.0).abs() < 1e-12);
        }
        let ext = LossBudget::from_channels(vec![LossChannel::from_rate(EXTERNAL, "", two_pi(0.096))]);
        assert!((ext.total_lifetime_s - 1.66).abs() < 0.01);
    }

    #[test]
    fn ringdown() {
        let w = two_pi(4.301e9);
        let r = ringdown_conversions(w, 0.110, ExternalLoss::QualityFactor(1.3e10)).unwrap();
        assert!((r.q_loaded - 2.973e9).abs() < 1e6);
        assert!((r.tau_ext - 0.4811).abs() < 1e-4);
        assert!((r.tau_int - 0.1426).abs() < 1e-3);
        let none = ringdown_conversions(w, 0.110, ExternalLoss::None).unwrap();
        assert!((none.tau_int - 0.110).abs() < 1e-15);
        assert!(matches!(
            ringdown_conversions(w, 0.110, ExternalLoss::DecayTime(0.05)),
            Err(Error::Unphysical(_))
        ));
    }
}
