//! Run configuration. Every dimensional field carries its unit in the name.

use cavsim::dynamics::SystemParams;
use cavsim::hilbert::guarded_dim;
use cavsim::lossbudget::{CavityGeometry, MaterialParams, PurcellInputs};
use cavsim::protocols::{CoherenceSettings, SidebandSettings, SpamConfig};
use cavsim::units::{per_two_pi, two_pi};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub device: DeviceConfig,
    #[serde(default)]
    pub loss: LossConfig,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub omega_c_over_2pi_hz: f64,
    pub omega_q_over_2pi_hz: f64,
    pub omega_r_over_2pi_hz: f64,
    pub k_c_over_2pi_hz: f64,
    pub k_q_over_2pi_hz: f64,
    pub k_r_over_2pi_hz: f64,
    pub chi_over_2pi_hz: f64,
    pub chi_qr_over_2pi_hz: f64,
    pub chi_cr_over_2pi_hz: f64,
    pub t1_c_s: f64,
    pub t2_c_s: f64,
    pub t1_q_s: f64,
    pub t2_q_s: f64,
    pub t2e_q_s: f64,
    pub t1_r_s: f64,
    pub nth_c: f64,
    pub nth_q: f64,
    #[serde(default)]
    pub t2_gf_q_s: Option<f64>,
    /// Switch every decoherence channel off.
    #[serde(default)]
    pub noiseless: bool,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self::from_params(&SystemParams::table_i())
    }
}

impl DeviceConfig {
    pub fn from_params(p: &SystemParams) -> Self {
        Self {
            omega_c_over_2pi_hz: per_two_pi(p.omega_c),
            omega_q_over_2pi_hz: per_two_pi(p.omega_q),
            omega_r_over_2pi_hz: per_two_pi(p.omega_r),
            k_c_over_2pi_hz: per_two_pi(p.k_c),
            k_q_over_2pi_hz: per_two_pi(p.k_q),
            k_r_over_2pi_hz: per_two_pi(p.k_r),
            chi_over_2pi_hz: per_two_pi(p.chi),
            chi_qr_over_2pi_hz: per_two_pi(p.chi_qr),
            chi_cr_over_2pi_hz: per_two_pi(p.chi_cr),
            t1_c_s: p.t1_c,
            t2_c_s: p.t2_c,
            t1_q_s: p.t1_q,
            t2_q_s: p.t2_q,
            t2e_q_s: p.t2e_q,
            t1_r_s: p.t1_r,
            nth_c: p.nth_c,
            nth_q: p.nth_q,
            t2_gf_q_s: p.t2_gf_q,
            noiseless: false,
        }
    }

    pub fn params(&self) -> CliResult<SystemParams> {
        let p = SystemParams {
            omega_c: two_pi(self.omega_c_over_2pi_hz),
            omega_q: two_pi(self.omega_q_over_2pi_hz),
            omega_r: two_pi(self.omega_r_over_2pi_hz),
            k_c: two_pi(self.k_c_over_2pi_hz),
            k_q: two_pi(self.k_q_over_2pi_hz),
            k_r: two_pi(self.k_r_over_2pi_hz),
            chi: two_pi(self.chi_over_2pi_hz),
            chi_qr: two_pi(self.chi_qr_over_2pi_hz),
            chi_cr: two_pi(self.chi_cr_over_2pi_hz),
            t1_c: self.t1_c_s,
            t2_c: self.t2_c_s,
            t1_q: self.t1_q_s,
            t2_q: self.t2_q_s,
            t2e_q: self.t2e_q_s,
            t1_r: self.t1_r_s,
            nth_c: self.nth_c,
            nth_q: self.nth_q,
            t2_gf_q: self.t2_gf_q_s,
        };
        p.validate().map_err(|e| CliError::validation("device", e.to_string()))?;
        Ok(if self.noiseless { p.noiseless() } else { p })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub purcell: PurcellConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub omega_c_over_2pi_hz: f64,
    pub filling_factor: f64,
    pub geometry_factor_ohm: f64,
    pub seam_admittance_per_ohm_m: f64,
    pub p_bulk: f64,
    pub p_ma: f64,
    pub p_ms: f64,
    pub p_sa: f64,
    pub external_kappa_over_2pi_hz: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = CavityGeometry::nominal();
        Self {
            omega_c_over_2pi_hz: per_two_pi(g.omega_c),
            filling_factor: g.filling_factor,
            geometry_factor_ohm: g.geometry_factor,
            seam_admittance_per_ohm_m: g.seam_admittance,
            p_bulk: g.p_bulk,
            p_ma: g.p_ma,
            p_ms: g.p_ms,
            p_sa: g.p_sa,
            external_kappa_over_2pi_hz: per_two_pi(g.external_rate),
        }
    }
}

impl GeometryConfig {
    pub fn geometry(&self) -> CliResult<CavityGeometry> {
        let g = CavityGeometry {
            omega_c: two_pi(self.omega_c_over_2pi_hz),
            filling_factor: self.filling_factor,
            geometry_factor: self.geometry_factor_ohm,
            seam_admittance: self.seam_admittance_per_ohm_m,
            p_bulk: self.p_bulk,
            p_ma: self.p_ma,
            p_ms: self.p_ms,
            p_sa: self.p_sa,
            external_rate: two_pi(self.external_kappa_over_2pi_hz),
        };
        g.validate().map_err(|e| CliError::validation("loss.geometry", e.to_string()))?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub tan_delta_ox: f64,
    pub tan_delta_bulk: f64,
    pub tan_delta_ma: f64,
    pub tan_delta_ms: f64,
    pub tan_delta_sa: f64,
    pub g_seam_per_ohm_m: f64,
    pub r_s_per_mg_ohm: f64,
    pub ambient_field_mg: f64,
    pub shield_attenuations: Vec<f64>,
    pub r_res_bound_ohm: f64,
    pub temperature_k: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        let m = MaterialParams::nominal();
        Self {
            tan_delta_ox: m.tan_delta_ox,
            tan_delta_bulk: m.tan_delta_bulk,
            tan_delta_ma: m.tan_delta_ma,
            tan_delta_ms: m.tan_delta_ms,
            tan_delta_sa: m.tan_delta_sa,
            g_seam_per_ohm_m: m.g_seam,
            r_s_per_mg_ohm: m.r_s_per_mg,
            ambient_field_mg: m.ambient_field,
            shield_attenuations: m.shield_attenuations,
            r_res_bound_ohm: m.r_res_bound,
            temperature_k: m.temperature,
        }
    }
}

impl MaterialConfig {
    pub fn material(&self) -> CliResult<MaterialParams> {
        let m = MaterialParams {
            tan_delta_ox: self.tan_delta_ox,
            tan_delta_bulk: self.tan_delta_bulk,
            tan_delta_ma: self.tan_delta_ma,
            tan_delta_ms: self.tan_delta_ms,
            tan_delta_sa: self.tan_delta_sa,
            g_seam: self.g_seam_per_ohm_m,
            r_s_per_mg: self.r_s_per_mg_ohm,
            ambient_field: self.ambient_field_mg,
            shield_attenuations: self.shield_attenuations.clone(),
            r_res_bound: self.r_res_bound_ohm,
            temperature: self.temperature_k,
        };
        m.validate().map_err(|e| CliError::validation("loss.material", e.to_string()))?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurcellConfig {
    pub chi_over_2pi_hz: f64,
    pub k_q_over_2pi_hz: f64,
    pub t2e_q_s: f64,
}

impl Default for PurcellConfig {
    fn default() -> Self {
        let p = PurcellInputs::nominal();
        Self { chi_over_2pi_hz: per_two_pi(p.chi), k_q_over_2pi_hz: per_two_pi(p.k_q), t2e_q_s: p.t2e_q }
    }
}

impl PurcellConfig {
    pub fn inputs(&self) -> PurcellInputs {
        PurcellInputs { chi: two_pi(self.chi_over_2pi_hz), k_q: two_pi(self.k_q_over_2pi_hz), t2e_q: self.t2e_q_s }
    }
}

/// Either explicit values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sweep {
    Values(Vec<f64>),
    Linear { start: f64, stop: f64, points: usize },
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Values(v) => v.clone(),
            Self::Linear { start, stop, points } => match points {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    fn validate(&self, path: &str, min_points: usize) -> CliResult<()> {
        let v = self.values();
        if v.len() < min_points {
            return Err(CliError::validation(path, format!("need at least {min_points} points, got {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::validation(path, "values must be finite"));
        }
        Ok(())
    }

    fn validate_delays(&self, path: &str, min_points: usize) -> CliResult<()> {
        self.validate(path, min_points)?;
        if self.values().iter().any(|x| *x < 0.0) {
            return Err(CliError::validation(path, "times must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidebandConfig {
    #[serde(default = "SidebandConfig::default_xi")]
    pub xi: f64,
    #[serde(default = "SidebandConfig::default_ramp")]
    pub ramp_s: f64,
    #[serde(default = "SidebandConfig::default_cavity_dim")]
    pub cavity_dim: usize,
    #[serde(default = "SidebandConfig::default_transmon_dim")]
    pub transmon_dim: usize,
}

impl SidebandConfig {
    fn default_xi() -> f64 {
        SidebandSettings::default().xi
    }
    fn default_ramp() -> f64 {
        SidebandSettings::default().ramp
    }
    fn default_cavity_dim() -> usize {
        SidebandSettings::default().cavity_dim
    }
    fn default_transmon_dim() -> usize {
        SidebandSettings::default().transmon_dim
    }

    pub fn settings(&self, tolerance_scale: f64) -> SidebandSettings {
        SidebandSettings {
            xi: self.xi,
            ramp: self.ramp_s,
            cavity_dim: self.cavity_dim,
            transmon_dim: self.transmon_dim,
            tolerance_scale,
        }
    }

    fn validate(&self, path: &str) -> CliResult<()> {
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return Err(CliError::validation(format!("{path}.xi"), "must be > 0"));
        }
        if !(self.ramp_s >= 0.0 && self.ramp_s.is_finite()) {
            return Err(CliError::validation(format!("{path}.ramp_s"), "must be >= 0"));
        }
        if self.cavity_dim < 2 {
            return Err(CliError::validation(format!("{path}.cavity_dim"), "must hold |0> and |1> (>= 2)"));
        }
        if self.transmon_dim < 3 {
            return Err(CliError::validation(format!("{path}.transmon_dim"), "the sideband needs the f level (>= 3)"));
        }
        Ok(())
    }
}

impl Default for SidebandConfig {
    fn default() -> Self {
        Self {
            xi: Self::default_xi(),
            ramp_s: Self::default_ramp(),
            cavity_dim: Self::default_cavity_dim(),
            transmon_dim: Self::default_transmon_dim(),
        }
    }
}

/// Parity measurement used by cat experiments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParityConfig {
    #[default]
    Ideal,
    Simulated {
        #[serde(default = "default_readout_fidelity")]
        readout_fidelity: f64,
        #[serde(default)]
        noiseless: bool,
    },
}

fn default_readout_fidelity() -> f64 {
    0.95
}

fn default_fringe() -> f64 {
    CoherenceSettings::default().fringe_detuning
}

fn default_cat_points() -> usize {
    21
}

fn default_extrapolate() -> f64 {
    1024.0
}

fn default_spam_configs() -> Vec<SpamConfig> {
    SpamConfig::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CooldownRow {
    pub name: String,
    pub nth_q: f64,
    pub t1_c_s: f64,
    pub gamma_down_over_2pi_hz: f64,
    pub chi_over_2pi_hz: f64,
    pub measured_t2_s: f64,
}

/// One experiment, selected by `protocol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentConfig {
    /// Encode `|1⟩`, idle, decode; fit an exponential.
    T1 {
        delays_s: Sweep,
        #[serde(default)]
        sideband: SidebandConfig,
        #[serde(default)]
        shots: Option<u64>,
    },
    /// Encode `(|0⟩+|1⟩)/√2`, idle, decode with a rotating axis; fit a damped cosine.
    T2 {
        delays_s: Sweep,
        #[serde(default = "default_fringe")]
        fringe_detuning_hz: f64,
        #[serde(default)]
        sideband: SidebandConfig,
        #[serde(default)]
        shots: Option<u64>,
    },
    /// Cat parity decay for each size `S = 4|α|²`, then `1/T_d` against `S`.
    CatDecoherence {
        sizes: Vec<f64>,
        #[serde(default = "default_cat_points")]
        points: usize,
        #[serde(default = "default_extrapolate")]
        extrapolate_to: f64,
        #[serde(default)]
        parity: ParityConfig,
    },
    /// Displaced-parity cut of the even cat along the imaginary axis.
    WignerCut {
        size: f64,
        axis: Sweep,
        #[serde(default)]
        cavity_dim: Option<usize>,
        #[serde(default)]
        parity: ParityConfig,
        #[serde(default)]
        shots: Option<u64>,
    },
    /// Vacuum cut along the same axis; calibrates the axis scale.
    VacuumCalibration {
        axis: Sweep,
        #[serde(default)]
        parity: ParityConfig,
    },
    /// Ramsey fringe of the transmon against drive detuning with `|α|² = nbar`.
    ParityCalibration {
        nbar: f64,
        /// `(ω_q − ω_d)/2π`.
        detunings_hz: Sweep,
        #[serde(default = "default_readout_fidelity")]
        readout_fidelity: f64,
    },
    Encode {
        a_re: f64,
        #[serde(default)]
        a_im: f64,
        b_re: f64,
        #[serde(default)]
        b_im: f64,
        #[serde(default)]
        sideband: SidebandConfig,
    },
    Reset {
        decay_time_s: f64,
        times_s: Sweep,
    },
    Spam {
        nbars: Vec<f64>,
        #[serde(default = "default_readout_fidelity")]
        readout_fidelity: f64,
        #[serde(default = "default_spam_configs")]
        configs: Vec<SpamConfig>,
    },
    LossBudget,
    Ringdown {
        tau_loaded_s: f64,
        #[serde(default)]
        q_ext: Option<f64>,
        #[serde(default)]
        tau_ext_s: Option<f64>,
    },
    Cooldowns {
        rows: Vec<CooldownRow>,
    },
    DephasingBudget {
        t1_c_s: f64,
        #[serde(default)]
        t1_c_sigma_s: f64,
        t2_c_s: f64,
        #[serde(default)]
        t2_c_sigma_s: f64,
        /// Transmon heating time `T1_q / n_th`.
        t_up_s: f64,
        #[serde(default)]
        t_up_sigma_s: f64,
    },
    Kerr {
        nbar: f64,
    },
    DeviceSummary,
}

impl ExperimentConfig {
    pub fn protocol(&self) -> &'static str {
        match self {
            Self::T1 { .. } => "t1",
            Self::T2 { .. } => "t2",
            Self::CatDecoherence { .. } => "cat_decoherence",
            Self::WignerCut { .. } => "wigner_cut",
            Self::VacuumCalibration { .. } => "vacuum_calibration",
            Self::ParityCalibration { .. } => "parity_calibration",
            Self::Encode { .. } => "encode",
            Self::Reset { .. } => "reset",
            Self::Spam { .. } => "spam",
            Self::LossBudget => "loss_budget",
            Self::Ringdown { .. } => "ringdown",
            Self::Cooldowns { .. } => "cooldowns",
            Self::DephasingBudget { .. } => "dephasing_budget",
            Self::Kerr { .. } => "kerr",
            Self::DeviceSummary => "device_summary",
        }
    }

    fn validate(&self, path: &str) -> CliResult<()> {
        let at = |f: &str| format!("{path}.{f}");
        let positive = |f: &str, v: f64| -> CliResult<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::validation(at(f), format!("must be finite and > 0, got {v}")))
            }
        };
        let fidelity = |v: f64| -> CliResult<()> {
            if (0.5..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(CliError::validation(at("readout_fidelity"), format!("must lie in [0.5, 1], got {v}")))
            }
        };
        let parity_ok = |p: &ParityConfig| match p {
            ParityConfig::Ideal => Ok(()),
            ParityConfig::Simulated { readout_fidelity, .. } => fidelity(*readout_fidelity),
        };
        let shots_ok = |s: &Option<u64>| match s {
            Some(0) => Err(CliError::validation(at("shots"), "must be > 0")),
            _ => Ok(()),
        };
        match self {
            Self::T1 { delays_s, sideband, shots } => {
                delays_s.validate_delays(&at("delays_s"), 3)?;
                sideband.validate(&at("sideband"))?;
                shots_ok(shots)
            }
            Self::T2 { delays_s, fringe_detuning_hz, sideband, shots } => {
                delays_s.validate_delays(&at("delays_s"), 4)?;
                if !fringe_detuning_hz.is_finite() {
                    return Err(CliError::validation(at("fringe_detuning_hz"), "must be finite"));
                }
                sideband.validate(&at("sideband"))?;
                shots_ok(shots)
            }
            Self::CatDecoherence { sizes, points, extrapolate_to, parity } => {
                if sizes.len() < 2 {
                    return Err(CliError::validation(at("sizes"), "need at least two cat sizes"));
                }
                for (k, s) in sizes.iter().enumerate() {
                    positive(&format!("sizes[{k}]"), *s)?;
                }
                if *points < 3 {
                    return Err(CliError::validation(at("points"), "need at least 3 delays"));
                }
                positive("extrapolate_to", *extrapolate_to)?;
                parity_ok(parity)
            }
            Self::WignerCut { size, axis, cavity_dim, parity, shots } => {
                positive("size", *size)?;
                axis.validate(&at("axis"), 8)?;
                if let Some(d) = cavity_dim {
                    let need = cut_dim(*size, axis);
                    if *d < need {
                        return Err(CliError::validation(
                            at("cavity_dim"),
                            format!("truncation guard needs >= {need} for this cat and axis, got {d}"),
                        ));
                    }
                }
                parity_ok(parity)?;
                shots_ok(shots)
            }
            Self::VacuumCalibration { axis, parity } => {
                axis.validate(&at("axis"), 8)?;
                parity_ok(parity)
            }
            Self::ParityCalibration { nbar, detunings_hz, readout_fidelity } => {
                positive("nbar", *nbar)?;
                detunings_hz.validate(&at("detunings_hz"), 5)?;
                fidelity(*readout_fidelity)
            }
            Self::Encode { a_re, a_im, b_re, b_im, sideband } => {
                let norm = a_re * a_re + a_im * a_im + b_re * b_re + b_im * b_im;
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(CliError::validation(at("a_re"), format!("|a|² + |b|² = {norm}, expected 1")));
                }
                sideband.validate(&at("sideband"))
            }
            Self::Reset { decay_time_s, times_s } => {
                positive("decay_time_s", *decay_time_s)?;
                times_s.validate_delays(&at("times_s"), 1)
            }
            Self::Spam { nbars, readout_fidelity, configs } => {
                if nbars.is_empty() {
                    return Err(CliError::validation(at("nbars"), "must not be empty"));
                }
                for (k, n) in nbars.iter().enumerate() {
                    positive(&format!("nbars[{k}]"), *n)?;
                }
                if configs.is_empty() {
                    return Err(CliError::validation(at("configs"), "must not be empty"));
                }
                fidelity(*readout_fidelity)
            }
            Self::LossBudget | Self::DeviceSummary => Ok(()),
            Self::Ringdown { tau_loaded_s, q_ext, tau_ext_s } => {
                positive("tau_loaded_s", *tau_loaded_s)?;
                if q_ext.is_some() && tau_ext_s.is_some() {
                    return Err(CliError::validation(at("q_ext"), "give either q_ext or tau_ext_s, not both"));
                }
                if let Some(q) = q_ext {
                    positive("q_ext", *q)?;
                }
                if let Some(t) = tau_ext_s {
                    positive("tau_ext_s", *t)?;
                }
                Ok(())
            }
            Self::Cooldowns { rows } => {
                if rows.is_empty() {
                    return Err(CliError::validation(at("rows"), "must not be empty"));
                }
                for (k, r) in rows.iter().enumerate() {
                    let f = |n: &str| format!("rows[{k}].{n}");
                    positive(&f("t1_c_s"), r.t1_c_s)?;
                    positive(&f("gamma_down_over_2pi_hz"), r.gamma_down_over_2pi_hz)?;
                    positive(&f("measured_t2_s"), r.measured_t2_s)?;
                    if !(r.nth_q >= 0.0) {
                        return Err(CliError::validation(at(&f("nth_q")), "must be >= 0"));
                    }
                    if !(r.chi_over_2pi_hz >= 0.0) {
                        return Err(CliError::validation(at(&f("chi_over_2pi_hz")), "must be >= 0"));
                    }
                }
                Ok(())
            }
            Self::DephasingBudget { t1_c_s, t1_c_sigma_s, t2_c_s, t2_c_sigma_s, t_up_s, t_up_sigma_s } => {
                positive("t1_c_s", *t1_c_s)?;
                positive("t2_c_s", *t2_c_s)?;
                positive("t_up_s", *t_up_s)?;
                for (n, s) in [("t1_c_sigma_s", t1_c_sigma_s), ("t2_c_sigma_s", t2_c_sigma_s), ("t_up_sigma_s", t_up_sigma_s)] {
                    if !(*s >= 0.0 && s.is_finite()) {
                        return Err(CliError::validation(at(n), "must be >= 0"));
                    }
                }
                Ok(())
            }
            Self::Kerr { nbar } => positive("nbar", *nbar),
        }
    }
}

/// Cavity dimension the truncation guard asks for when cutting a cat of
/// size `size` out to the largest `|y|` on `axis`.
pub fn cut_dim(size: f64, axis: &Sweep) -> usize {
    let nbar = size / 4.0;
    let reach = axis.values().iter().fold(0.0f64, |m, y| m.max(y.abs()));
    guarded_dim(nbar + reach * reach + 2.0 * reach * nbar.sqrt()) + 2
}

impl RunConfig {
    /// Parses JSON text. Syntax errors are parse errors; schema violations
    /// carry the offending field path.
    pub fn from_json(text: &str, source_name: &str) -> CliResult<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Parse { source_name: source_name.to_string(), message: e.to_string() })?;
        let cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::validation(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.name.trim().is_empty() {
            return Err(CliError::validation("name", "must not be empty"));
        }
        self.device.params()?;
        for (k, e) in self.experiments.iter().enumerate() {
            e.validate(&format!("experiments[{k}]"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_round_trip() {
        let p = SystemParams::table_i();
        let q = DeviceConfig::from_params(&p).params().unwrap();
        assert!((q.chi - p.chi).abs() < 1e-9 * p.chi);
        assert_eq!(q.t1_c, p.t1_c);
    }

    #[test]
    fn missing_field_reports_path() {
        let mut v = serde_json::to_value(DeviceConfig::default()).unwrap();
        v.as_object_mut().unwrap().remove("t1_c_s");
        let text = serde_json::json!({ "name": "x", "device": v }).to_string();
        match RunConfig::from_json(&text, "t") {
            Err(CliError::Validation { path, message }) => {
                assert_eq!(path, "device");
                assert!(message.contains("t1_c_s"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_error_is_parse() {
        assert!(matches!(RunConfig::from_json("{ nope", "t"), Err(CliError::Parse { .. })));
    }

    #[test]
    fn sweep_forms() {
        let s: Sweep = serde_json::from_str(r#"{"start": 0, "stop": 1, "points": 3}"#).unwrap();
        assert_eq!(s.values(), vec![0.0, 0.5, 1.0]);
        let s: Sweep = serde_json::from_str("[0.1, 0.2]").unwrap();
        assert_eq!(s.values(), vec![0.1, 0.2]);
    }

    #[test]
    fn bad_experiment_field_path() {
        let text = r#"{"name": "x", "experiments": [{"protocol": "kerr", "nbar": 4},
            {"protocol": "t1", "delays_s": [0, 0.01, -1]}]}"#;
        match RunConfig::from_json(text, "t") {
            Err(CliError::Validation { path, .. }) => assert_eq!(path, "experiments[1].delays_s"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truncation_checked_up_front() {
        let text = r#"{"name": "x", "experiments": [{"protocol": "wigner_cut", "size": 64,
            "axis": {"start": -1, "stop": 1, "points": 41}, "cavity_dim": 20}]}"#;
        match RunConfig::from_json(text, "t") {
            Err(CliError::Validation { path, .. }) => assert_eq!(path, "experiments[0].cavity_dim"),
            other => panic!("{other:?}"),
        }
    }
}
