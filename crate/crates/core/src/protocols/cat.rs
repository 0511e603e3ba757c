//! Cat-state preparation, Wigner cuts, cat decoherence and the SPAM budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::parity::{parity_branches, parity_postselect, ParityMode, ParityOutcome, SimulatedParity};
use super::{ExperimentResult, Metadata, ObservableKind};
use crate::analysis::{fit_decay, fit_gaussian, FitResult};
use crate::dynamics::{build_static_hamiltonian, collapse_channels, evolve, evolve_sampled, ChannelToggles, EvolutionSpec, SystemParams};
use crate::hilbert::{
    coherent_state, displacement, guarded_dim, parity_operator, truncation_guard, wigner, FockSpace, QuantumState,
    WignerConvention, CAVITY,
};
use crate::{Error, Result, C64};

/// Displaces vacuum to `|α⟩` on a cavity of dimension `cavity_dim` and
/// post-selects the requested parity.
pub fn prepare_cat(
    alpha: C64,
    params: &SystemParams,
    mode: &ParityMode,
    cavity_dim: usize,
    even: bool,
) -> Result<ParityOutcome> {
    let space = FockSpace::cavity(cavity_dim)?;
    let coherent = coherent_state(&space, CAVITY, alpha)?;
    parity_postselect(&coherent, params, mode, even)
}

fn parity_value(state: &QuantumState, params: &SystemParams, mode: &ParityMode) -> Result<f64> {
    let (pe, po) = parity_branches(state, params, mode)?;
    Ok((pe - po).clamp(-1.0, 1.0))
}

/// Displaced parity `⟨D(β) P D†(β)⟩` at `β = i·y` for each `y`.
pub fn wigner_cut_experiment(
    state: &QuantumState,
    params: &SystemParams,
    axis_points: &[f64],
    mode: &ParityMode,
) -> Result<ExperimentResult> {
    if axis_points.is_empty() || axis_points.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidParameter("axis points must be finite and non-empty".into()));
    }
    let grid: Vec<C64> = axis_points.iter().map(|y| C64::new(0.0, *y)).collect();
    let obs = match mode {
        ParityMode::Ideal => wigner(state, CAVITY, &grid, WignerConvention::Paper)?,
        ParityMode::Simulated(_) => {
            let space = state.space().clone();
            let n = state.mean_number(CAVITY)?;
            let d = state.dim();
            for b in &grid {
                truncation_guard(CAVITY, n + b.norm_sqr() + 2.0 * b.norm() * n.sqrt(), d)?;
            }
            grid.par_iter()
                .map(|b| {
                    let shifted = state.apply_operator(&displacement(&space, CAVITY, -*b)?)?;
                    parity_value(&shifted, params, mode)
                })
                .collect::<Result<_>>()?
        }
    };
    let meta = Metadata::new(params).set("mean_photons", state.mean_number(CAVITY)?).label("protocol", "wigner_cut");
    ExperimentResult::new("im_beta", axis_points.to_vec(), "displaced_parity", ObservableKind::Parity, obs, meta)
}

/// Cuts the vacuum along the same axis, fits a Gaussian and returns the
/// factor that rescales the axis so that the vacuum width becomes 1/2.
pub fn vacuum_axis_scale(params: &SystemParams, axis_points: &[f64], mode: &ParityMode) -> Result<(f64, FitResult)> {
    let reach = axis_points.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let space = FockSpace::cavity(guarded_dim(reach * reach).max(4))?;
    let vac = QuantumState::basis(&space, &[0])?;
    let cut = wigner_cut_experiment(&vac, params, axis_points, mode)?;
    let fit = fit_gaussian(&cut.sweep_values, &cut.observable)?;
    Ok((0.5 / fit.value("sigma"), fit))
}

#[derive(Debug, Clone)]
pub struct CatDecoherence {
    /// Parity of the decaying cat at each delay.
    pub experiment: ExperimentResult,
    /// Cat parity minus the parity of the matching incoherent mixture.
    pub interference: Vec<f64>,
    pub fit: FitResult,
    pub t_d: f64,
    pub size: f64,
}

/// Delays covering the early, linear-rate part of the decay:
/// up to `min(2 T_d, 0.02 T1_c)` for cat size `size`.
pub fn cat_delay_grid(size: f64, t1_c: f64, points: usize) -> Result<Vec<f64>> {
    if !(size > 0.0) || !(t1_c > 0.0) || points < 3 {
        return Err(Error::InvalidParameter("need size > 0, T1_c > 0 and at least 3 points".into()));
    }
    let t_max = (4.0 * t1_c / size).min(0.02 * t1_c);
    Ok((0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect())
}

/// Prepares the even cat `N(|α⟩ + |−α⟩)`, lets it decay under the cavity
/// channels and measures its parity. The coherent mixture
/// `(|α⟩⟨α| + |−α⟩⟨−α|)/2` is propagated alongside; the fringe signal is the
/// cat parity minus the mixture's share and is fitted to `A e^{−t/T_d}`.
pub fn cat_decoherence_experiment(
    alpha: C64,
    params: &SystemParams,
    delays: &[f64],
    mode: &ParityMode,
) -> Result<CatDecoherence> {
    let nbar = alpha.norm_sqr();
    if nbar == 0.0 {
        return Err(Error::InvalidParameter("vacuum has no interference fringe".into()));
    }
    if delays.len() < 3 || delays.windows(2).any(|w| !(w[1] > w[0])) || delays[0] < 0.0 {
        return Err(Error::InvalidParameter("need at least 3 ascending non-negative delays".into()));
    }
    let dim = guarded_dim(nbar).max(4);
    let space = FockSpace::cavity(dim)?;
    let cat = prepare_cat(alpha, params, &ParityMode::Ideal, dim, true)?.post_state;
    let plus = coherent_state(&space, CAVITY, alpha)?;
    let minus = coherent_state(&space, CAVITY, -alpha)?;
    let mixture = plus.mix(0.5, &minus)?;

    let t_end = *delays.last().unwrap_or(&0.0);
    let spec = EvolutionSpec::new(build_static_hamiltonian(params, &space)?, 0.0, t_end.max(f64::MIN_POSITIVE))
        .with_collapse(collapse_channels(params, &space)?);
    let track = |state: &QuantumState| -> Result<Vec<f64>> {
        match mode {
            ParityMode::Ideal => {
                let p = parity_operator(&space, CAVITY)?;
                let tr = evolve_sampled(state, &spec, delays, &[p])?;
                Ok(tr.expectations.iter().map(|e| e[0].re.clamp(-1.0, 1.0)).collect())
            }
            ParityMode::Simulated(_) => delays
                .par_iter()
                .map(|&t| {
                    let s = if t > 0.0 {
                        let mut sp = spec.clone();
                        sp.t1 = t;
                        evolve(state, &sp)?
                    } else {
                        state.clone()
                    };
                    parity_value(&s, params, mode)
                })
                .collect(),
        }
    };
    let p_cat = track(&cat)?;
    let p_mix = track(&mixture)?;
    let norm = 1.0 + (-2.0 * nbar).exp();
    let interference: Vec<f64> = p_cat.iter().zip(&p_mix).map(|(c, m)| c - m / norm).collect();
    let fit = fit_decay(delays, &interference)?;
    let t_d = fit.value("tau");
    let size = 4.0 * nbar;
    let meta = Metadata::new(params)
        .set("alpha_re", alpha.re)
        .set("alpha_im", alpha.im)
        .set("size", size)
        .set("cavity_dim", dim as f64)
        .set("t_d", t_d)
        .label("protocol", "cat_decoherence");
    let experiment = ExperimentResult::new("delay_s", delays.to_vec(), "parity", ObservableKind::Parity, p_cat, meta)?;
    Ok(CatDecoherence { experiment, interference, fit, t_d, size })
}

/// Error channels that can be switched on individually in the SPAM budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpamConfig {
    Ideal,
    Readout,
    TransmonDecay,
    TransmonDephasing,
    Transmon,
    CavityLoss,
    All,
}

impl SpamConfig {
    pub const ALL: [SpamConfig; 7] = [
        Self::Ideal,
        Self::Readout,
        Self::TransmonDecay,
        Self::TransmonDephasing,
        Self::Transmon,
        Self::CavityLoss,
        Self::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::Readout => "readout",
            Self::TransmonDecay => "transmon_decay",
            Self::TransmonDephasing => "transmon_dephasing",
            Self::Transmon => "transmon",
            Self::CavityLoss => "cavity_loss",
            Self::All => "all",
        }
    }

    pub fn toggles(self) -> ChannelToggles {
        let none = ChannelToggles::none();
        match self {
            Self::Ideal | Self::Readout => none,
            Self::TransmonDecay => ChannelToggles { transmon_decay: true, transmon_heating: true, ..none },
            Self::TransmonDephasing => ChannelToggles { transmon_dephasing: true, ..none },
            Self::Transmon => ChannelToggles::only_transmon(),
            Self::CavityLoss => ChannelToggles::only_cavity(),
            Self::All => ChannelToggles::all(),
        }
    }

    pub fn readout_errors(self) -> bool {
        matches!(self, Self::Readout | Self::All)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamEntry {
    pub config: SpamConfig,
    pub mean_photons: f64,
    /// Measured parity at the origin of the post-selected even cat.
    pub visibility: f64,
    /// `1 − visibility`.
    pub loss: f64,
}

/// Prepares the even cat by a simulated parity measurement on `|α⟩` and
/// reads it back with a second one, once per configuration.
pub fn spam_error_budget(
    alpha: C64,
    params: &SystemParams,
    readout_fidelity: f64,
    configs: &[SpamConfig],
) -> Result<Vec<SpamEntry>> {
    let nbar = alpha.norm_sqr();
    let dim = guarded_dim(nbar).max(4);
    configs
        .par_iter()
        .map(|&config| {
            let sim = SimulatedParity {
                readout_fidelity: if config.readout_errors() { readout_fidelity } else { 1.0 },
                drive_detuning: 0.0,
                channels: config.toggles(),
                transmon_dim: 2,
            };
            let mode = ParityMode::Simulated(sim);
            let cat = prepare_cat(alpha, params, &mode, dim, true)?.post_state;
            let visibility = parity_value(&cat, params, &mode)?;
            Ok(SpamEntry { config, mean_photons: nbar, visibility, loss: 1.0 - visibility })
        })
        .collect()
}
