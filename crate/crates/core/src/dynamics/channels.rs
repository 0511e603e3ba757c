use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::SystemParams;
use crate::hilbert::{annihilation, creation, FockSpace, Operator, CAVITY, READOUT, TRANSMON};
use crate::linalg::c;
use crate::Result;

/// Collapse operator `L` with rate `γ`; the dissipator is `γ D[L]`.
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    pub name: &'static str,
    pub operator: Operator,
    pub rate: f64,
}

/// Per-channel switches. Everything is on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelToggles {
    pub cavity_decay: bool,
    pub cavity_heating: bool,
    pub transmon_decay: bool,
    pub transmon_heating: bool,
    pub transmon_dephasing: bool,
    pub readout_decay: bool,
}

impl Default for ChannelToggles {
    fn default() -> Self {
        Self::all()
    }
}

impl ChannelToggles {
    pub fn all() -> Self {
        Self {
            cavity_decay: true,
            cavity_heating: true,
            transmon_decay: true,
            transmon_heating: true,
            transmon_dephasing: true,
            readout_decay: true,
        }
    }

    pub fn none() -> Self {
        Self {
            cavity_decay: false,
            cavity_heating: false,
            transmon_decay: false,
            transmon_heating: false,
            transmon_dephasing: false,
            readout_decay: false,
        }
    }

    pub fn only_cavity() -> Self {
        Self { cavity_decay: true, cavity_heating: true, ..Self::none() }
    }

    pub fn only_transmon() -> Self {
        Self { transmon_decay: true, transmon_heating: true, transmon_dephasing: true, ..Self::none() }
    }
}

/// Collapse channels of every subsystem present in `space`.
pub fn collapse_channels(params: &SystemParams, space: &Arc<FockSpace>) -> Result<Vec<CollapseChannel>> {
    collapse_channels_with(params, space, &ChannelToggles::all())
}

pub fn collapse_channels_with(
    params: &SystemParams,
    space: &Arc<FockSpace>,
    toggles: &ChannelToggles,
) -> Result<Vec<CollapseChannel>> {
    params.validate()?;
    let mut out = Vec::new();
    let mut push = |name, op: Operator, rate: f64, on: bool| {
        if on && rate > 0.0 && rate.is_finite() {
            out.push(CollapseChannel { name, operator: op, rate });
        }
    };
    if space.contains(CAVITY) {
        let a = annihilation(space, CAVITY)?;
        push("cavity_decay", a.clone(), (1.0 + params.nth_c) / params.t1_c, toggles.cavity_decay);
        push("cavity_heating", a.adjoint(), params.nth_c / params.t1_c, toggles.cavity_heating);
    }
    if space.contains(TRANSMON) {
        let q = annihilation(space, TRANSMON)?;
        push("transmon_decay", q.clone(), (1.0 + params.nth_q) / params.t1_q, toggles.transmon_decay);
        push("transmon_heating", creation(space, TRANSMON)?, params.nth_q / params.t1_q, toggles.transmon_heating);
        let d = space.dim_of(TRANSMON)?;
        let b = params.f_dephasing_weight()?;
        // diag(0, 1, b, then the ladder value n beyond f)
        let weights = DMatrix::from_fn(d, d, |i, j| match (i == j, i) {
            (false, _) => c(0.0),
            (true, 2) => c(b),
            (true, n) => c(n as f64),
        });
        let deph = Operator::embed(space, TRANSMON, &weights)?;
        push("transmon_dephasing", deph, params.transmon_dephasing_rate()?, toggles.transmon_dephasing);
    }
    if space.contains(READOUT) {
        push("readout_decay", annihilation(space, READOUT)?, 1.0 / params.t1_r, toggles.readout_decay);
    }
    Ok(out)
}
