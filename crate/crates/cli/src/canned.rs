//! Built-in configurations behind `reproduce`.

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Ring-down Q/τ conversions.
    Fig2,
    /// Cavity T1 and T2 from simulated sequences, with fits.
    Fig3,
    /// Vacuum calibration and cat Wigner cuts.
    Fig4,
    /// Cat decoherence rate against cat size.
    Fig5,
    /// Device parameters and derived figures of merit.
    Table1,
    /// Cavity loss budget.
    Table3,
    /// Predicted T2 for each cooldown.
    Table4,
    /// Dephasing decomposition of the measured T2.
    #[value(name = "appendixD")]
    AppendixD,
    /// Parity-drive detuning calibration.
    #[value(name = "appendixH")]
    AppendixH,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Table1 => "table1",
            Self::Table3 => "table3",
            Self::Table4 => "table4",
            Self::AppendixD => "appendixD",
            Self::AppendixH => "appendixH",
        }
    }

    pub fn config(self) -> &'static str {
        match self {
            Self::Fig2 => include_str!("../configs/figures/fig2_ringdown.json"),
            Self::Fig3 => include_str!("../configs/figures/fig3_coherence.json"),
            Self::Fig4 => include_str!("../configs/figures/fig4_wigner.json"),
            Self::Fig5 => include_str!("../configs/figures/fig5_desk.json"),
            Self::Table1 => include_str!("../configs/tables/table1.json"),
            Self::Table3 => include_str!("../configs/tables/table3.json"),
            Self::Table4 => include_str!("../configs/tables/table4.json"),
            Self::AppendixD => include_str!("../configs/appendix/appendixD.json"),
            Self::AppendixH => include_str!("../configs/appendix/appendixH.json"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;

    #[test]
    fn every_canned_config_validates() {
        for t in Target::value_variants() {
            RunConfig::from_json(t.config(), t.name()).unwrap_or_else(|e| panic!("{}: {e}", t.name()));
        }
    }
}
