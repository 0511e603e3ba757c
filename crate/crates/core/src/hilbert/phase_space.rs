use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use super::operator::local_displacement;
use super::{truncation_guard, QuantumState};
use crate::{Result, C64};

/// Normalisation of the displaced-parity Wigner function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WignerConvention {
    /// `2/π · ⟨D P D†⟩`, integrates to one.
    Standard,
    /// Bare displaced parity, range `[−1, 1]`.
    #[default]
    Paper,
}

impl WignerConvention {
    pub fn prefactor(self) -> f64 {
        match self {
            Self::Standard => FRAC_2_PI,
            Self::Paper => 1.0,
        }
    }
}

/// `W(β) = c·Tr[ρ D(β) P D†(β)]` for each grid point, evaluated on the
/// reduced state of `subsystem`.
pub fn wigner(
    state: &QuantumState,
    subsystem: &str,
    grid: &[C64],
    convention: WignerConvention,
) -> Result<Vec<f64>> {
    let rho = state.reduced_density(subsystem)?;
    let d = rho.nrows();
    let a_mean: C64 = (1..d).map(|n| rho[(n, n - 1)] * (n as f64).sqrt()).sum();
    let n_mean: f64 = (0..d).map(|n| n as f64 * rho[(n, n)].re).sum();
    for beta in grid {
        // photon number of D†(β) ρ D(β)
        let shifted = n_mean - 2.0 * (beta.conj() * a_mean).re + beta.norm_sqr();
        truncation_guard(subsystem, shifted, d)?;
    }
    let c = convention.prefactor();
    Ok(grid
        .iter()
        .map(|&beta| {
            let dm = local_displacement(d, -beta);
            let shifted = &dm * &rho * dm.adjoint();
            c * (0..d).map(|n| if n % 2 == 0 { shifted[(n, n)].re } else { -shifted[(n, n)].re }).sum::<f64>()
        })
        .collect())
}

/// Parity of `subsystem` (Wigner value at the origin, paper convention).
pub fn wigner_origin_parity(state: &QuantumState, subsystem: &str) -> Result<f64> {
    let rho = state.reduced_density(subsystem)?;
    Ok((0..rho.nrows())
        .map(|n| if n % 2 == 0 { rho[(n, n)].re } else { -rho[(n, n)].re })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{cat_state, coherent_state, FockSpace};

    fn imag_axis(lo: f64, hi: f64, n: usize) -> Vec<C64> {
        (0..n).map(|k| C64::new(0.0, lo + (hi - lo) * k as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn vacuum_is_gaussian_with_half_width() {
        let s = FockSpace::cavity(20).unwrap();
        let vac = QuantumState::basis(&s, &[0]).unwrap();
        let grid = imag_axis(-1.5, 1.5, 31);
        let w = wigner(&vac, "cavity", &grid, WignerConvention::Paper).unwrap();
        for (b, v) in grid.iter().zip(&w) {
            // exp(−x²/(2σ²)) with σ = 1/2
            assert!((v - (-2.0 * b.im * b.im).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn origin_values() {
        let s = FockSpace::cavity(40).unwrap();
        let one = QuantumState::basis(&s, &[1]).unwrap();
        let w = wigner(&one, "cavity", &[C64::new(0.0, 0.0)], WignerConvention::Paper).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-12);
        let cat = cat_state(&s, "cavity", C64::new(2.0, 0.0), true).unwrap();
        let w = wigner(&cat, "cavity", &[C64::new(0.0, 0.0)], WignerConvention::Paper).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-6);
        assert!((wigner_origin_parity(&cat, "cavity").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_convention_normalises() {
        let s = FockSpace::cavity(45).unwrap();
        let vac = QuantumState::basis(&s, &[0]).unwrap();
        let h = 0.1;
        let pts: Vec<C64> = (-25..=25)
            .flat_map(|i| (-25..=25).map(move |j| C64::new(i as f64 * h, j as f64 * h)))
            .collect();
        let w = wigner(&vac, "cavity", &pts, WignerConvention::Standard).unwrap();
        let integral: f64 = w.iter().sum::<f64>() * h * h;
        assert!((integral - 1.0).abs() < 1e-3);
    }

    #[test]
    fn coherent_peak_sits_at_alpha() {
        let s = FockSpace::cavity(30).unwrap();
        let alpha = C64::new(1.0, 0.5);
        let st = coherent_state(&s, "cavity", alpha).unwrap();
        let mut grid = vec![alpha];
        for dx in [-0.2, 0.2] {
            grid.push(alpha + C64::new(dx, 0.0));
            grid.push(alpha + C64::new(0.0, dx));
        }
        let w = wigner(&st, "cavity", &grid, WignerConvention::Paper).unwrap();
        assert!(w[1..].iter().all(|v| *v < w[0]));
        assert!((w[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn guard_applies_after_displacement() {
        let s = FockSpace::cavity(20).unwrap();
        let vac = QuantumState::basis(&s, &[0]).unwrap();
        assert!(wigner(&vac, "cavity", &[C64::new(2.5, 0.0)], WignerConvention::Paper).is_err());
    }
}
