use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SystemParams;
use crate::hilbert::{annihilation, creation, FockSpace, Operator, CAVITY, READOUT, TRANSMON};
use crate::linalg::{self, c};
use crate::{Error, Result, C64};

/// Static Hamiltonian in the frame rotating at each bare mode frequency:
/// self-Kerr terms `−K/2 x†²x²` and the three cross-Kerr terms.
pub fn build_static_hamiltonian(params: &SystemParams, space: &Arc<FockSpace>) -> Result<Operator> {
    for label in space.labels() {
        if ![CAVITY, TRANSMON, READOUT].contains(&label.as_str()) {
            return Err(Error::UnknownSubsystem(format!(
                "{label} (expected cavity, transmon or readout)"
            )));
        }
    }
    let idx = |l: &str| space.index_of(l).ok();
    let (ic, iq, ir) = (idx(CAVITY), idx(TRANSMON), idx(READOUT));
    let n = space.total_dim();
    let diag = (0..n).map(|i| {
        let occ = |k: Option<usize>| k.map_or(0.0, |k| space.occupation(i, k) as f64);
        let (nc, nq, nr) = (occ(ic), occ(iq), occ(ir));
        let e = -0.5 * params.k_c * nc * (nc - 1.0)
            - 0.5 * params.k_q * nq * (nq - 1.0)
            - 0.5 * params.k_r * nr * (nr - 1.0)
            - params.chi * nc * nq
            - params.chi_qr * nr * nq
            - params.chi_cr * nr * nc;
        (i, i, c(e))
    });
    Operator::from_csr(space, linalg::csr_from_triplets(n, diag), true)
}

/// Drive types of the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveKind {
    /// `ε/2 c† + h.c.`
    CavityDisplacement,
    /// `ε/2 r† + h.c.`
    ReadoutMeasurement,
    /// `ε/2 q† + h.c.`
    TransmonDrive,
    /// `Ω/(2√2) q²c† + h.c.`, resonant at the f-level Kerr shift.
    SidebandQqC,
    /// `Ωcr/2 c r† + h.c.`
    ResetCR,
}

impl DriveKind {
    pub const ALL: [DriveKind; 5] = [
        Self::CavityDisplacement,
        Self::ReadoutMeasurement,
        Self::TransmonDrive,
        Self::SidebandQqC,
        Self::ResetCR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::CavityDisplacement => "cavity_displacement",
            Self::ReadoutMeasurement => "readout_measurement",
            Self::TransmonDrive => "transmon_drive",
            Self::SidebandQqC => "sideband_qq_c",
            Self::ResetCR => "reset_c_r",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown drive kind `{name}`")))
    }

    fn subsystems(self) -> &'static [&'static str] {
        match self {
            Self::CavityDisplacement => &[CAVITY],
            Self::ReadoutMeasurement => &[READOUT],
            Self::TransmonDrive => &[TRANSMON],
            Self::SidebandQqC => &[CAVITY, TRANSMON],
            Self::ResetCR => &[CAVITY, READOUT],
        }
    }
}

/// Complex envelope `f(t)` of a drive, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Envelope {
    Off,
    /// Flat top of `amplitude·e^{iφ}` over `[start, start + duration]` with
    /// cosine rise and fall of length `ramp` inside that window. The pulse
    /// area is `amplitude · (duration − ramp)`.
    Square { amplitude: f64, phase: f64, start: f64, duration: f64, ramp: f64 },
    /// Gaussian centred at `center`, cut at `center ± cutoff·sigma`.
    Gaussian { amplitude: f64, phase: f64, center: f64, sigma: f64, cutoff: f64 },
}

impl Envelope {
    pub fn square(amplitude: f64, start: f64, duration: f64, ramp: f64) -> Self {
        Self::Square { amplitude, phase: 0.0, start, duration, ramp }
    }

    /// Square pulse whose area equals `area` at flat-top `amplitude`.
    pub fn square_with_area(amplitude: f64, area: f64, start: f64, ramp: f64) -> Result<Self> {
        if amplitude <= 0.0 {
            return Err(Error::InvalidParameter("pulse amplitude must be > 0".into()));
        }
        Ok(Self::square(amplitude, start, area / amplitude + ramp, ramp))
    }

    pub fn with_phase(self, phi: f64) -> Self {
        match self {
            Self::Off => Self::Off,
            Self::Square { amplitude, start, duration, ramp, .. } => {
                Self::Square { amplitude, phase: phi, start, duration, ramp }
            }
            Self::Gaussian { amplitude, center, sigma, cutoff, .. } => {
                Self::Gaussian { amplitude, phase: phi, center, sigma, cutoff }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("envelope {name} is not finite")))
            }
        };
        match *self {
            Self::Off => Ok(()),
            Self::Square { amplitude, phase, start, duration, ramp } => {
                for (n, v) in [("amplitude", amplitude), ("phase", phase), ("start", start)] {
                    finite(n, v)?;
                }
                finite("duration", duration)?;
                if duration < 0.0 || ramp < 0.0 || 2.0 * ramp > duration {
                    return Err(Error::InvalidParameter(format!(
                        "square envelope needs 0 ≤ 2·ramp ≤ duration (ramp {ramp:e}, duration {duration:e})"
                    )));
                }
                Ok(())
            }
            Self::Gaussian { amplitude, phase, center, sigma, cutoff } => {
                for (n, v) in [("amplitude", amplitude), ("phase", phase), ("center", center)] {
                    finite(n, v)?;
                }
                if !(sigma > 0.0 && sigma.is_finite()) || !(cutoff > 0.0 && cutoff.is_finite()) {
                    return Err(Error::InvalidParameter("gaussian sigma and cutoff must be > 0".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> C64 {
        match *self {
            Self::Off => linalg::ZERO,
            Self::Square { amplitude, phase, start, duration, ramp } => {
                let end = start + duration;
                if t < start || t > end {
                    return linalg::ZERO;
                }
                let shape = if ramp > 0.0 && t < start + ramp {
                    0.5 * (1.0 - (PI * (t - start) / ramp).cos())
                } else if ramp > 0.0 && t > end - ramp {
                    0.5 * (1.0 - (PI * (end - t) / ramp).cos())
                } else {
                    1.0
                };
                C64::from_polar(amplitude * shape, phase)
            }
            Self::Gaussian { amplitude, phase, center, sigma, cutoff } => {
                let x = (t - center) / sigma;
                if x.abs() > cutoff {
                    return linalg::ZERO;
                }
                C64::from_polar(amplitude * (-0.5 * x * x).exp(), phase)
            }
        }
    }

    /// Peak modulus.
    pub fn peak(&self) -> f64 {
        match *self {
            Self::Off => 0.0,
            Self::Square { amplitude, .. } | Self::Gaussian { amplitude, .. } => amplitude.abs(),
        }
    }

    /// Support `[a, b]`, `None` when the envelope is off.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Off => None,
            Self::Square { amplitude, start, duration, .. } => {
                (amplitude != 0.0).then_some((start, start + duration))
            }
            Self::Gaussian { amplitude, center, sigma, cutoff, .. } => {
                (amplitude != 0.0).then_some((center - cutoff * sigma, center + cutoff * sigma))
            }
        }
    }

    /// Times where the envelope or its derivative is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Self::Off => vec![],
            Self::Square { start, duration, ramp, .. } => {
                vec![start, start + ramp, start + duration - ramp, start + duration]
            }
            Self::Gaussian { .. } => self.support().map(|(a, b)| vec![a, b]).unwrap_or_default(),
        }
    }
}

/// One drive: `H_d(t) = f(t)·A + f*(t)·A†` with `f = env(t)·e^{−i(ν + Δ)t}`.
#[derive(Debug, Clone)]
pub struct DriveTerm {
    pub kind: DriveKind,
    pub envelope: Envelope,
    /// Offset from the nominal drive frequency (rad/s).
    pub detuning: f64,
    /// Nominal drive frequency in the rotating frame (rad/s).
    pub nominal: f64,
    pub operator: Operator,
}

impl DriveTerm {
    pub fn coefficient(&self, t: f64) -> C64 {
        let env = self.envelope.value(t);
        if env == linalg::ZERO {
            return env;
        }
        env * C64::from_polar(1.0, -(self.nominal + self.detuning) * t)
    }

    pub fn is_off(&self) -> bool {
        self.envelope.support().is_none()
    }

    /// Hermitian operator `f A + f* A†` at time `t`.
    pub fn hamiltonian_at(&self, t: f64) -> Result<Operator> {
        let f = self.coefficient(t);
        let h = (self.operator.scale(f) + self.operator.adjoint().scale(f.conj()))?;
        Operator::from_csr(self.operator.space(), h.matrix().clone(), true)
    }
}

/// Builds the rotating-frame drive term of `kind`. The Hermitian conjugate
/// is implied; `detuning` enters as an extra `e^{−iΔt}` on the envelope.
pub fn build_drive(
    kind: DriveKind,
    params: &SystemParams,
    space: &Arc<FockSpace>,
    envelope: Envelope,
    detuning: f64,
) -> Result<DriveTerm> {
    envelope.validate()?;
    if !detuning.is_finite() {
        return Err(Error::InvalidParameter("drive detuning is not finite".into()));
    }
    for l in kind.subsystems() {
        space.index_of(l)?;
    }
    let (operator, nominal) = match kind {
        DriveKind::CavityDisplacement => (creation(space, CAVITY)?.scale_re(0.5), 0.0),
        DriveKind::ReadoutMeasurement => (creation(space, READOUT)?.scale_re(0.5), 0.0),
        DriveKind::TransmonDrive => (creation(space, TRANSMON)?.scale_re(0.5), 0.0),
        DriveKind::SidebandQqC => {
            let q = annihilation(space, TRANSMON)?;
            let q2 = (&q * &q)?;
            let op = (&q2 * &creation(space, CAVITY)?)?;
            (op.scale_re(1.0 / (2.0 * SQRT_2)), params.k_q)
        }
        DriveKind::ResetCR => {
            let op = (&annihilation(space, CAVITY)? * &creation(space, READOUT)?)?;
            (op.scale_re(0.5), 0.0)
        }
    };
    Ok(DriveTerm { kind, envelope, detuning, nominal, operator })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::QuantumState;

    fn energy(h: &Operator, space: &Arc<FockSpace>, occ: &[usize]) -> f64 {
        let s = QuantumState::basis(space, occ).unwrap();
        s.expectation(h).unwrap().re
    }

    #[test]
    fn static_energies() {
        let p = SystemParams::table_i();
        let s = FockSpace::cavity_transmon(4, 3).unwrap();
        let h = build_static_hamiltonian(&p, &s).unwrap();
        assert!(h.is_diagonal() && h.is_hermitian());
        assert!((energy(&h, &s, &[1, 1]) + p.chi).abs() < 1e-6);
        assert!((energy(&h, &s, &[2, 0]) + p.k_c).abs() < 1e-9);
        assert!((energy(&h, &s, &[0, 2]) + p.k_q).abs() < 1e-3);
        assert_eq!(energy(&h, &s, &[1, 0]), 0.0);
    }

    #[test]
    fn readout_cross_terms() {
        let p = SystemParams::table_i();
        let s = FockSpace::new(&[(CAVITY, 3), (TRANSMON, 2), (READOUT, 2)]).unwrap();
        let h = build_static_hamiltonian(&p, &s).unwrap();
        let e = energy(&h, &s, &[1, 1, 1]);
        assert!((e + p.chi + p.chi_qr + p.chi_cr).abs() < 1e-6);
        let bad = FockSpace::new(&[("qubit", 2)]).unwrap();
        assert!(build_static_hamiltonian(&p, &bad).is_err());
    }

    #[test]
    fn envelope_area_and_shape() {
        let env = Envelope::square_with_area(2.0, 3.0, 1.0, 0.1).unwrap();
        let n = 200_000;
        let (a, b) = env.support().unwrap();
        let h = (b - a) / n as f64;
        let area: f64 = (0..n).map(|k| env.value(a + (k as f64 + 0.5) * h).re * h).sum();
        assert!((area - 3.0).abs() < 1e-6);
        assert_eq!(env.value(0.99), linalg::ZERO);
        assert!((env.value(1.5).re - 2.0).abs() < 1e-15);
        assert!(Envelope::square(1.0, 0.0, 1.0, 0.6).validate().is_err());
    }

    #[test]
    fn drive_is_hermitian_and_detuned() {
        let p = SystemParams::table_i();
        let s = FockSpace::cavity_transmon(4, 3).unwrap();
        let env = Envelope::square(1e6, 0.0, 1e-6, 0.0);
        for kind in [DriveKind::CavityDisplacement, DriveKind::TransmonDrive, DriveKind::SidebandQqC] {
            let d = build_drive(kind, &p, &s, env, 1e5).unwrap();
            assert!(d.hamiltonian_at(3e-7).is_ok());
            let f = d.coefficient(3e-7);
            let expect = C64::from_polar(1e6, -(d.nominal + 1e5) * 3e-7);
            assert!((f - expect).norm() < 1e-6);
        }
        assert!(build_drive(DriveKind::ResetCR, &p, &s, env, 0.0).is_err());
        assert!(DriveKind::parse("sideband_qq_c").is_ok());
        assert!(DriveKind::parse("laser").is_err());
    }

    #[test]
    fn sideband_matrix_element() {
        let p = SystemParams::table_i();
        let s = FockSpace::cavity_transmon(3, 3).unwrap();
        let d = build_drive(DriveKind::SidebandQqC, &p, &s, Envelope::Off, 0.0).unwrap();
        let m = d.operator.to_dense();
        let from = s.basis_index(&[0, 2]).unwrap();
        let to = s.basis_index(&[1, 0]).unwrap();
        // (1/(2√2))·√2·√1 = 1/2
        assert!((m[(to, from)].re - 0.5).abs() < 1e-15);
        assert!(d.is_off());
    }
}
