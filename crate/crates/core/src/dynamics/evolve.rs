use nalgebra::{DMatrix, DVector};

use super::channels::CollapseChannel;
use super::hamiltonian::DriveTerm;
use super::integrator::{Dopri5, Tolerances};
use crate::hilbert::{same_space, Operator, QuantumState, StateData};
use crate::linalg::{self, Csr, I, ONE, ZERO};
use crate::{Error, Result, C64};

/// Largest Liouvillian dimension (`dim²`) propagated in closed form.
pub const CLOSED_FORM_MAX: usize = 576;
/// Largest `dim²` accepted by [`StaticPropagator`].
pub const PROPAGATOR_MAX: usize = 1024;
const TRACE_DRIFT_TOL: f64 = 1e-6;

/// How `evolve` picks its solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Exact phases or a superoperator exponential when the problem is
    /// static and small enough, the adaptive integrator otherwise.
    #[default]
    Auto,
    /// Always use the adaptive integrator.
    Integrator,
}

/// Everything `evolve` needs besides the initial state.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub hamiltonian: Operator,
    pub drives: Vec<DriveTerm>,
    pub collapse: Vec<CollapseChannel>,
    pub t0: f64,
    pub t1: f64,
    pub tolerances: Tolerances,
    pub max_step: Option<f64>,
    pub method: Method,
}

impl EvolutionSpec {
    pub fn new(hamiltonian: Operator, t0: f64, t1: f64) -> Self {
        Self {
            hamiltonian,
            drives: Vec::new(),
            collapse: Vec::new(),
            t0,
            t1,
            tolerances: Tolerances::default(),
            max_step: None,
            method: Method::Auto,
        }
    }

    pub fn with_drives(mut self, drives: Vec<DriveTerm>) -> Self {
        self.drives = drives;
        self
    }

    pub fn with_collapse(mut self, collapse: Vec<CollapseChannel>) -> Self {
        self.collapse = collapse;
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tolerances = tol;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time span [{}, {}] is empty or not finite",
                self.t0, self.t1
            )));
        }
        if !self.hamiltonian.is_hermitian() {
            return Err(Error::InvalidParameter("Hamiltonian is not flagged Hermitian".into()));
        }
        let tol = self.tolerances;
        if !(tol.rel > 0.0 && tol.abs > 0.0) {
            return Err(Error::InvalidParameter("integrator tolerances must be > 0".into()));
        }
        for c in &self.collapse {
            if !(c.rate >= 0.0) {
                return Err(Error::InvalidParameter(format!("negative rate on `{}`", c.name)));
            }
            check_space(&self.hamiltonian, &c.operator)?;
        }
        for d in &self.drives {
            check_space(&self.hamiltonian, &d.operator)?;
        }
        Ok(())
    }

    fn active_drives(&self) -> Vec<&DriveTerm> {
        self.drives
            .iter()
            .filter(|d| match d.envelope.support() {
                Some((a, b)) => b > self.t0 && a < self.t1,
                None => false,
            })
            .collect()
    }

    /// `min(1/(10·max drive rate), span/100)` unless set explicitly.
    pub fn effective_max_step(&self) -> f64 {
        if let Some(h) = self.max_step {
            return h;
        }
        let span = self.t1 - self.t0;
        let peak = self.active_drives().iter().map(|d| d.envelope.peak()).fold(0.0, f64::max);
        let by_drive = if peak > 0.0 { 1.0 / (10.0 * peak) } else { f64::INFINITY };
        by_drive.min(span / 100.0)
    }
}

fn check_space(a: &Operator, b: &Operator) -> Result<()> {
    if same_space(a.space(), b.space()) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("spec operators live on different spaces".into()))
    }
}

/// Expectation values recorded at sample times, plus the final state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `expectations[k][j]` is observable `j` at `times[k]`.
    pub expectations: Vec<Vec<C64>>,
    pub final_state: QuantumState,
}

/// Integrates the Lindblad equation
/// `dρ/dt = −i[H(t), ρ] + Σ γₖ (LₖρLₖ† − ½{Lₖ†Lₖ, ρ})` over the spec's span.
pub fn evolve(state: &QuantumState, spec: &EvolutionSpec) -> Result<QuantumState> {
    Ok(evolve_sampled(state, spec, &[], &[])?.final_state)
}

/// Like [`evolve`], recording `observables` at each time in `times`
/// (ascending, inside the span).
pub fn evolve_sampled(
    state: &QuantumState,
    spec: &EvolutionSpec,
    times: &[f64],
    observables: &[Operator],
) -> Result<Trajectory> {
    spec.validate()?;
    if !same_space(state.space(), spec.hamiltonian.space()) {
        return Err(Error::DimensionMismatch("state and Hamiltonian spaces differ".into()));
    }
    for o in observables {
        check_space(&spec.hamiltonian, o)?;
    }
    for w in times.windows(2) {
        if w[1] < w[0] {
            return Err(Error::InvalidParameter("sample times must be ascending".into()));
        }
    }
    if let (Some(&a), Some(&b)) = (times.first(), times.last()) {
        if a < spec.t0 || b > spec.t1 {
            return Err(Error::InvalidParameter("sample times outside the span".into()));
        }
    }

    let mut engine = Engine::new(state, spec)?;
    let mut data = match (&engine, state.data()) {
        (Engine::Phases { .. } | Engine::Ket { .. }, StateData::Pure(v)) => {
            DMatrix::from_column_slice(v.len(), 1, v.as_slice())
        }
        _ => state.to_density(),
    };
    let trace0 = trace_of(&data);

    let mut stops: Vec<f64> = spec
        .active_drives()
        .iter()
        .flat_map(|d| d.envelope.breakpoints())
        .filter(|t| *t > spec.t0 && *t < spec.t1)
        .collect();
    stops.extend_from_slice(times);
    stops.push(spec.t1);
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();

    let mut expectations = Vec::with_capacity(times.len());
    let mut next_sample = 0;
    let mut t = spec.t0;
    let record = |data: &DMatrix<C64>, out: &mut Vec<Vec<C64>>| -> Result<()> {
        let s = wrap(state, data)?;
        out.push(observables.iter().map(|o| s.expectation(o)).collect::<Result<_>>()?);
        Ok(())
    };
    while next_sample < times.len() && times[next_sample] <= t {
        record(&data, &mut expectations)?;
        next_sample += 1;
    }
    for &stop in &stops {
        if stop > t {
            engine.advance(&mut data, t, stop)?;
            t = stop;
        }
        while next_sample < times.len() && times[next_sample] <= t {
            record(&data, &mut expectations)?;
            next_sample += 1;
        }
    }

    let drift = (trace_of(&data) - trace0).abs();
    if drift > TRACE_DRIFT_TOL {
        return Err(Error::TraceDrift { drift, tolerance: TRACE_DRIFT_TOL });
    }
    Ok(Trajectory { times: times.to_vec(), expectations, final_state: wrap(state, &data)? })
}

fn trace_of(data: &DMatrix<C64>) -> f64 {
    if data.ncols() == 1 {
        data.norm_squared()
    } else {
        linalg::trace(data).re
    }
}

fn wrap(like: &QuantumState, data: &DMatrix<C64>) -> Result<QuantumState> {
    if data.ncols() == 1 {
        Ok(QuantumState::from_ket_unchecked(like.space(), DVector::from_column_slice(data.as_slice())))
    } else {
        QuantumState::from_density_unchecked(like.space(), data.clone())
    }
}

/// `H − (i/2) Σ γ L†L`.
fn effective_hamiltonian(h: &Operator, collapse: &[CollapseChannel]) -> Csr {
    let mut m = h.matrix().clone();
    for c in collapse {
        let l = c.operator.matrix();
        let ldl = &linalg::csr_adjoint(l) * l;
        m = &m + &linalg::csr_scale(&ldl, C64::new(0.0, -0.5 * c.rate));
    }
    m
}

fn jump_matrices(collapse: &[CollapseChannel]) -> Vec<Csr> {
    collapse.iter().map(|c| linalg::csr_scale(c.operator.matrix(), linalg::c(c.rate.sqrt()))).collect()
}

/// Dense Liouvillian acting on column-major `vec(ρ)`.
pub fn liouvillian(hamiltonian: &Operator, collapse: &[CollapseChannel]) -> DMatrix<C64> {
    let n = hamiltonian.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let heff = linalg::csr_to_dense(&effective_hamiltonian(hamiltonian, collapse));
    let mut l = id.kronecker(&heff) * (-I) + heff.map(|z| z.conj()).kronecker(&id) * I;
    for j in jump_matrices(collapse) {
        let jd = linalg::csr_to_dense(&j);
        l += jd.map(|z| z.conj()).kronecker(&jd);
    }
    l
}

/// Closed-form propagation of a time-independent Lindbladian.
#[derive(Debug, Clone)]
pub struct StaticPropagator {
    generator: DMatrix<C64>,
    dim: usize,
}

impl StaticPropagator {
    pub fn new(hamiltonian: &Operator, collapse: &[CollapseChannel]) -> Result<Self> {
        let dim = hamiltonian.dim();
        if dim * dim > PROPAGATOR_MAX {
            return Err(Error::InvalidParameter(format!(
                "closed-form propagation limited to dim² ≤ {PROPAGATOR_MAX}, got {}",
                dim * dim
            )));
        }
        Ok(Self { generator: liouvillian(hamiltonian, collapse), dim })
    }

    /// `exp(𝓛·dt)`.
    pub fn superoperator(&self, dt: f64) -> DMatrix<C64> {
        linalg::expm(&(&self.generator * C64::new(dt, 0.0)))
    }

    pub fn apply_matrix(&self, rho: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
        apply_superop(&self.superoperator(dt), rho, self.dim)
    }

    pub fn apply(&self, state: &QuantumState, dt: f64) -> Result<QuantumState> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch("state does not match propagator".into()));
        }
        QuantumState::from_density_unchecked(state.space(), self.apply_matrix(&state.to_density(), dt))
    }
}

pub(crate) fn apply_superop(s: &DMatrix<C64>, rho: &DMatrix<C64>, n: usize) -> DMatrix<C64> {
    let v = DVector::from_column_slice(rho.as_slice());
    let out = s * v;
    let mut m = DMatrix::from_column_slice(n, n, out.as_slice());
    linalg::hermitize(&mut m);
    m
}

struct DriveMats<'a> {
    term: &'a DriveTerm,
    a: Csr,
    a_dag: Csr,
}

/// Diagonal part of the static Hamiltonian that the integrator removes by
/// working in its interaction picture.
struct Frame {
    energies: Vec<f64>,
    phases: Vec<C64>,
}

impl Frame {
    fn new(energies: Vec<f64>) -> Self {
        let phases = vec![ONE; energies.len()];
        Self { energies, phases }
    }

    /// `pₖ = e^{−iEₖτ}`.
    fn set(&mut self, tau: f64) {
        for (p, e) in self.phases.iter_mut().zip(&self.energies) {
            *p = C64::from_polar(1.0, -e * tau);
        }
    }

    /// Interaction picture → Schrödinger picture at the current phases.
    fn to_lab(&self, y: &mut DMatrix<C64>) {
        scale_by_phases(y, &self.phases, false);
    }

    fn to_interaction(&self, y: &mut DMatrix<C64>) {
        scale_by_phases(y, &self.phases, true);
    }
}

fn scale_by_phases(y: &mut DMatrix<C64>, p: &[C64], inverse: bool) {
    let n = y.nrows();
    if y.ncols() == 1 {
        for (v, ph) in y.iter_mut().zip(p) {
            *v *= if inverse { ph.conj() } else { *ph };
        }
        return;
    }
    for j in 0..n {
        let pj = if inverse { p[j] } else { p[j].conj() };
        for i in 0..n {
            let pi = if inverse { p[i].conj() } else { p[i] };
            y[(i, j)] *= pi * pj;
        }
    }
}

enum Engine<'a> {
    Phases { energies: Vec<f64> },
    /// `cache` keeps the last propagator; uniform sample grids reuse it.
    Superop { generator: DMatrix<C64>, n: usize, cache: Option<(f64, DMatrix<C64>)> },
    Ket { frame: Option<Frame>, h: Csr, drives: Vec<DriveMats<'a>>, ig: Dopri5, sigma: DMatrix<C64> },
    Rho {
        frame: Option<Frame>,
        heff: Csr,
        drives: Vec<DriveMats<'a>>,
        jumps: Vec<Csr>,
        ig: Dopri5,
        bufs: Bufs,
    },
}

struct Bufs {
    sigma: DMatrix<C64>,
    x: DMatrix<C64>,
    tmp: DMatrix<C64>,
}

impl<'a> Engine<'a> {
    fn new(state: &QuantumState, spec: &'a EvolutionSpec) -> Result<Self> {
        let drives: Vec<DriveMats> = spec
            .active_drives()
            .into_iter()
            .map(|term| DriveMats {
                term,
                a: term.operator.matrix().clone(),
                a_dag: linalg::csr_adjoint(term.operator.matrix()),
            })
            .collect();
        let collapse: Vec<CollapseChannel> =
            spec.collapse.iter().filter(|c| c.rate > 0.0).cloned().collect();
        let n = state.dim();
        let auto = spec.method == Method::Auto;
        let static_problem = drives.is_empty();
        let diagonal = spec.hamiltonian.is_diagonal();
        let max_step = spec.effective_max_step();
        // A diagonal static part is handled exactly; only the remainder is integrated.
        let (frame, h_rest) = if diagonal {
            (Some(Frame::new(diag_re(&spec.hamiltonian))), Operator::zero(spec.hamiltonian.space()))
        } else {
            (None, spec.hamiltonian.clone())
        };

        if collapse.is_empty() && state.is_pure() {
            if auto && static_problem && diagonal {
                return Ok(Self::Phases { energies: diag_re(&spec.hamiltonian) });
            }
            let ig = Dopri5::new(spec.tolerances, max_step);
            let sigma = DMatrix::zeros(n, 1);
            return Ok(Self::Ket { frame, h: h_rest.matrix().clone(), drives, ig, sigma });
        }
        if auto && static_problem {
            if collapse.is_empty() && diagonal {
                return Ok(Self::Phases { energies: diag_re(&spec.hamiltonian) });
            }
            if n * n <= CLOSED_FORM_MAX {
                return Ok(Self::Superop { generator: liouvillian(&spec.hamiltonian, &collapse), n, cache: None });
            }
        }
        let ig = Dopri5::new(spec.tolerances, max_step).with_after_step(linalg::hermitize);
        Ok(Self::Rho {
            frame,
            heff: effective_hamiltonian(&h_rest, &collapse),
            drives,
            jumps: jump_matrices(&collapse),
            ig,
            bufs: Bufs { sigma: DMatrix::zeros(n, n), x: DMatrix::zeros(n, n), tmp: DMatrix::zeros(n, n) },
        })
    }

    /// Advances the Schrödinger-picture `y` from `ta` to `tb`.
    fn advance(&mut self, y: &mut DMatrix<C64>, ta: f64, tb: f64) -> Result<()> {
        let dt = tb - ta;
        match self {
            Self::Phases { energies } => {
                let ph: Vec<C64> = energies.iter().map(|e| C64::from_polar(1.0, -e * dt)).collect();
                scale_by_phases(y, &ph, false);
                Ok(())
            }
            Self::Superop { generator, n, cache } => {
                let hit = matches!(cache, Some((h, _)) if (*h - dt).abs() <= 1e-12 * dt.abs());
                if !hit {
                    *cache = Some((dt, linalg::expm(&(&*generator * C64::new(dt, 0.0)))));
                }
                let s = &cache.as_ref().expect("propagator cached").1;
                *y = apply_superop(s, y, *n);
                Ok(())
            }
            Self::Ket { frame, h, drives, ig, sigma } => {
                // the interaction picture is anchored at ta, where it equals the lab frame
                let mut rhs = |t: f64, psi: &DMatrix<C64>, dpsi: &mut DMatrix<C64>| {
                    let src: &DMatrix<C64> = match frame.as_mut() {
                        Some(fr) => {
                            fr.set(t - ta);
                            sigma.copy_from(psi);
                            fr.to_lab(sigma);
                            sigma
                        }
                        None => psi,
                    };
                    linalg::spmm(dpsi, ZERO, -I, h, src);
                    for d in drives.iter() {
                        let f = d.term.coefficient(t);
                        if f != ZERO {
                            linalg::spmm(dpsi, ONE, -I * f, &d.a, src);
                            linalg::spmm(dpsi, ONE, -I * f.conj(), &d.a_dag, src);
                        }
                    }
                    if let Some(fr) = frame.as_ref() {
                        fr.to_interaction(dpsi);
                    }
                };
                ig.integrate(&mut rhs, y, ta, tb)?;
                if let Some(fr) = frame.as_mut() {
                    fr.set(dt);
                    fr.to_lab(y);
                }
                Ok(())
            }
            Self::Rho { frame, heff, drives, jumps, ig, bufs } => {
                let mut rhs = |t: f64, rho: &DMatrix<C64>, drho: &mut DMatrix<C64>| match frame.as_mut() {
                    Some(fr) => {
                        fr.set(t - ta);
                        let mut sigma = std::mem::replace(&mut bufs.sigma, DMatrix::zeros(0, 0));
                        sigma.copy_from(rho);
                        fr.to_lab(&mut sigma);
                        lindblad_rhs(t, &sigma, drho, heff, drives, jumps, bufs);
                        fr.to_interaction(drho);
                        bufs.sigma = sigma;
                    }
                    None => lindblad_rhs(t, rho, drho, heff, drives, jumps, bufs),
                };
                ig.integrate(&mut rhs, y, ta, tb)?;
                if let Some(fr) = frame.as_mut() {
                    fr.set(dt);
                    fr.to_lab(y);
                }
                Ok(())
            }
        }
    }
}

fn diag_re(h: &Operator) -> Vec<f64> {
    h.diagonal().iter().map(|z| z.re).collect()
}

/// Lindblad right-hand side with `heff` the non-Hermitian Hamiltonian:
/// `dρ = −i(X − X†) + Σ J ρ J†` where `X = H_eff ρ + drives·ρ`.
fn lindblad_rhs(
    t: f64,
    rho: &DMatrix<C64>,
    drho: &mut DMatrix<C64>,
    heff: &Csr,
    drives: &[DriveMats],
    jumps: &[Csr],
    bufs: &mut Bufs,
) {
    let x = &mut bufs.x;
    linalg::spmm(x, ZERO, ONE, heff, rho);
    for d in drives {
        let f = d.term.coefficient(t);
        if f != ZERO {
            linalg::spmm(x, ONE, f, &d.a, rho);
            linalg::spmm(x, ONE, f.conj(), &d.a_dag, rho);
        }
    }
    let n = rho.nrows();
    for j in 0..n {
        for i in 0..n {
            drho[(i, j)] = -I * x[(i, j)] + I * x[(j, i)].conj();
        }
    }
    for jm in jumps {
        linalg::spmm(&mut bufs.tmp, ZERO, ONE, jm, rho);
        let tmp_adj = bufs.tmp.adjoint();
        linalg::spmm(drho, ONE, ONE, jm, &tmp_adj);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        build_drive, build_static_hamiltonian, collapse_channels, collapse_channels_with,
        ChannelToggles, DriveKind, Envelope, SystemParams,
    };
    use crate::hilbert::{coherent_state, number, FockSpace, CAVITY, TRANSMON};

    #[test]
    fn no_dynamics_leaves_state() {
        let s = FockSpace::cavity(20).unwrap();
        let st = coherent_state(&s, CAVITY, C64::new(1.0, 0.3)).unwrap().into_mixed();
        let h = Operator::zero(&s);
        for method in [Method::Auto, Method::Integrator] {
            let spec = EvolutionSpec::new(h.clone(), 0.0, 1.0).with_method(method);
            let out = evolve(&st, &spec).unwrap();
            assert!(linalg::max_abs(&(out.to_density() - st.to_density())) < 1e-10);
        }
    }

    #[test]
    fn damped_coherent_state_number() {
        let p = SystemParams::table_i();
        let s = FockSpace::cavity(24).unwrap();
        let st = coherent_state(&s, CAVITY, C64::new(2.0, 0.0)).unwrap();
        let h = build_static_hamiltonian(&p, &s).unwrap();
        let ch = collapse_channels(&p, &s).unwrap();
        let times: Vec<f64> = (0..=6).map(|k| k as f64 * 0.5 * p.t1_c).collect();
        let spec = EvolutionSpec::new(h, 0.0, 3.0 * p.t1_c)
            .with_collapse(ch)
            .with_method(Method::Integrator);
        let n = number(&s, CAVITY).unwrap();
        let tr = evolve_sampled(&st, &spec, &times, &[n]).unwrap();
        for (t, e) in tr.times.iter().zip(&tr.expectations) {
            let expect = 4.0 * (-t / p.t1_c).exp();
            assert!((e[0].re - expect).abs() < 1e-3 * expect, "t={t}");
        }
        assert!(tr.final_state.min_eigenvalue() > -1e-7);
    }

    #[test]
    fn closed_form_matches_integrator() {
        let mut p = SystemParams::table_i();
        p.k_q = 2.0 * std::f64::consts::PI * 5e6;
        p.nth_q = 0.05;
        let s = FockSpace::cavity_transmon(4, 3).unwrap();
        let h = build_static_hamiltonian(&p, &s).unwrap();
        let ch = collapse_channels(&p, &s).unwrap();
        let mut psi = DVector::zeros(12);
        psi[s.basis_index(&[0, 0]).unwrap()] = linalg::c(0.6);
        psi[s.basis_index(&[1, 2]).unwrap()] = C64::new(0.0, 0.8);
        let st = QuantumState::from_ket(&s, psi).unwrap();
        let base = EvolutionSpec::new(h, 0.0, 20e-6).with_collapse(ch);
        let a = evolve(&st, &base).unwrap();
        let b = evolve(&st, &base.clone().with_method(Method::Integrator)).unwrap();
        assert!(linalg::max_abs(&(a.to_density() - b.to_density())) < 1e-7);
        let prop = StaticPropagator::new(&base.hamiltonian, &base.collapse).unwrap();
        let c = prop.apply(&st, 20e-6).unwrap();
        assert!(linalg::max_abs(&(a.to_density() - c.to_density())) < 1e-12);
    }

    #[test]
    fn fast_kerr_phases_handled_exactly() {
        let p = SystemParams::table_i();
        let s = FockSpace::cavity_transmon(4, 3).unwrap();
        let h = build_static_hamiltonian(&p, &s).unwrap();
        let ch = collapse_channels(&p, &s).unwrap();
        let mut psi = DVector::zeros(12);
        psi[s.basis_index(&[0, 0]).unwrap()] = linalg::c(0.6);
        psi[s.basis_index(&[1, 2]).unwrap()] = C64::new(0.0, 0.8);
        let st = QuantumState::from_ket(&s, psi).unwrap();
        let base = EvolutionSpec::new(h, 0.0, 20e-6).with_collapse(ch);
        let a = evolve(&st, &base).unwrap();
        let b = evolve(&st, &base.clone().with_method(Method::Integrator)).unwrap();
        let d = linalg::max_abs(&(a.to_density() - b.to_density()));
        assert!(d < 1e-7);
    }

    #[test]
    fn transmon_coherence_decays_at_t2() {
        let mut p = SystemParams::table_i();
        p.nth_q = 0.0;
        let s = FockSpace::new(&[(TRANSMON, 2)]).unwrap();
        let h = build_static_hamiltonian(&p, &s).unwrap();
        let ch = collapse_channels(&p, &s).unwrap();
        let plus = DVector::from_vec(vec![linalg::c(0.5f64.sqrt()), linalg::c(0.5f64.sqrt())]);
        let st = QuantumState::from_ket(&s, plus).unwrap();
        for t in [5e-6, 16e-6, 40e-6] {
            let spec = EvolutionSpec::new(h.clone(), 0.0, t)
                .with_collapse(ch.clone())
                .with_method(Method::Integrator);
            let out = evolve(&st, &spec).unwrap().to_density();
            let expect = 0.5 * (-t / p.t2_q).exp();
            assert!((out[(0, 1)].norm() - expect).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_cavity_drive_displaces_vacuum() {
        let p = SystemParams::table_i().noiseless();
        let s = FockSpace::cavity(30).unwrap();
        let vac = QuantumState::basis(&s, &[0]).unwrap();
        let eps = 2.0e6;
        let t = 1.5e-6;
        let mut q = p.clone();
        q.k_c = 0.0;
        let h = build_static_hamiltonian(&q, &s).unwrap();
        let d = build_drive(DriveKind::CavityDisplacement, &q, &s, Envelope::square(eps, 0.0, t, 0.0), 0.0)
            .unwrap();
        let spec = EvolutionSpec::new(h, 0.0, t).with_drives(vec![d]);
        let out = evolve(&vac, &spec).unwrap();
        let alpha = C64::new(0.0, -eps * t / 2.0);
        let target = coherent_state(&s, CAVITY, alpha).unwrap();
        assert!(out.fidelity(&target).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn thermal_cavity_relaxes_to_nth() {
        let mut p = SystemParams::table_i();
        p.nth_c = 0.02;
        p.t1_c = 1e-3;
        let s = FockSpace::cavity(6).unwrap();
        let h = Operator::zero(&s);
        let ch = collapse_channels_with(&p, &s, &ChannelToggles::only_cavity()).unwrap();
        let st = QuantumState::basis(&s, &[0]).unwrap();
        let spec = EvolutionSpec::new(h, 0.0, 20.0 * p.t1_c).with_collapse(ch);
        let out = evolve(&st, &spec).unwrap();
        let n = out.mean_number(CAVITY).unwrap();
        assert!((n - p.nth_c).abs() < 0.05 * p.nth_c);
    }

    #[test]
    fn trace_and_space_checks() {
        let s = FockSpace::cavity(4).unwrap();
        let other = FockSpace::cavity(5).unwrap();
        let st = QuantumState::basis(&other, &[0]).unwrap();
        let spec = EvolutionSpec::new(Operator::zero(&s), 0.0, 1.0);
        assert!(evolve(&st, &spec).is_err());
        let bad = EvolutionSpec::new(Operator::zero(&s), 1.0, 1.0);
        assert!(bad.validate().is_err());
    }
}
