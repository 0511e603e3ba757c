use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{same_space, truncation_guard, FockSpace, Operator};
use crate::linalg::{self, ONE, ZERO};
use crate::{Error, Result, C64};

const TRACE_TOL: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = -1e-8;

/// Pure states keep their amplitude vector; everything else is a density
/// matrix.
#[derive(Debug, Clone)]
pub enum StateData {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

#[derive(Debug, Clone)]
pub struct QuantumState {
    space: Arc<FockSpace>,
    data: StateData,
}

impl QuantumState {
    /// Pure state; the vector must be normalised to within 1e-6.
    pub fn from_ket(space: &Arc<FockSpace>, ket: DVector<C64>) -> Result<Self> {
        check_len(space, ket.len())?;
        let norm = ket.norm_squared();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("ket norm² is {norm}")));
        }
        Ok(Self { space: space.clone(), data: StateData::Pure(ket) })
    }

    pub(crate) fn from_ket_unchecked(space: &Arc<FockSpace>, ket: DVector<C64>) -> Self {
        Self { space: space.clone(), data: StateData::Pure(ket) }
    }

    /// Pure state from an unnormalised vector.
    pub fn normalized_ket(space: &Arc<FockSpace>, mut ket: DVector<C64>) -> Result<Self> {
        check_len(space, ket.len())?;
        let norm = ket.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        ket.unscale_mut(norm);
        Ok(Self { space: space.clone(), data: StateData::Pure(ket) })
    }

    /// Density matrix, checked for unit trace, Hermiticity and positivity.
    pub fn from_density(space: &Arc<FockSpace>, rho: DMatrix<C64>) -> Result<Self> {
        let state = Self::from_density_unchecked(space, rho)?;
        state.validate()?;
        Ok(state)
    }

    pub(crate) fn from_density_unchecked(space: &Arc<FockSpace>, rho: DMatrix<C64>) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch("density matrix is not square".into()));
        }
        check_len(space, rho.nrows())?;
        Ok(Self { space: space.clone(), data: StateData::Mixed(rho) })
    }

    /// Product basis state, one occupation per subsystem.
    pub fn basis(space: &Arc<FockSpace>, occupations: &[usize]) -> Result<Self> {
        let idx = space.basis_index(occupations)?;
        let mut v = DVector::zeros(space.total_dim());
        v[idx] = ONE;
        Ok(Self { space: space.clone(), data: StateData::Pure(v) })
    }

    /// Product of local kets in subsystem order.
    pub fn product(space: &Arc<FockSpace>, locals: &[DVector<C64>]) -> Result<Self> {
        if locals.len() != space.n_subsystems() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for {} subsystems",
                locals.len(),
                space.n_subsystems()
            )));
        }
        let mut v = DVector::from_element(1, ONE);
        for (k, local) in locals.iter().enumerate() {
            if local.len() != space.dims()[k] {
                return Err(Error::DimensionMismatch(format!(
                    "factor for `{}` has length {}, dim is {}",
                    space.labels()[k],
                    local.len(),
                    space.dims()[k]
                )));
            }
            v = v.kronecker(local);
        }
        Self::from_ket(space, v)
    }

    /// `local` on `subsystem`, every other subsystem in its ground level.
    pub fn with_local(space: &Arc<FockSpace>, subsystem: &str, local: DVector<C64>) -> Result<Self> {
        let k = space.index_of(subsystem)?;
        let locals: Vec<DVector<C64>> = space
            .dims()
            .iter()
            .enumerate()
            .map(|(j, &d)| if j == k { local.clone() } else { unit(d, 0) })
            .collect();
        Self::product(space, &locals)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn into_data(self) -> StateData {
        self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn ket(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Mixed(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn to_density(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Mixed(m) => m.clone(),
        }
    }

    /// Same state held as a density matrix.
    pub fn into_mixed(self) -> Self {
        match self.data {
            StateData::Pure(ref v) => {
                Self { space: self.space.clone(), data: StateData::Mixed(v * v.adjoint()) }
            }
            StateData::Mixed(_) => self,
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Mixed(m) => linalg::trace(m).re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Mixed(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match &self.data {
            StateData::Pure(_) => 0.0,
            StateData::Mixed(m) => linalg::hermitian_eigenvalues(m)[0],
        }
    }

    /// Checks the density-matrix invariants.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        if let StateData::Mixed(m) = &self.data {
            let defect = linalg::dense_hermiticity_defect(m);
            if defect > HERMITIAN_TOL {
                return Err(Error::InvalidState(format!("Hermiticity defect {defect:e}")));
            }
            let lo = self.min_eigenvalue();
            if lo < EIGEN_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
            }
        }
        Ok(())
    }

    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        self.check_space(op.space())?;
        Ok(match &self.data {
            StateData::Pure(v) => v.dotc(&op.apply(v)),
            StateData::Mixed(m) => {
                let mut out = DMatrix::zeros(m.nrows(), m.ncols());
                linalg::spmm(&mut out, ZERO, ONE, op.matrix(), m);
                linalg::trace(&out)
            }
        })
    }

    /// `U ψ` or `U ρ U†` for any (not necessarily unitary) dense matrix.
    pub fn transform(&self, u: &DMatrix<C64>) -> Result<Self> {
        check_len(&self.space, u.nrows())?;
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(u * v),
            StateData::Mixed(m) => {
                let mut r = u * m * u.adjoint();
                linalg::hermitize(&mut r);
                StateData::Mixed(r)
            }
        };
        Ok(Self { space: self.space.clone(), data })
    }

    pub fn apply_operator(&self, op: &Operator) -> Result<Self> {
        self.check_space(op.space())?;
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(op.apply(v)),
            StateData::Mixed(m) => {
                let mut left = DMatrix::zeros(m.nrows(), m.ncols());
                linalg::spmm(&mut left, ZERO, ONE, op.matrix(), m);
                let mut both = DMatrix::zeros(m.nrows(), m.ncols());
                linalg::spmm(&mut both, ZERO, ONE, op.matrix(), &left.adjoint());
                linalg::hermitize(&mut both);
                StateData::Mixed(both)
            }
        };
        Ok(Self { space: self.space.clone(), data })
    }

    /// Applies Kraus operator `k` and renormalises. Returns the Born
    /// probability and the post-measurement state (`None` if it vanishes).
    pub fn measure_with(&self, k: &Operator) -> Result<(f64, Option<Self>)> {
        let unnorm = self.apply_operator(k)?;
        let p = unnorm.trace();
        if p <= 1e-15 {
            return Ok((p.max(0.0), None));
        }
        let data = match unnorm.data {
            StateData::Pure(v) => StateData::Pure(v.unscale(p.sqrt())),
            StateData::Mixed(m) => StateData::Mixed(m.unscale(p)),
        };
        Ok((p, Some(Self { space: self.space.clone(), data })))
    }

    /// `w·self + (1−w)·other`.
    pub fn mix(&self, w: f64, other: &QuantumState) -> Result<Self> {
        self.check_space(&other.space)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("mixing weight {w}")));
        }
        let rho = self.to_density() * linalg::c(w) + other.to_density() * linalg::c(1.0 - w);
        Self::from_density_unchecked(&self.space, rho)
    }

    /// Fidelity `(Tr√(√ρ σ √ρ))²`; reduces to overlaps when either side is pure.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        self.check_space(&other.space)?;
        let f = match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => a.dotc(b).norm_sqr(),
            (StateData::Pure(a), StateData::Mixed(m)) | (StateData::Mixed(m), StateData::Pure(a)) => {
                a.dotc(&(m * a)).re
            }
            (StateData::Mixed(r), StateData::Mixed(s)) => {
                let sr = linalg::psd_sqrt(r);
                let inner = &sr * s * &sr;
                let ev = linalg::hermitian_eigenvalues(&inner);
                ev.iter().map(|l| l.max(0.0).sqrt()).sum::<f64>().powi(2)
            }
        };
        Ok(f.clamp(0.0, 1.0 + 1e-9))
    }

    /// Reduced density matrix of the listed subsystems (kept in space order).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<QuantumState> {
        let mut kept: Vec<usize> =
            keep.iter().map(|l| self.space.index_of(l)).collect::<Result<_>>()?;
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() {
            return Err(Error::InvalidParameter("partial trace keeps nothing".into()));
        }
        let pairs: Vec<(&str, usize)> = kept
            .iter()
            .map(|&k| (self.space.labels()[k].as_str(), self.space.dims()[k]))
            .collect();
        let reduced = FockSpace::new(&pairs)?;
        let rho = reduce(&self.space, &kept, &self.data);
        Self::from_density_unchecked(&reduced, rho)
    }

    /// Single-subsystem reduced density matrix.
    pub fn reduced_density(&self, subsystem: &str) -> Result<DMatrix<C64>> {
        let k = self.space.index_of(subsystem)?;
        Ok(reduce(&self.space, &[k], &self.data))
    }

    /// `⟨a†a⟩` of `subsystem`.
    pub fn mean_number(&self, subsystem: &str) -> Result<f64> {
        let r = self.reduced_density(subsystem)?;
        Ok((0..r.nrows()).map(|n| n as f64 * r[(n, n)].re).sum())
    }

    /// Population of each level of `subsystem`.
    pub fn populations(&self, subsystem: &str) -> Result<Vec<f64>> {
        let r = self.reduced_density(subsystem)?;
        Ok((0..r.nrows()).map(|n| r[(n, n)].re).collect())
    }

    fn check_space(&self, other: &Arc<FockSpace>) -> Result<()> {
        if same_space(&self.space, other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("state and operator live on different spaces".into()))
        }
    }
}

fn check_len(space: &FockSpace, n: usize) -> Result<()> {
    if n == space.total_dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "length {n} on a space of dimension {}",
            space.total_dim()
        )))
    }
}

fn unit(d: usize, k: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d);
    v[k] = ONE;
    v
}

fn reduce(space: &FockSpace, kept: &[usize], data: &StateData) -> DMatrix<C64> {
    let n = space.total_dim();
    let kept_dims: Vec<usize> = kept.iter().map(|&k| space.dims()[k]).collect();
    let m: usize = kept_dims.iter().product();
    let traced: Vec<usize> = (0..space.n_subsystems()).filter(|k| !kept.contains(k)).collect();
    let kept_index = |i: usize| kept.iter().fold(0, |acc, &k| acc * space.dims()[k] + space.occupation(i, k));
    let traced_key = |i: usize| traced.iter().fold(0, |acc, &k| acc * space.dims()[k] + space.occupation(i, k));
    let ki: Vec<usize> = (0..n).map(kept_index).collect();
    let ti: Vec<usize> = (0..n).map(traced_key).collect();
    let mut out = DMatrix::zeros(m, m);
    match data {
        StateData::Pure(v) => {
            for j in 0..n {
                let vj = v[j].conj();
                if vj == ZERO {
                    continue;
                }
                for i in 0..n {
                    if ti[i] == ti[j] {
                        out[(ki[i], ki[j])] += v[i] * vj;
                    }
                }
            }
        }
        StateData::Mixed(r) => {
            for j in 0..n {
                for i in 0..n {
                    if ti[i] == ti[j] {
                        out[(ki[i], ki[j])] += r[(i, j)];
                    }
                }
            }
        }
    }
    out
}

/// Fock amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n < dim` (unguarded, unnormalised
/// beyond the Poisson tail).
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..dim {
        v[n] = amp;
        amp *= alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// Coherent state `|α⟩` on `subsystem` (others in their ground level),
/// renormalised after truncation.
pub fn coherent_state(space: &Arc<FockSpace>, subsystem: &str, alpha: C64) -> Result<QuantumState> {
    let d = space.dim_of(subsystem)?;
    truncation_guard(subsystem, alpha.norm_sqr(), d)?;
    let mut v = coherent_amplitudes(alpha, d);
    let norm = v.norm();
    v.unscale_mut(norm);
    QuantumState::with_local(space, subsystem, v)
}

/// Normalised cat `N(|α⟩ ± |−α⟩)` on `subsystem`; `even` picks the sign.
pub fn cat_state(space: &Arc<FockSpace>, subsystem: &str, alpha: C64, even: bool) -> Result<QuantumState> {
    let d = space.dim_of(subsystem)?;
    truncation_guard(subsystem, alpha.norm_sqr(), d)?;
    if !even && alpha.norm() == 0.0 {
        return Err(Error::InvalidState("odd cat with α = 0 vanishes".into()));
    }
    let plus = coherent_amplitudes(alpha, d);
    let minus = coherent_amplitudes(-alpha, d);
    let v = if even { plus + minus } else { plus - minus };
    let norm = v.norm();
    QuantumState::with_local(space, subsystem, v.unscale(norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, displacement, number, parity_operator};

    fn poisson(mean: f64, n: u32) -> f64 {
        let mut p = (-mean).exp();
        for k in 1..=n {
            p *= mean / k as f64;
        }
        p
    }

    #[test]
    fn coherent_vacuum_and_mean() {
        let s = FockSpace::cavity(30).unwrap();
        let vac = coherent_state(&s, "cavity", ZERO).unwrap();
        assert!((vac.ket().unwrap()[0] - ONE).norm() < 1e-15);
        let two = coherent_state(&s, "cavity", C64::new(2.0, 0.0)).unwrap();
        assert!((two.trace() - 1.0).abs() < 1e-8);
        assert!((two.mean_number("cavity").unwrap() - 4.0).abs() < 1e-8);
        let p4 = two.populations("cavity").unwrap()[4];
        assert!((p4 - poisson(4.0, 4)).abs() < 1e-9);
        assert!((p4 - 0.1954).abs() < 1e-4);
    }

    #[test]
    fn displaced_vacuum_matches_poisson() {
        let s = FockSpace::cavity(30).unwrap();
        let vac = QuantumState::basis(&s, &[0]).unwrap();
        let d = displacement(&s, "cavity", C64::new(1.5, 0.0)).unwrap();
        let out = vac.apply_operator(&d).unwrap();
        let pops = out.populations("cavity").unwrap();
        let mean: f64 = (0..30).map(|n| n as f64 * poisson(2.25, n as u32)).sum();
        assert!((out.mean_number("cavity").unwrap() - mean).abs() < 1e-8);
        assert!((mean - 2.25).abs() < 1e-8);
        for n in 0..12 {
            assert!((pops[n] - poisson(2.25, n as u32)).abs() < 1e-9);
        }
    }

    #[test]
    fn parity_expectations() {
        let s = FockSpace::cavity(30).unwrap();
        let p = parity_operator(&s, "cavity").unwrap();
        let zero = QuantumState::basis(&s, &[0]).unwrap();
        let one = QuantumState::basis(&s, &[1]).unwrap();
        assert!((zero.expectation(&p).unwrap().re - 1.0).abs() < 1e-15);
        assert!((one.expectation(&p).unwrap().re + 1.0).abs() < 1e-15);
        let coh = coherent_state(&s, "cavity", C64::new(2.0, 0.0)).unwrap();
        assert!((coh.expectation(&p).unwrap().re - (-8f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_of_product() {
        let s = FockSpace::cavity_transmon(4, 3).unwrap();
        let c = coherent_amplitudes(C64::new(0.3, 0.1), 4);
        let c = c.unscale(c.norm());
        let q = DVector::from_vec(vec![linalg::c(0.6), linalg::c(0.0), C64::new(0.0, 0.8)]);
        let st = QuantumState::product(&s, &[c.clone(), q.clone()]).unwrap();
        let rc = st.reduced_density("cavity").unwrap();
        assert!(linalg::max_abs(&(rc - &c * c.adjoint())) < 1e-14);
        let rq = st.clone().into_mixed().partial_trace(&["transmon"]).unwrap();
        assert!(linalg::max_abs(&(rq.to_density() - &q * q.adjoint())) < 1e-14);
        assert_eq!(rq.space().labels(), &["transmon".to_string()]);
    }

    #[test]
    fn fidelity_cases_agree() {
        let s = FockSpace::cavity(20).unwrap();
        let a = coherent_state(&s, "cavity", C64::new(1.0, 0.0)).unwrap();
        let b = coherent_state(&s, "cavity", C64::new(0.0, 1.0)).unwrap();
        let pure = a.fidelity(&b).unwrap();
        let mixed = a.clone().into_mixed().fidelity(&b.clone().into_mixed()).unwrap();
        let half = a.fidelity(&b.into_mixed()).unwrap();
        // |⟨α|β⟩|² = exp(−|α−β|²) = e^{−2}
        assert!((pure - (-2f64).exp()).abs() < 1e-9);
        assert!((mixed - pure).abs() < 1e-7);
        assert!((half - pure).abs() < 1e-12);
    }

    #[test]
    fn measurement_renormalises() {
        let s = FockSpace::cavity(30).unwrap();
        let p = parity_operator(&s, "cavity").unwrap();
        let id = crate::hilbert::identity(&s);
        let even = (id + p).unwrap().scale_re(0.5);
        let coh = coherent_state(&s, "cavity", C64::new(2.0, 0.0)).unwrap();
        let (prob, post) = coh.measure_with(&even).unwrap();
        assert!((prob - 0.5 * (1.0 + (-8f64).exp())).abs() < 1e-9);
        let cat = cat_state(&s, "cavity", C64::new(2.0, 0.0), true).unwrap();
        assert!((post.unwrap().fidelity(&cat).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn density_validation() {
        let s = FockSpace::cavity(3).unwrap();
        let mut bad = DMatrix::zeros(3, 3);
        bad[(0, 0)] = linalg::c(1.5);
        bad[(1, 1)] = linalg::c(-0.5);
        assert!(QuantumState::from_density(&s, bad).is_err());
        let mut good = DMatrix::zeros(3, 3);
        good[(0, 0)] = linalg::c(0.5);
        good[(2, 2)] = linalg::c(0.5);
        assert!(QuantumState::from_density(&s, good).is_ok());
        assert!(QuantumState::from_ket(&s, DVector::zeros(3)).is_err());
    }

    #[test]
    fn expectation_pure_and_mixed_agree() {
        let s = FockSpace::cavity_transmon(6, 3).unwrap();
        let st = QuantumState::with_local(&s, "cavity", {
            let v = coherent_amplitudes(C64::new(0.5, -0.4), 6);
            v.unscale(v.norm())
        })
        .unwrap();
        let a = annihilation(&s, "cavity").unwrap();
        let n = number(&s, "cavity").unwrap();
        let m = st.clone().into_mixed();
        for op in [&a, &n] {
            let x = st.expectation(op).unwrap();
            let y = m.expectation(op).unwrap();
            assert!((x - y).norm() < 1e-14);
        }
    }
}
