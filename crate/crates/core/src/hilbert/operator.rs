use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{same_space, truncation_guard, FockSpace};
use crate::linalg::{self, Csr, ONE};
use crate::{Error, Result, C64};

/// Sparse operator on a [`FockSpace`].
#[derive(Debug, Clone)]
pub struct Operator {
    space: Arc<FockSpace>,
    matrix: Csr,
    hermitian: bool,
}

impl Operator {
    pub fn from_csr(space: &Arc<FockSpace>, matrix: Csr, hermitian: bool) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on a space of dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if hermitian {
            let defect = linalg::csr_hermiticity_defect(&matrix);
            if defect >= 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "operator flagged Hermitian but |A - A†| reaches {defect:e}"
                )));
            }
        }
        Ok(Self { space: space.clone(), matrix, hermitian })
    }

    pub fn from_dense(space: &Arc<FockSpace>, m: &DMatrix<C64>, hermitian: bool) -> Result<Self> {
        Self::from_csr(space, linalg::csr_from_dense(m, 0.0), hermitian)
    }

    /// Embeds a single-subsystem matrix into the full space (identity on the
    /// other factors).
    pub fn embed(space: &Arc<FockSpace>, label: &str, local: &DMatrix<C64>) -> Result<Self> {
        let k = space.index_of(label)?;
        let d = space.dims()[k];
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "local {}x{} matrix for `{label}` of dimension {d}",
                local.nrows(),
                local.ncols()
            )));
        }
        let stride = space.stride(k);
        let n = space.total_dim();
        let mut nonzero = Vec::new();
        for col in 0..d {
            for row in 0..d {
                let v = local[(row, col)];
                if v.norm() > 0.0 {
                    nonzero.push((row, col, v));
                }
            }
        }
        let mut triplets = Vec::with_capacity(nonzero.len() * n / d);
        for idx in 0..n {
            let occ = space.occupation(idx, k);
            for &(row, col, v) in &nonzero {
                if col == occ {
                    let target = idx + row * stride - occ * stride;
                    triplets.push((target, idx, v));
                }
            }
        }
        let hermitian = linalg::dense_hermiticity_defect(local) < 1e-12;
        Ok(Self {
            space: space.clone(),
            matrix: linalg::csr_from_triplets(n, triplets),
            hermitian,
        })
    }

    pub fn zero(space: &Arc<FockSpace>) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: Csr::zeros(n, n), hermitian: true }
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn matrix(&self) -> &Csr {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        linalg::csr_to_dense(&self.matrix)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: linalg::csr_adjoint(&self.matrix),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: linalg::csr_scale(&self.matrix, s),
            hermitian: self.hermitian && s.im == 0.0,
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn is_diagonal(&self) -> bool {
        linalg::csr_is_diagonal(&self.matrix)
    }

    pub fn diagonal(&self) -> Vec<C64> {
        linalg::csr_diagonal(&self.matrix)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        Ok((self * other)? - (other * self)?)?
    }

    /// `self · ψ` on a flat amplitude vector.
    pub fn apply(&self, psi: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        &self.matrix * psi
    }

    fn check_space(&self, other: &Operator) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("operators live on different spaces".into()))
        }
    }

    fn with_matrix(&self, matrix: Csr, hermitian: bool) -> Self {
        Self { space: self.space.clone(), matrix, hermitian }
    }
}

impl Add for Operator {
    type Output = Result<Operator>;
    fn add(self, rhs: Operator) -> Result<Operator> {
        self.check_space(&rhs)?;
        let m = &self.matrix + &rhs.matrix;
        Ok(self.with_matrix(m, self.hermitian && rhs.hermitian))
    }
}

impl Sub for Operator {
    type Output = Result<Operator>;
    fn sub(self, rhs: Operator) -> Result<Operator> {
        self.check_space(&rhs)?;
        let m = &self.matrix - &rhs.matrix;
        Ok(self.with_matrix(m, self.hermitian && rhs.hermitian))
    }
}

impl Mul for &Operator {
    type Output = Result<Operator>;
    fn mul(self, rhs: &Operator) -> Result<Operator> {
        self.check_space(rhs)?;
        let m = &self.matrix * &rhs.matrix;
        Ok(self.with_matrix(m, false))
    }
}

fn local_lowering(d: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn local_number(d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(i as f64, 0.0) } else { linalg::ZERO })
}

/// Lowering operator `a` of `subsystem`, `a|n⟩ = √n |n−1⟩`.
pub fn annihilation(space: &Arc<FockSpace>, subsystem: &str) -> Result<Operator> {
    let d = space.dim_of(subsystem)?;
    Operator::embed(space, subsystem, &local_lowering(d))
}

pub fn creation(space: &Arc<FockSpace>, subsystem: &str) -> Result<Operator> {
    Ok(annihilation(space, subsystem)?.adjoint())
}

/// `a†a` of `subsystem`.
pub fn number(space: &Arc<FockSpace>, subsystem: &str) -> Result<Operator> {
    let d = space.dim_of(subsystem)?;
    Operator::embed(space, subsystem, &local_number(d))
}

pub fn identity(space: &Arc<FockSpace>) -> Operator {
    Operator {
        space: space.clone(),
        matrix: linalg::csr_identity(space.total_dim()),
        hermitian: true,
    }
}

/// Photon-number parity `(−1)^n` of `subsystem`.
pub fn parity_operator(space: &Arc<FockSpace>, subsystem: &str) -> Result<Operator> {
    let d = space.dim_of(subsystem)?;
    let local = DMatrix::from_fn(d, d, |i, j| {
        if i != j {
            linalg::ZERO
        } else if i % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    });
    Operator::embed(space, subsystem, &local)
}

/// Local (single-subsystem) displacement matrix `exp(α a† − α* a)` of size
/// `dim`, without the truncation guard.
pub(crate) fn local_displacement(dim: usize, alpha: C64) -> DMatrix<C64> {
    if alpha.norm() == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let a = local_lowering(dim);
    let generator = a.adjoint() * alpha - &a * alpha.conj();
    linalg::expm(&generator)
}

/// Displacement operator `D(α)` on `subsystem`.
pub fn displacement(space: &Arc<FockSpace>, subsystem: &str, alpha: C64) -> Result<Operator> {
    let d = space.dim_of(subsystem)?;
    truncation_guard(subsystem, alpha.norm_sqr(), d)?;
    let local = local_displacement(d, alpha);
    let mut op = Operator::embed(space, subsystem, &local)?;
    op.hermitian = false;
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, ZERO};
    use nalgebra::DVector;

    fn basis(n: usize, k: usize) -> DVector<C64> {
        let mut v = DVector::zeros(n);
        v[k] = ONE;
        v
    }

    #[test]
    fn lowering_on_single_photon() {
        let s = FockSpace::new(&[("cavity", 3)]).unwrap();
        let a = annihilation(&s, "cavity").unwrap();
        let out = a.apply(&basis(3, 1));
        assert!((out[0] - ONE).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15 && out[2].norm() < 1e-15);
    }

    #[test]
    fn number_spectrum() {
        let s = FockSpace::new(&[("cavity", 3)]).unwrap();
        let a = annihilation(&s, "cavity").unwrap();
        let n = (&a.adjoint() * &a).unwrap();
        let ev = linalg::hermitian_eigenvalues(&n.to_dense());
        for (k, e) in ev.iter().enumerate() {
            assert!((e - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn embedded_lowering_matches_kronecker_product() {
        let s = FockSpace::new(&[("cavity", 4), ("transmon", 3)]).unwrap();
        let a = annihilation(&s, "cavity").unwrap().to_dense();
        let oracle = linalg::kron(&local_lowering(4), &DMatrix::identity(3, 3));
        assert!(max_abs(&(&a - &oracle)) < 1e-15);
        // a |2>|g> = √2 |1>|g>
        let psi = basis(12, s.basis_index(&[2, 0]).unwrap());
        let out = &a * &psi;
        let target = s.basis_index(&[1, 0]).unwrap();
        assert!((out[target] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let q = annihilation(&s, "transmon").unwrap().to_dense();
        let oracle_q = linalg::kron(&DMatrix::identity(4, 4), &local_lowering(3));
        assert!(max_abs(&(&q - &oracle_q)) < 1e-15);
    }

    #[test]
    fn operators_on_different_factors_commute() {
        let s = FockSpace::new(&[("cavity", 4), ("transmon", 3), ("readout", 2)]).unwrap();
        let labels = ["cavity", "transmon", "readout"];
        for (i, x) in labels.iter().enumerate() {
            for y in labels.iter().skip(i + 1) {
                let a = annihilation(&s, x).unwrap();
                for b in [annihilation(&s, y).unwrap(), creation(&s, y).unwrap()] {
                    assert!(max_abs(&a.commutator(&b).unwrap().to_dense()) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let d = 6;
        let s = FockSpace::new(&[("cavity", d)]).unwrap();
        let a = annihilation(&s, "cavity").unwrap();
        let cm = a.commutator(&a.adjoint()).unwrap().to_dense();
        for m in 0..d - 1 {
            for n in 0..d - 1 {
                let expect = if m == n { ONE } else { ZERO };
                assert!((cm[(m, n)] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn parity_is_diagonal_sign() {
        let s = FockSpace::new(&[("cavity", 4)]).unwrap();
        let p = parity_operator(&s, "cavity").unwrap();
        assert!(p.is_diagonal());
        let d = p.diagonal();
        assert_eq!(d[0], ONE);
        assert_eq!(d[1], -ONE);
    }

    #[test]
    fn displacement_identity_and_inverse() {
        let s = FockSpace::new(&[("cavity", 30)]).unwrap();
        let d0 = displacement(&s, "cavity", ZERO).unwrap().to_dense();
        assert!(max_abs(&(d0 - DMatrix::identity(30, 30))) < 1e-15);
        let alpha = C64::new(1.2, -0.7);
        let dp = displacement(&s, "cavity", alpha).unwrap().to_dense();
        let dm = displacement(&s, "cavity", -alpha).unwrap().to_dense();
        assert!(max_abs(&(&dp * &dm - DMatrix::identity(30, 30))) < 1e-8);
    }

    #[test]
    fn displacement_unitary_on_retained_subspace() {
        let dim = 40;
        let s = FockSpace::new(&[("cavity", dim)]).unwrap();
        let d = displacement(&s, "cavity", C64::new(2.0, 1.0)).unwrap().to_dense();
        let dd = d.adjoint() * &d;
        // Columns that start well below the cutoff stay normalised.
        for m in 0..10 {
            for n in 0..10 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((dd[(m, n)] - C64::new(expect, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn displacement_guard() {
        let s = FockSpace::new(&[("cavity", 20)]).unwrap();
        assert!(matches!(
            displacement(&s, "cavity", C64::new(3.0, 0.0)),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn hermitian_flag_is_checked() {
        let s = FockSpace::new(&[("cavity", 3)]).unwrap();
        let a = annihilation(&s, "cavity").unwrap();
        assert!(Operator::from_csr(&s, a.matrix().clone(), true).is_err());
        let x = (a.clone() + a.adjoint()).unwrap();
        assert!(Operator::from_csr(&s, x.matrix().clone(), true).is_ok());
    }
}
