//! Small dense/sparse kernels shared by the simulator.
//!
//! Sparse matrices are stored as CSR (`nalgebra_sparse::CsrMatrix`). Dense
//! matrices only show up in the matrix exponential, the density matrices
//! themselves and the eigenvalue checks.

use nalgebra::{DMatrix, SymmetricEigen};
use nalgebra_sparse::ops::serial::spmm_csr_dense;
use nalgebra_sparse::ops::Op;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::C64;

pub type Csr = CsrMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Matrix exponential by scaling and squaring with a Padé approximant whose
/// degree is picked from a 1-norm estimate (nalgebra's implementation of the
/// Higham 2005 scheme).
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "expm needs a square matrix");
    if a.nrows() == 0 {
        return a.clone();
    }
    a.exp()
}

/// Builds a CSR matrix from `(row, col, value)` triplets, summing duplicates
/// and dropping exact zeros.
pub fn csr_from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Csr {
    let mut coo = CooMatrix::new(n, n);
    for (r, col, v) in triplets {
        if v != ZERO {
            coo.push(r, col, v);
        }
    }
    CsrMatrix::from(&coo)
}

pub fn csr_identity(n: usize) -> Csr {
    csr_from_triplets(n, (0..n).map(|k| (k, k, ONE)))
}

pub fn csr_from_dense(m: &DMatrix<C64>, drop_below: f64) -> Csr {
    let n = m.nrows();
    let mut t = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..n {
            let v = m[(i, j)];
            if v.norm() > drop_below {
                t.push((i, j, v));
            }
        }
    }
    csr_from_triplets(n, t)
}

pub fn csr_to_dense(m: &Csr) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        d[(i, j)] += *v;
    }
    d
}

pub fn csr_adjoint(m: &Csr) -> Csr {
    let mut t = m.transpose();
    for v in t.values_mut() {
        *v = v.conj();
    }
    t
}

pub fn csr_scale(m: &Csr, s: C64) -> Csr {
    let mut out = m.clone();
    for v in out.values_mut() {
        *v *= s;
    }
    out
}

/// `out = beta * out + alpha * a * b`.
#[inline]
pub fn spmm(out: &mut DMatrix<C64>, beta: C64, alpha: C64, a: &Csr, b: &DMatrix<C64>) {
    spmm_csr_dense(beta, out, alpha, Op::NoOp(a), Op::NoOp(b));
}

/// True when every stored entry sits on the diagonal.
pub fn csr_is_diagonal(m: &Csr) -> bool {
    m.triplet_iter().all(|(i, j, v)| i == j || v.norm() == 0.0)
}

pub fn csr_diagonal(m: &Csr) -> Vec<C64> {
    let mut d = vec![ZERO; m.nrows()];
    for (i, j, v) in m.triplet_iter() {
        if i == j {
            d[i] += *v;
        }
    }
    d
}

/// Largest `|A_ij - conj(A_ji)|`.
pub fn csr_hermiticity_defect(m: &Csr) -> f64 {
    let diff = m - &csr_adjoint(m);
    diff.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub fn dense_hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Replaces `m` by `(m + m†) / 2` in place.
pub fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        m[(j, j)] = c(m[(j, j)].re);
    }
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|k| m[(k, k)]).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut h = m.clone();
    hermitize(&mut h);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Slightly negative eigenvalues from rounding are clipped to zero.
pub fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let mut h = m.clone();
    hermitize(&mut h);
    let eig = SymmetricEigen::new(h);
    let mut v = eig.eigenvectors.clone();
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        v.column_mut(k).scale_mut(s);
    }
    &v * eig.eigenvectors.adjoint()
}

/// Dense Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
