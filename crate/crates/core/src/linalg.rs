//! Small dense complex matrix helpers shared by the block modules.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type CMatrix = DMatrix<Complex64>;

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn cre(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest modulus of an entry strictly above the diagonal.
pub fn upper_offdiag_max(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j.min(m.nrows()) {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

pub fn is_lower_triangular(m: &CMatrix, rel_tol: f64) -> bool {
    upper_offdiag_max(m) <= rel_tol * frobenius(m).max(f64::MIN_POSITIVE)
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// Solves `l * x = rhs` for lower-triangular `l` by forward substitution.
/// Returns `None` when a diagonal entry is exactly zero.
pub fn forward_substitute(l: &CMatrix, rhs: &CMatrix) -> Option<CMatrix> {
    let n = l.nrows();
    let mut x = rhs.clone();
    for col in 0..rhs.ncols() {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            let d = l[(i, i)];
            if d == czero() {
                return None;
            }
            x[(i, col)] = s / d;
        }
    }
    Some(x)
}

/// Unitarity defect `||U U^* - I||_F`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    frobenius(&(u * u.adjoint() - CMatrix::identity(n, n)))
}

/// LQ factorization `m = l * q` with `l` lower triangular with real positive
/// diagonal and `q` unitary. Unique for nonsingular `m`.
///
/// Computed as the adjoint of a Householder QR of `m^*`, with the column
/// phases of `Q` rotated so that the triangular factor has positive diagonal.
pub fn lq_positive(m: &CMatrix) -> (CMatrix, CMatrix) {
    let qr = m.adjoint().qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    fix_phases(&mut q, &mut r);
    (r.adjoint(), q.adjoint())
}

/// QL factorization `m = w * l` with `w` unitary and `l` lower triangular
/// with real positive diagonal.
pub fn ql_positive(m: &CMatrix) -> (CMatrix, CMatrix) {
    let n = m.nrows();
    let flip = |a: &CMatrix| CMatrix::from_fn(n, n, |i, j| a[(n - 1 - i, n - 1 - j)]);
    let qr = flip(m).qr();
    let (mut q, mut r) = (qr.q(), qr.r());
    fix_phases(&mut q, &mut r);
    (flip(&q), flip(&r))
}

/// Rotates `q`'s columns and `r`'s rows so that `diag(r)` is real and
/// nonnegative while `q * r` is unchanged.
fn fix_phases(q: &mut CMatrix, r: &mut CMatrix) {
    for k in 0..r.nrows() {
        let d = r[(k, k)];
        let norm = d.norm();
        if norm == 0.0 {
            continue;
        }
        let phase = d / norm;
        for j in 0..r.ncols() {
            r[(k, j)] *= phase.conj();
        }
        r[(k, k)] = cre(norm);
        for i in 0..q.nrows() {
            q[(i, k)] *= phase;
        }
    }
}

/// Row-major nested-array wire form of a complex matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixWire(pub Vec<Vec<Complex64>>);

impl From<&CMatrix> for MatrixWire {
    fn from(m: &CMatrix) -> Self {
        MatrixWire(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        )
    }
}

impl MatrixWire {
    /// Square matrix from rows; `None` when ragged or non-square.
    pub fn to_square(&self) -> Option<CMatrix> {
        let n = self.0.len();
        if self.0.iter().any(|row| row.len() != n) {
            return None;
        }
        Some(CMatrix::from_fn(n, n, |i, j| self.0[i][j]))
    }
}
