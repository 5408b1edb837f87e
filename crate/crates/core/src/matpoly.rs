//! Polynomials with N×N complex matrix coefficients, the scalar ↔ matrix
//! correspondence, the block three-term recurrence, and its unitary
//! normalization to lower-triangular recurrence matrices.
//!
//! Matrix coefficients always multiply from the left:
//! `x P_n = D_{n+1} P_{n+1} + E_n P_n + D_n^* P_{n-1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hbasis::HBasis;
use crate::jacobi::{BlockJacobi, JacobiError};
use crate::linalg::{
    cre, forward_substitute, frobenius, hermitian_defect, lq_positive, ql_positive,
    upper_offdiag_max, CMatrix, MatrixWire,
};
use crate::poly::Polynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatPolyError {
    #[error("scalar polynomial p_{index} has degree {got}, expected {index}")]
    DegreeViolation { index: usize, got: isize },
    #[error("need p_0..p_{needed}, only {have} polynomials given")]
    TooFewScalars { needed: usize, have: usize },
    #[error("leading coefficient of P_{0} is not lower triangular with nonzero diagonal")]
    NotTriangular(usize),
    #[error("D_{0} is singular")]
    SingularD(usize),
    #[error("A_{index} is numerically singular (|det| = {det:e})")]
    SingularA { index: usize, det: f64 },
    #[error("initial matrix polynomial must be a constant nonsingular lower-triangular matrix")]
    BadInitial,
    #[error("need {needed} diagonal blocks, only {have} available")]
    InsufficientBlocks { needed: usize, have: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

/// Relative tolerance for "lower triangular" checks on leading coefficients.
pub const TRIANGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatPolyWire", into = "MatPolyWire")]
pub struct MatrixPolynomial {
    n: usize,
    coeffs: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct MatPolyWire {
    #[serde(rename = "N")]
    n: usize,
    coeffs: Vec<MatrixWire>,
}

impl TryFrom<MatPolyWire> for MatrixPolynomial {
    type Error = MatPolyError;
    fn try_from(w: MatPolyWire) -> Result<Self, MatPolyError> {
        let coeffs = w
            .coeffs
            .iter()
            .map(|m| {
                m.to_square()
                    .filter(|m| m.nrows() == w.n)
                    .ok_or(MatPolyError::DimensionMismatch("coefficients must be N×N"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MatrixPolynomial::new(w.n, coeffs))
    }
}

impl From<MatrixPolynomial> for MatPolyWire {
    fn from(p: MatrixPolynomial) -> Self {
        MatPolyWire {
            n: p.n,
            coeffs: p.coeffs.iter().map(MatrixWire::from).collect(),
        }
    }
}

impl MatrixPolynomial {
    /// Trailing coefficients that are exactly zero are dropped.
    pub fn new(n: usize, mut coeffs: Vec<CMatrix>) -> Self {
        while coeffs.last().is_some_and(|m| m.iter().all(|z| z.norm() == 0.0)) {
            coeffs.pop();
        }
        Self { n, coeffs }
    }

    /// `self + sign * other`, dropping leading coefficients that cancel to
    /// within `1e-12` of the operands' size.
    fn combine(&self, other: &Self, sign: f64) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs: Vec<CMatrix> = (0..len)
            .map(|i| self.coeff(i) + other.coeff(i) * cre(sign))
            .collect();
        while let Some(last) = coeffs.last() {
            let i = coeffs.len() - 1;
            let size = frobenius(&self.coeff(i)).max(frobenius(&other.coeff(i)));
            if frobenius(last) <= 1e-12 * size {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self::new(self.n, coeffs)
    }

    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: Vec::new() }
    }

    pub fn constant(m: CMatrix) -> Self {
        let n = m.nrows();
        Self::new(n, vec![m])
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMatrix::identity(n, n))
    }

    /// Builds from an N×N grid of scalar polynomial entries.
    pub fn from_entries(entries: &[Vec<Polynomial>]) -> Self {
        let n = entries.len();
        let len = entries
            .iter()
            .flatten()
            .map(|p| p.coeffs().len())
            .max()
            .unwrap_or(0);
        let coeffs = (0..len)
            .map(|i| CMatrix::from_fn(n, n, |r, c| entries[r][c].coeff(i)))
            .collect();
        Self::new(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn leading(&self) -> Option<&CMatrix> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> CMatrix {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.n, self.n))
    }

    /// Entry `(row, col)` as a scalar polynomial.
    pub fn entry(&self, row: usize, col: usize) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|m| m[(row, col)]).collect())
    }

    pub fn eval(&self, t: Complex64) -> CMatrix {
        self.coeffs
            .iter()
            .rev()
            .fold(CMatrix::zeros(self.n, self.n), |acc, m| acc * t + m)
    }

    /// `x * P(x)`
    pub fn times_x(&self) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(CMatrix::zeros(self.n, self.n));
        coeffs.extend(self.coeffs.iter().cloned());
        Self { n: self.n, coeffs }
    }

    /// `M * P(x)`
    pub fn left_mul(&self, m: &CMatrix) -> Self {
        Self::new(self.n, self.coeffs.iter().map(|c| m * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    /// Frobenius norm of `self - other`, untrimmed.
    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|i| frobenius(&(self.coeff(i) - other.coeff(i))).powi(2)).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the stacked coefficients.
    pub fn norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|m| m.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    fn has_triangular_leading(&self, expected_degree: usize) -> bool {
        if self.degree() != expected_degree as isize {
            return false;
        }
        let lead = &self.coeffs[expected_degree];
        let norm = frobenius(lead);
        upper_offdiag_max(lead) <= TRIANGULAR_TOL * norm
            && (0..self.n).all(|i| lead[(i, i)].norm() > TRIANGULAR_TOL * norm)
    }
}

/// `P_n` from scalars: row `m` holds the components of `p_{nN+m}`.
pub fn scalars_to_matrix(
    p: &[Polynomial],
    basis: &HBasis,
    n: usize,
) -> Result<MatrixPolynomial, MatPolyError> {
    let size = basis.n();
    let last = n * size + size - 1;
    if p.len() <= last {
        return Err(MatPolyError::TooFewScalars {
            needed: last,
            have: p.len(),
        });
    }
    let rows: Vec<Vec<Polynomial>> = (0..size)
        .map(|m| {
            let idx = n * size + m;
            if p[idx].degree() != idx as isize {
                return Err(MatPolyError::DegreeViolation {
                    index: idx,
                    got: p[idx].degree(),
                });
            }
            Ok(basis.decompose(&p[idx]).parts)
        })
        .collect::<Result<_, _>>()?;
    Ok(MatrixPolynomial::from_entries(&rows))
}

/// All complete matrix polynomials `P_0, P_1, ...` available from `p`.
pub fn scalars_to_matrices(
    p: &[Polynomial],
    basis: &HBasis,
) -> Result<Vec<MatrixPolynomial>, MatPolyError> {
    (0..p.len() / basis.n())
        .map(|n| scalars_to_matrix(p, basis, n))
        .collect()
}

/// Scalars from matrix polynomials: `p_{nN+m}(x) = sum_j x^j P_{n,m,j}(h(x))`.
pub fn matrix_to_scalars(
    ps: &[MatrixPolynomial],
    basis: &HBasis,
) -> Result<Vec<Polynomial>, MatPolyError> {
    let size = basis.n();
    let mut out = Vec::with_capacity(ps.len() * size);
    for (n, pn) in ps.iter().enumerate() {
        if pn.n() != size {
            return Err(MatPolyError::DimensionMismatch("matrix size differs from deg h"));
        }
        if !pn.has_triangular_leading(n) {
            return Err(MatPolyError::NotTriangular(n));
        }
        for m in 0..size {
            // entries right of the diagonal have degree < n; their degree-n
            // coefficient is rounding noise already checked to be negligible
            let parts = crate::hbasis::ComponentVector::new(
                (0..size)
                    .map(|j| {
                        let e = pn.entry(m, j);
                        if j > m && e.coeffs().len() > n {
                            Polynomial::new(e.coeffs()[..n].to_vec())
                        } else {
                            e
                        }
                    })
                    .collect(),
            );
            let p = basis
                .reconstruct(&parts)
                .expect("component count equals N by construction");
            let idx = n * size + m;
            if p.degree() != idx as isize {
                return Err(MatPolyError::DegreeViolation {
                    index: idx,
                    got: p.degree(),
                });
            }
            out.push(p);
        }
    }
    Ok(out)
}

/// Runs the block recurrence forward:
/// `P_{n+1} = D_{n+1}^{-1} (x P_n - E_n P_n - D_n^* P_{n-1})`, `P_{-1} = 0`.
/// Returns `P_0 .. P_{count-1}`.
pub fn generate(
    blocks: &BlockJacobi,
    p0: &MatrixPolynomial,
    count: usize,
) -> Result<Vec<MatrixPolynomial>, MatPolyError> {
    let n = blocks.n();
    if p0.n() != n || p0.degree() != 0 {
        return Err(MatPolyError::BadInitial);
    }
    let c0 = &p0.coeffs()[0];
    if upper_offdiag_max(c0) > TRIANGULAR_TOL * frobenius(c0) || c0.determinant().norm() == 0.0 {
        return Err(MatPolyError::BadInitial);
    }
    if count > blocks.len() {
        return Err(MatPolyError::InsufficientBlocks {
            needed: count,
            have: blocks.len(),
        });
    }
    let mut out: Vec<MatrixPolynomial> = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(p0.clone());
    for k in 0..count.saturating_sub(1) {
        let pk = &out[k];
        let mut rhs = pk.times_x().sub(&pk.left_mul(blocks.e(k)));
        if k >= 1 {
            rhs = rhs.sub(&out[k - 1].left_mul(&blocks.d(k).adjoint()));
        }
        let d = blocks.d(k + 1);
        let coeffs = rhs
            .coeffs()
            .iter()
            .map(|c| forward_substitute(d, c).ok_or(MatPolyError::SingularD(k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(MatrixPolynomial::new(n, coeffs));
    }
    Ok(out)
}

/// Forward recurrence for general (not necessarily triangular) recurrence
/// matrices: `x Q_n = A_{n+1} Q_{n+1} + B_n Q_n + A_n^* Q_{n-1}` with
/// `a[i] = A_{i+1}` and `b[i] = B_i`, solved by LU.
pub fn generate_general(
    a: &[CMatrix],
    b: &[CMatrix],
    q0: &MatrixPolynomial,
    count: usize,
) -> Result<Vec<MatrixPolynomial>, MatPolyError> {
    let n = q0.n();
    if count > b.len() || count > a.len() + 1 {
        return Err(MatPolyError::InsufficientBlocks {
            needed: count,
            have: b.len().min(a.len() + 1),
        });
    }
    let mut out: Vec<MatrixPolynomial> = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(q0.clone());
    for k in 0..count - 1 {
        let qk = &out[k];
        let mut rhs = qk.times_x().sub(&qk.left_mul(&b[k]));
        if k >= 1 {
            rhs = rhs.sub(&out[k - 1].left_mul(&a[k - 1].adjoint()));
        }
        let lu = a[k].clone().lu();
        let coeffs = rhs
            .coeffs()
            .iter()
            .map(|c| {
                lu.solve(c).ok_or(MatPolyError::SingularA {
                    index: k + 1,
                    det: 0.0,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(MatrixPolynomial::new(n, coeffs));
    }
    Ok(out)
}

/// Largest relative residual of the block three-term recurrence,
/// `||x P_n - D_{n+1} P_{n+1} - E_n P_n - D_n^* P_{n-1}||`, over every `n`
/// with `P_{n+1}` available. Each residual is divided by
/// `max(1, largest term norm)`, so for families of unit scale it is the
/// absolute residual.
pub fn verify_three_term(ps: &[MatrixPolynomial], blocks: &BlockJacobi) -> f64 {
    let mut worst: f64 = 0.0;
    let last = ps.len().min(blocks.len());
    for k in 0..last.saturating_sub(1) {
        // raw coefficient differences: `sub` would trim the cancelled residual away
        let mut terms = vec![ps[k].times_x(), ps[k + 1].left_mul(blocks.d(k + 1)), ps[k].left_mul(blocks.e(k))];
        if k >= 1 {
            terms.push(ps[k - 1].left_mul(&blocks.d(k).adjoint()));
        }
        let scale = terms.iter().map(MatrixPolynomial::norm).fold(1.0, f64::max);
        let len = terms.iter().map(|t| t.coeffs.len()).max().unwrap_or(0);
        let res = (0..len)
            .map(|i| {
                let r = terms[1..].iter().fold(terms[0].coeff(i), |acc, t| acc - t.coeff(i));
                frobenius(&r).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res / scale);
    }
    worst
}

/// Output of [`lower_triangularize`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub blocks: BlockJacobi,
    /// `U_0, U_1, ...`
    pub unitaries: Vec<CMatrix>,
}

/// Relative singularity threshold on `|det A_n|`, matching the `D_n` check.
pub const SINGULAR_A_TOL: f64 = 1e-12;

/// Unitary equivalence to lower-triangular recurrence matrices.
///
/// Given `A_1, A_2, ...` (`a[i] = A_{i+1}`), Hermitian `B_0, B_1, ...` and a
/// unitary `U_0`, factors `U_{n-1} A_n = D_n U_n` with `D_n` lower triangular
/// with real positive diagonal and `U_n` unitary, and sets
/// `E_n = U_n B_n U_n^*`. Then `P_n = U_n Q_n` satisfies the recurrence with
/// `(D, E)` whenever `Q_n` satisfies it with `(A, B)`.
pub fn lower_triangularize(
    a: &[CMatrix],
    b: &[CMatrix],
    u0: &CMatrix,
) -> Result<Normalized, MatPolyError> {
    if b.len() != a.len() + 1 {
        return Err(MatPolyError::DimensionMismatch("need one more B block than A blocks"));
    }
    let n = u0.nrows();
    let mut unitaries = vec![u0.clone()];
    let mut d = Vec::with_capacity(a.len());
    for (i, an) in a.iter().enumerate() {
        if an.nrows() != n || an.ncols() != n {
            return Err(MatPolyError::DimensionMismatch("A blocks must be N×N"));
        }
        let det = an.determinant().norm();
        if !(det > SINGULAR_A_TOL * frobenius(an).powi(n as i32)) {
            return Err(MatPolyError::SingularA { index: i + 1, det });
        }
        let (dn, un) = lq_positive(&(&unitaries[i] * an));
        d.push(dn);
        unitaries.push(un);
    }
    let e = b
        .iter()
        .zip(&unitaries)
        .map(|(bn, un)| {
            let en = un * bn * un.adjoint();
            // exact Hermitian symmetrization of rounding noise
            (&en + en.adjoint()) * cre(0.5)
        })
        .collect();
    let blocks = BlockJacobi::new(e, d)?;
    Ok(Normalized { blocks, unitaries })
}

/// A unitary `U_0` with `U_0 Q_0` lower triangular with positive diagonal.
pub fn default_u0(q0: &CMatrix) -> CMatrix {
    let (w, _) = ql_positive(q0);
    w.adjoint()
}

/// True when `E_n` are Hermitian within `tol` (absolute, Frobenius).
pub fn hermitian_within(blocks: &BlockJacobi, tol: f64) -> bool {
    blocks.e_blocks().iter().all(|e| hermitian_defect(e) <= tol)
}
