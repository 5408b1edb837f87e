//! (2N+1)-banded Hermitian N-Jacobi matrices, their N×N block form, and
//! polynomials of tridiagonal Jacobi matrices.
//!
//! Index conventions:
//!
//! * a [`RecurrenceSystem`] stores `c_{n,0}` (real) and `c_{n,k}` for
//!   `1 <= k <= N`; the scalar family satisfies
//!   `h p_n = c_{n,0} p_n + sum_k (conj(c_{n,k}) p_{n-k} + c_{n+k,k} p_{n+k})`.
//! * the banded matrix has `j_{n,m} = conj(c_{n,n-m})` below the diagonal and
//!   `j_{n,m} = c_{m,m-n}` above it, so that `h p = J p` row by row.
//! * [`Tridiagonal`] stores `b_n` on the diagonal and `a[i] = a_{i+1}` on the
//!   off-diagonal coupling rows `i` and `i + 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{cre, czero, frobenius, hermitian_defect, upper_offdiag_max, CMatrix, MatrixWire};
use crate::poly::Polynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JacobiError {
    #[error("recurrence coefficient c[{n},{k}] is not defined")]
    CoefficientMissing { n: usize, k: usize },
    #[error("truncation size {size} is not a multiple of the block size {n}")]
    NotDivisible { size: usize, n: usize },
    #[error("block D_{index} is numerically singular (|det| = {det:e})")]
    SingularD { index: usize, det: f64 },
    #[error("polynomial degree {got} does not match the declared band width {expected}")]
    DegreeMismatch { expected: usize, got: isize },
    #[error("c[{n},{k}] must be nonzero")]
    ZeroLeadingCoefficient { n: usize, k: usize },
    #[error("initial polynomial p_{k} has degree {got}, expected {k}")]
    InitialDegree { k: usize, got: isize },
    #[error("expected {expected} initial polynomials, got {got}")]
    InitialCount { expected: usize, got: usize },
    #[error("coefficient sequences have inconsistent lengths")]
    RaggedCoefficients,
    #[error("polynomial h must have real coefficients here")]
    ComplexPolynomial,
    #[error("invalid size {size}: {reason}")]
    InvalidSize { size: usize, reason: &'static str },
    #[error("block {index} is not a valid {what}")]
    InvalidBlock { index: usize, what: &'static str },
}

/// Coefficients of a (2N+1)-term recurrence plus its initial polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemWire", into = "SystemWire")]
pub struct RecurrenceSystem {
    h: Polynomial,
    c0: Vec<f64>,
    /// `c[k-1][n] = c_{n,k}`
    c: Vec<Vec<Complex64>>,
    initial: Vec<Polynomial>,
}

#[derive(Serialize, Deserialize)]
struct SystemWire {
    #[serde(rename = "N")]
    n: usize,
    h: Polynomial,
    c0: Vec<f64>,
    c: Vec<Vec<Complex64>>,
    initial: Vec<Polynomial>,
}

impl TryFrom<SystemWire> for RecurrenceSystem {
    type Error = JacobiError;
    fn try_from(w: SystemWire) -> Result<Self, JacobiError> {
        if w.h.degree() != w.n as isize {
            return Err(JacobiError::DegreeMismatch {
                expected: w.n,
                got: w.h.degree(),
            });
        }
        RecurrenceSystem::new(w.h, w.c0, w.c, w.initial)
    }
}

impl From<RecurrenceSystem> for SystemWire {
    fn from(s: RecurrenceSystem) -> Self {
        SystemWire {
            n: s.n(),
            h: s.h,
            c0: s.c0,
            c: s.c,
            initial: s.initial,
        }
    }
}

impl RecurrenceSystem {
    /// Validates and builds a system. `c[k-1][n]` holds `c_{n,k}`; all
    /// sequences must have the same length. `c_{n,N}` must be nonzero for
    /// every `n >= N` (entries with `n < k` never enter the recurrence).
    pub fn new(
        h: Polynomial,
        c0: Vec<f64>,
        c: Vec<Vec<Complex64>>,
        initial: Vec<Polynomial>,
    ) -> Result<Self, JacobiError> {
        if h.degree() < 1 {
            return Err(JacobiError::DegreeMismatch {
                expected: c.len(),
                got: h.degree(),
            });
        }
        let n = h.degree() as usize;
        if c.len() != n {
            return Err(JacobiError::DegreeMismatch {
                expected: c.len(),
                got: h.degree(),
            });
        }
        if c.iter().any(|seq| seq.len() != c0.len()) {
            return Err(JacobiError::RaggedCoefficients);
        }
        if initial.len() != n {
            return Err(JacobiError::InitialCount {
                expected: n,
                got: initial.len(),
            });
        }
        for (k, p) in initial.iter().enumerate() {
            if p.degree() != k as isize {
                return Err(JacobiError::InitialDegree { k, got: p.degree() });
            }
        }
        for (idx, v) in c[n - 1].iter().enumerate().skip(n) {
            if v.norm() == 0.0 {
                return Err(JacobiError::ZeroLeadingCoefficient { n: idx, k: n });
            }
        }
        Ok(Self { h, c0, c, initial })
    }

    /// Band half-width `N`.
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    pub fn initial(&self) -> &[Polynomial] {
        &self.initial
    }

    /// Number of indices `n` for which coefficients are defined.
    pub fn len(&self) -> usize {
        self.c0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c0.is_empty()
    }

    /// `c_{n,k}`; `k = 0` returns the real diagonal coefficient.
    pub fn coeff(&self, n: usize, k: usize) -> Result<Complex64, JacobiError> {
        let missing = JacobiError::CoefficientMissing { n, k };
        if k == 0 {
            return self.c0.get(n).map(|&v| cre(v)).ok_or(missing);
        }
        self.c
            .get(k - 1)
            .and_then(|seq| seq.get(n))
            .copied()
            .ok_or(missing)
    }

    /// Runs the scalar recurrence forward from the initial polynomials,
    /// returning `p_0, ..., p_{count-1}`.
    pub fn scalar_family(&self, count: usize) -> Result<Vec<Polynomial>, JacobiError> {
        let n = self.n();
        let mut p: Vec<Polynomial> = self.initial.iter().take(count).cloned().collect();
        // p_{m+N} is solved from the relation at index m.
        let mut m = 0;
        while p.len() < count {
            let target = m + n;
            let mut rhs = &self.h * &p[m];
            rhs = &rhs - &p[m].scale(self.coeff(m, 0)?);
            for k in 1..=n {
                if m >= k {
                    rhs = &rhs - &p[m - k].scale(self.coeff(m, k)?.conj());
                }
            }
            for k in 1..n {
                rhs = &rhs - &p[m + k].scale(self.coeff(m + k, k)?);
            }
            let lead = self.coeff(target, n)?;
            p.push(rhs.scale(lead.inv()));
            m += 1;
        }
        Ok(p)
    }

    /// Recovers recurrence coefficients from the diagonals of a banded
    /// matrix: `c_{n,0} = Re j_{n,n}` and `c_{m,k} = j_{m-k,m}`. Entries
    /// `c_{m,k}` with `m < k` are set to zero.
    pub fn from_banded(
        j: &BandedHermitian,
        h: Polynomial,
        initial: Vec<Polynomial>,
    ) -> Result<Self, JacobiError> {
        let n = j.half_width();
        if h.degree() != n as isize {
            return Err(JacobiError::DegreeMismatch {
                expected: n,
                got: h.degree(),
            });
        }
        let size = j.size();
        let c0 = (0..size).map(|i| j.get(i, i).re).collect();
        let c = (1..=n)
            .map(|k| {
                (0..size)
                    .map(|m| if m >= k { j.get(m - k, m) } else { czero() })
                    .collect()
            })
            .collect();
        Self::new(h, c0, c, initial)
    }
}

/// A Hermitian matrix stored by its `2w + 1` diagonals.
///
/// `diags[w + o][i]` holds the entry at `(i, i + o)` for `o >= 0` and at
/// `(i - o, i)` for `o < 0`; every diagonal has `size - |o|` entries.
/// `polluted` counts trailing rows/columns known to differ from the infinite
/// operator because of truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian {
    half_width: usize,
    size: usize,
    diags: Vec<Vec<Complex64>>,
    polluted: usize,
}

impl BandedHermitian {
    pub fn zeros(half_width: usize, size: usize) -> Self {
        let diags = (0..=2 * half_width)
            .map(|d| {
                let off = d.abs_diff(half_width);
                vec![czero(); size.saturating_sub(off)]
            })
            .collect();
        Self {
            half_width,
            size,
            diags,
            polluted: 0,
        }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn polluted(&self) -> usize {
        self.polluted
    }

    pub fn diagonal(&self, offset: isize) -> &[Complex64] {
        &self.diags[(self.half_width as isize + offset) as usize]
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let off = col as isize - row as isize;
        if off.unsigned_abs() > self.half_width || row >= self.size || col >= self.size {
            return czero();
        }
        self.diags[(self.half_width as isize + off) as usize][row.min(col)]
    }

    /// Writes `(row, col)` and mirrors the conjugate to `(col, row)`.
    pub fn set_hermitian(&mut self, row: usize, col: usize, value: Complex64) {
        let off = col as isize - row as isize;
        assert!(off.unsigned_abs() <= self.half_width, "entry outside the band");
        let w = self.half_width as isize;
        let i = row.min(col);
        self.diags[(w + off) as usize][i] = value;
        self.diags[(w - off) as usize][i] = value.conj();
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    /// Largest `|j_{n,m} - conj(j_{m,n})|`.
    pub fn hermitian_defect(&self) -> f64 {
        let w = self.half_width;
        (1..=w)
            .flat_map(|o| {
                self.diags[w + o]
                    .iter()
                    .zip(&self.diags[w - o])
                    .map(|(u, l)| (u - l.conj()).norm())
            })
            .chain(self.diags[w].iter().map(|d| d.im.abs()))
            .fold(0.0, f64::max)
    }

    /// Nonzero-band entries as `(row, col, re, im)`, row-major.
    pub fn entries(&self) -> Vec<(usize, usize, f64, f64)> {
        let w = self.half_width;
        let mut out = Vec::new();
        for r in 0..self.size {
            let lo = r.saturating_sub(w);
            let hi = (r + w).min(self.size - 1);
            for c in lo..=hi {
                let v = self.get(r, c);
                out.push((r, c, v.re, v.im));
            }
        }
        out
    }
}

/// Builds the `size × size` truncation of the N-Jacobi matrix of `sys`.
pub fn build_banded(sys: &RecurrenceSystem, size: usize) -> Result<BandedHermitian, JacobiError> {
    if size == 0 {
        return Err(JacobiError::InvalidSize {
            size,
            reason: "must be at least 1",
        });
    }
    let n = sys.n();
    let mut j = BandedHermitian::zeros(n, size);
    for m in 0..size {
        j.set_hermitian(m, m, sys.coeff(m, 0)?);
        for k in 1..=n.min(m) {
            // above the diagonal: j_{m-k, m} = c_{m,k}
            j.set_hermitian(m - k, m, sys.coeff(m, k)?);
        }
    }
    Ok(j)
}

/// The block form `E_0, E_1, ...` (Hermitian) and `D_1, D_2, ...` (lower
/// triangular) of a block tridiagonal Hermitian matrix, where `D_n` sits in
/// block row `n - 1`, block column `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlocksWire", into = "BlocksWire")]
pub struct BlockJacobi {
    n: usize,
    e: Vec<CMatrix>,
    /// `d[i] = D_{i+1}`
    d: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct BlocksWire {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "E")]
    e: Vec<MatrixWire>,
    #[serde(rename = "D")]
    d: Vec<MatrixWire>,
}

impl TryFrom<BlocksWire> for BlockJacobi {
    type Error = JacobiError;
    fn try_from(w: BlocksWire) -> Result<Self, JacobiError> {
        let square = |list: Vec<MatrixWire>, what| {
            list.iter()
                .enumerate()
                .map(|(i, m)| {
                    m.to_square()
                        .filter(|m| m.nrows() == w.n)
                        .ok_or(JacobiError::InvalidBlock { index: i, what })
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let e = square(w.e, "N×N block E")?;
        let d = square(w.d, "N×N block D")?;
        BlockJacobi::new(e, d)
    }
}

impl From<BlockJacobi> for BlocksWire {
    fn from(b: BlockJacobi) -> Self {
        BlocksWire {
            n: b.n,
            e: b.e.iter().map(MatrixWire::from).collect(),
            d: b.d.iter().map(MatrixWire::from).collect(),
        }
    }
}

/// Tolerance on `E_n - E_n^*` and on entries above the diagonal of `D_n`,
/// relative to the block norm.
pub const BLOCK_TOL: f64 = 1e-12;

/// `|det D| > SINGULAR_TOL * ||D||_F^N` is required of every `D_n`.
pub const SINGULAR_TOL: f64 = 1e-12;

fn check_d(index: usize, d: &CMatrix) -> Result<(), JacobiError> {
    let n = d.nrows();
    let norm = frobenius(d);
    if upper_offdiag_max(d) > BLOCK_TOL * norm {
        return Err(JacobiError::InvalidBlock {
            index,
            what: "lower-triangular block D",
        });
    }
    let det: Complex64 = (0..n).map(|i| d[(i, i)]).product();
    if !(det.norm() > SINGULAR_TOL * norm.powi(n as i32)) {
        return Err(JacobiError::SingularD {
            index,
            det: det.norm(),
        });
    }
    Ok(())
}

impl BlockJacobi {
    /// Validates `E_n` Hermitian, `D_n` lower triangular and nonsingular.
    /// `d[i]` is `D_{i+1}`.
    pub fn new(e: Vec<CMatrix>, d: Vec<CMatrix>) -> Result<Self, JacobiError> {
        let n = e.first().map(|m| m.nrows()).unwrap_or(0);
        if n == 0 {
            return Err(JacobiError::InvalidBlock {
                index: 0,
                what: "non-empty block E",
            });
        }
        for (i, m) in e.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n || hermitian_defect(m) > BLOCK_TOL * frobenius(m).max(1.0) {
                return Err(JacobiError::InvalidBlock {
                    index: i,
                    what: "Hermitian N×N block E",
                });
            }
        }
        for (i, m) in d.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(JacobiError::InvalidBlock {
                    index: i + 1,
                    what: "N×N block D",
                });
            }
            check_d(i + 1, m)?;
        }
        Ok(Self { n, e, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of diagonal blocks.
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }

    pub fn e(&self, k: usize) -> &CMatrix {
        &self.e[k]
    }

    /// `D_k` for `k >= 1`.
    pub fn d(&self, k: usize) -> &CMatrix {
        assert!(k >= 1, "D blocks are indexed from 1");
        &self.d[k - 1]
    }

    pub fn e_blocks(&self) -> &[CMatrix] {
        &self.e
    }

    /// `D_1, D_2, ...`
    pub fn d_blocks(&self) -> &[CMatrix] {
        &self.d
    }

    /// Mutable access for perturbation experiments; skips validation.
    pub fn e_mut(&mut self, k: usize) -> &mut CMatrix {
        &mut self.e[k]
    }

    /// Reassembles the banded matrix of half-width `N` from the blocks.
    pub fn reassemble(&self) -> BandedHermitian {
        let n = self.n;
        let size = n * self.e.len();
        let mut j = BandedHermitian::zeros(n, size);
        for (b, e) in self.e.iter().enumerate() {
            for i in 0..n {
                for l in i..n {
                    j.set_hermitian(b * n + i, b * n + l, e[(i, l)]);
                }
            }
        }
        for (idx, d) in self.d.iter().enumerate().take(self.e.len().saturating_sub(1)) {
            let b = idx + 1;
            for i in 0..n {
                for l in 0..=i {
                    j.set_hermitian((b - 1) * n + i, b * n + l, d[(i, l)]);
                }
            }
        }
        j
    }
}

fn partition_blocks(j: &BandedHermitian, rows: usize) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let n = j.half_width().max(1);
    let count = rows / n;
    let e = (0..count)
        .map(|b| CMatrix::from_fn(n, n, |i, l| j.get(b * n + i, b * n + l)))
        .collect();
    let d = (1..count)
        .map(|b| {
            CMatrix::from_fn(n, n, |i, l| {
                if i >= l {
                    j.get((b - 1) * n + i, b * n + l)
                } else {
                    czero()
                }
            })
        })
        .collect();
    (e, d)
}

/// Splits an N-Jacobi matrix into its `E_n` and `D_n` blocks.
pub fn block_partition(j: &BandedHermitian) -> Result<BlockJacobi, JacobiError> {
    let n = j.half_width();
    if n == 0 || j.size() % n != 0 {
        return Err(JacobiError::NotDivisible { size: j.size(), n });
    }
    let (e, d) = partition_blocks(j, j.size());
    BlockJacobi::new(e, d)
}

/// Three-term recurrence coefficients of a scalar Jacobi matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tridiagonal {
    /// `a[i] = a_{i+1} > 0`, coupling rows `i` and `i + 1`.
    pub a: Vec<f64>,
    /// `b[i] = b_i`
    pub b: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        Self { a, b }
    }

    /// Orthonormal Chebyshev polynomials of the first kind (normalized
    /// arcsine measure on `[-1, 1]`): `a_1 = 1/sqrt(2)`, `a_n = 1/2` after.
    pub fn chebyshev(len: usize) -> Self {
        let a = (0..len.saturating_sub(1))
            .map(|i| if i == 0 { 0.5f64.sqrt() } else { 0.5 })
            .collect();
        Self::new(a, vec![0.0; len])
    }

    /// Orthonormal Legendre polynomials (uniform probability measure on
    /// `[-1, 1]`): `a_n = n / sqrt(4n^2 - 1)`.
    pub fn legendre(len: usize) -> Self {
        let a = (1..len)
            .map(|n| {
                let n = n as f64;
                n / (4.0 * n * n - 1.0).sqrt()
            })
            .collect();
        Self::new(a, vec![0.0; len])
    }

    /// Number of rows the coefficients can fill.
    pub fn len(&self) -> usize {
        self.b.len().min(self.a.len() + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn truncated(&self, size: usize) -> Self {
        Self::new(
            self.a[..size.saturating_sub(1).min(self.a.len())].to_vec(),
            self.b[..size.min(self.b.len())].to_vec(),
        )
    }

    pub fn to_banded(&self, size: usize) -> Result<BandedHermitian, JacobiError> {
        if size == 0 || size > self.len() {
            return Err(JacobiError::InvalidSize {
                size,
                reason: "needs b_0..b_{size-1} and a_1..a_{size-1}",
            });
        }
        let mut j = BandedHermitian::zeros(1, size);
        for i in 0..size {
            j.set_hermitian(i, i, cre(self.b[i]));
            if i + 1 < size {
                j.set_hermitian(i, i + 1, cre(self.a[i]));
            }
        }
        Ok(j)
    }

    pub fn to_dense(&self, size: usize) -> DMatrix<f64> {
        DMatrix::from_fn(size, size, |i, j| {
            if i == j {
                self.b[i]
            } else if j == i + 1 {
                self.a[i]
            } else if i == j + 1 {
                self.a[j]
            } else {
                0.0
            }
        })
    }
}

/// `size × size` truncation of `h(J)` for the tridiagonal `J`, computed by
/// Horner's scheme on banded matrices. The result has half-width `deg h` and
/// its last `deg h` rows/columns are flagged as truncation-polluted.
pub fn h_of_tridiagonal(
    tri: &Tridiagonal,
    h: &Polynomial,
    size: usize,
) -> Result<BandedHermitian, JacobiError> {
    if h.degree() < 1 {
        return Err(JacobiError::DegreeMismatch {
            expected: 1,
            got: h.degree(),
        });
    }
    if !h.is_real(0.0) {
        return Err(JacobiError::ComplexPolynomial);
    }
    let n = h.degree() as usize;
    let jm = tri.to_banded(size)?;
    let coeffs: Vec<f64> = h.coeffs().iter().map(|c| c.re).collect();

    // Work on full (non-Hermitian-mirrored) band storage: rows[r][c - r + w].
    let mut w = 0usize;
    let mut acc: Vec<Vec<f64>> = vec![vec![coeffs[n]]; size];
    for &c in coeffs[..n].iter().rev() {
        let nw = w + 1;
        let mut next = vec![vec![0.0; 2 * nw + 1]; size];
        for (r, row) in next.iter_mut().enumerate() {
            for (slot, out) in row.iter_mut().enumerate() {
                let col = r as isize + slot as isize - nw as isize;
                if col < 0 || col >= size as isize {
                    continue;
                }
                let col = col as usize;
                // (acc * J)[r][col] = sum_t acc[r][t] J[t][col], t in col-1..=col+1
                let mut s = 0.0;
                for t in col.saturating_sub(1)..=(col + 1).min(size - 1) {
                    let ao = t as isize - r as isize;
                    if ao.unsigned_abs() > w {
                        continue;
                    }
                    s += acc[r][(ao + w as isize) as usize] * jm.get(t, col).re;
                }
                *out = s;
            }
            row[nw] += c;
        }
        acc = next;
        w = nw;
    }

    let mut out = BandedHermitian::zeros(n, size);
    for r in 0..size {
        for o in 0..=n.min(size - 1 - r) {
            out.set_hermitian(r, r + o, cre(acc[r][n + o]));
        }
    }
    out.polluted = n.min(size);
    Ok(out)
}

/// Block-wise size of a banded matrix: for each block index `k`,
/// `max(||E_k||_F, ||D_k||_F)` (with `D_0 = 0`). Truncation-polluted rows
/// and any incomplete trailing block are excluded.
pub fn decay_profile(j: &BandedHermitian) -> Vec<f64> {
    let n = j.half_width();
    if n == 0 {
        return (0..j.size().saturating_sub(j.polluted()))
            .map(|i| j.get(i, i).norm())
            .collect();
    }
    let rows = j.size().saturating_sub(j.polluted());
    let (e, d) = partition_blocks(j, rows);
    e.iter()
        .enumerate()
        .map(|(k, ek)| {
            let dk = if k == 0 { 0.0 } else { frobenius(&d[k - 1]) };
            frobenius(ek).max(dk)
        })
        .collect()
}
