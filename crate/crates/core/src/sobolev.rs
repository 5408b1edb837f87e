//! Discrete Sobolev and point-evaluation inner products
//!
//! `<p, q> = ∫ p q dmu + sum_i sum_j lambda_ij p^(j)(c_i) q^(j)(c_i)
//!          + (sum_k a_k p(c_k)) (sum_k a_k q(c_k))`,
//!
//! their orthonormal polynomials, and the (2N+1)-term recurrence those
//! polynomials satisfy with respect to the minimal `h` vanishing at every
//! evaluation point to the right order.
//!
//! Orthonormal families are computed in the basis `q_k` of
//! `mu`-orthonormal polynomials, where the Gram matrix is the identity plus
//! a low-rank term. Coefficients in that basis have norm at most one, so
//! band and orthonormality checks stay accurate at degrees where monomial
//! coefficients have long since lost all relative precision.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::{JacobiError, RecurrenceSystem, Tridiagonal};
use crate::measures::{build_l_pointmass, build_l_sobolev, DerivativeTerm, MatrixMeasure, Measure, MeasureError};
use crate::poly::{binomial, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SobolevError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("Gram matrix is not numerically positive definite at degree {degree} (pivot ratio {ratio:e})")]
    GramNotPD { degree: usize, ratio: f64 },
    #[error("requested {count} polynomials; the degree cap is {MAX_DEGREE}")]
    DegreeCap { count: usize },
    #[error("|<h p_{n}, p_{m}>| = {value:e} outside the band of half-width {width}")]
    BandViolation {
        n: usize,
        m: usize,
        value: f64,
        width: usize,
    },
    #[error("the base measure determines only {available} orthonormal polynomials, {needed} needed")]
    InsufficientMeasure { needed: usize, available: usize },
    #[error("need at least {needed} polynomials to seed the recurrence, got {got}")]
    TooFewPolynomials { needed: usize, got: usize },
    #[error("h must have real coefficients")]
    ComplexH,
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

/// Highest degree produced by [`orthonormal_family`].
pub const MAX_DEGREE: usize = 40;
/// Cholesky pivots below this fraction of the leading pivot are rejected.
pub const PIVOT_TOL: f64 = 1e-13;
/// Largest tolerated `|<h p_n, p_m>|` for `|n - m| > N`.
pub const BAND_TOL: f64 = 1e-8;

/// Derivative evaluations at one point: `orders[j] = lambda_{i,j}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativePoint {
    pub c: f64,
    pub orders: BTreeMap<usize, f64>,
}

impl DerivativePoint {
    /// `M_i`, the highest derivative order present.
    pub fn max_order(&self) -> usize {
        self.orders.keys().next_back().copied().unwrap_or(0)
    }
}

/// The rank-one term `(sum_k a_k f(c_k)) (sum_k a_k g(c_k))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointTerms {
    pub a: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecWire", into = "SpecWire")]
pub struct SobolevSpec {
    measure: Measure,
    derivative_terms: Vec<DerivativePoint>,
    point_terms: Option<PointTerms>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecWire {
    measure: Measure,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    derivative_terms: Vec<DerivativePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point_terms: Option<PointTerms>,
}

impl TryFrom<SpecWire> for SobolevSpec {
    type Error = SobolevError;
    fn try_from(w: SpecWire) -> Result<Self, SobolevError> {
        SobolevSpec::new(w.measure, w.derivative_terms, w.point_terms)
    }
}

impl From<SobolevSpec> for SpecWire {
    fn from(s: SobolevSpec) -> Self {
        SpecWire {
            measure: s.measure,
            derivative_terms: s.derivative_terms,
            point_terms: s.point_terms,
        }
    }
}

impl SobolevSpec {
    pub fn new(
        measure: Measure,
        derivative_terms: Vec<DerivativePoint>,
        point_terms: Option<PointTerms>,
    ) -> Result<Self, SobolevError> {
        let invalid = |s: String| Err(SobolevError::InvalidSpec(s));
        for t in &derivative_terms {
            if !t.c.is_finite() {
                return invalid(format!("derivative point {} is not finite", t.c));
            }
            if t.orders.is_empty() {
                return invalid(format!("derivative point {} lists no orders", t.c));
            }
            for (&j, &lambda) in &t.orders {
                if j == 0 {
                    return invalid("derivative orders start at 1; use point_terms for values".into());
                }
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return invalid(format!("lambda for order {j} at {} must be >= 0", t.c));
                }
            }
        }
        if let Some(pt) = &point_terms {
            if pt.a.len() != pt.c.len() || pt.a.is_empty() {
                return invalid("point_terms needs equally long, non-empty a and c".into());
            }
            if pt.a.iter().chain(&pt.c).any(|v| !v.is_finite()) {
                return invalid("point_terms entries must be finite".into());
            }
        }
        if derivative_terms.is_empty() && point_terms.is_none() {
            return invalid("spec needs derivative_terms or point_terms".into());
        }
        Ok(Self {
            measure,
            derivative_terms,
            point_terms,
        })
    }

    /// `∫ p q dmu + lambda p^(r)(c) q^(r)(c)`.
    pub fn single_derivative(measure: Measure, c: f64, order: usize, lambda: f64) -> Result<Self, SobolevError> {
        let mut orders = BTreeMap::new();
        orders.insert(order, lambda);
        Self::new(measure, vec![DerivativePoint { c, orders }], None)
    }

    pub fn point_evaluation(measure: Measure, a: Vec<f64>, c: Vec<f64>) -> Result<Self, SobolevError> {
        Self::new(measure, Vec::new(), Some(PointTerms { a, c }))
    }

    /// `(N-1)`-st forward difference at `c` with step `delta`:
    /// `a_k = (-1)^k binom(N-1, k)`, `c_k = c + k delta`.
    pub fn difference(measure: Measure, n: usize, c: f64, delta: f64) -> Result<Self, SobolevError> {
        if n == 0 || delta == 0.0 {
            return Err(SobolevError::InvalidSpec("difference needs N >= 1 and delta != 0".into()));
        }
        let a = (0..n)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * binomial(n - 1, k))
            .collect();
        let c = (0..n).map(|k| c + k as f64 * delta).collect();
        Self::point_evaluation(measure, a, c)
    }

    /// [`SobolevSpec::difference`] divided by `delta^(N-1)`, so the point
    /// term tends to `lambda = 1` on `f^(N-1)(c)` as `delta -> 0`.
    pub fn scaled_difference(measure: Measure, n: usize, c: f64, delta: f64) -> Result<Self, SobolevError> {
        let mut spec = Self::difference(measure, n, c, delta)?;
        let scale = delta.powi(n as i32 - 1);
        if let Some(pt) = spec.point_terms.as_mut() {
            pt.a.iter_mut().for_each(|a| *a /= scale);
        }
        Ok(spec)
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn derivative_terms(&self) -> &[DerivativePoint] {
        &self.derivative_terms
    }

    pub fn point_terms(&self) -> Option<&PointTerms> {
        self.point_terms.as_ref()
    }

    /// Roots of the minimal `h` with multiplicities, in first-seen order.
    /// A derivative point of order `M_i` needs multiplicity `M_i + 1`, an
    /// evaluation point multiplicity one; coinciding points keep the larger.
    fn roots(&self) -> Vec<(f64, usize)> {
        let mut roots: Vec<(f64, usize)> = Vec::new();
        let mut add = |c: f64, m: usize| match roots.iter_mut().find(|r| r.0 == c) {
            Some(r) => r.1 = r.1.max(m),
            None => roots.push((c, m)),
        };
        for t in &self.derivative_terms {
            add(t.c, t.max_order() + 1);
        }
        if let Some(pt) = &self.point_terms {
            for &c in &pt.c {
                add(c, 1);
            }
        }
        roots
    }

    /// Band half-width `N = deg h`.
    pub fn n(&self) -> usize {
        self.roots().iter().map(|r| r.1).sum()
    }

    /// The matrix `L` of the point mass at the origin, for the basis of
    /// [`minimal_h`].
    pub fn l_matrix(&self) -> Result<DMatrix<f64>, SobolevError> {
        let n = self.n();
        let terms: Vec<DerivativeTerm> = self
            .derivative_terms
            .iter()
            .flat_map(|t| {
                t.orders.iter().map(move |(&order, &lambda)| DerivativeTerm {
                    c: t.c,
                    order,
                    lambda,
                })
            })
            .collect();
        let mut l = build_l_sobolev(n, &terms)?;
        if let Some(pt) = &self.point_terms {
            l += build_l_pointmass(n, &pt.a, &pt.c)?;
        }
        Ok(l)
    }

    pub fn matrix_measure(&self) -> Result<MatrixMeasure, SobolevError> {
        Ok(MatrixMeasure::new(self.measure.clone(), self.l_matrix()?)?)
    }

    /// Evaluates the discrete part of the form on a family of point
    /// functionals: returns the list of `(weight, functional)` pairs such
    /// that the discrete part equals `sum weight * F(p) * F(q)`.
    fn functionals(&self) -> Vec<(f64, Functional)> {
        let mut out = Vec::new();
        for t in &self.derivative_terms {
            for (&j, &lambda) in &t.orders {
                if lambda > 0.0 {
                    out.push((lambda, Functional::Derivative { c: t.c, order: j }));
                }
            }
        }
        if let Some(pt) = &self.point_terms {
            out.push((1.0, Functional::Combination(pt.clone())));
        }
        out
    }
}

enum Functional {
    Derivative { c: f64, order: usize },
    Combination(PointTerms),
}

impl Functional {
    fn apply(&self, p: &Polynomial) -> f64 {
        match self {
            Functional::Derivative { c, order } => p.derivative(*order).eval_real(*c).re,
            Functional::Combination(pt) => pt
                .a
                .iter()
                .zip(&pt.c)
                .map(|(a, &c)| a * p.eval_real(c).re)
                .sum(),
        }
    }

    /// Values of the functional on `q_0, ..., q_{len-1}`.
    fn on_basis(&self, tri: &Tridiagonal, mass: f64, len: usize) -> Vec<f64> {
        match self {
            Functional::Derivative { c, order } => basis_derivatives(tri, mass, *c, *order, len)
                .pop()
                .expect("order + 1 rows"),
            Functional::Combination(pt) => {
                let mut v = vec![0.0; len];
                for (&a, &c) in pt.a.iter().zip(&pt.c) {
                    let vals = basis_derivatives(tri, mass, c, 0, len).pop().expect("one row");
                    v.iter_mut().zip(vals).for_each(|(vi, q)| *vi += a * q);
                }
                v
            }
        }
    }
}

/// `q_k^(j)(c)` for `j = 0..=order` and `k < len`, from the differentiated
/// recurrence `a_{k+1} q_{k+1}^(j) = (x - b_k) q_k^(j) + j q_k^(j-1) - a_k q_{k-1}^(j)`.
fn basis_derivatives(tri: &Tridiagonal, mass: f64, c: f64, order: usize, len: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let mut row = vec![0.0; len];
        if len == 0 {
            rows.push(row);
            continue;
        }
        row[0] = if j == 0 { 1.0 / mass.sqrt() } else { 0.0 };
        for k in 0..len - 1 {
            let prev = if k > 0 { tri.a[k - 1] * row[k - 1] } else { 0.0 };
            let lower = if j > 0 { j as f64 * rows[j - 1][k] } else { 0.0 };
            row[k + 1] = ((c - tri.b[k]) * row[k] + lower - prev) / tri.a[k];
        }
        rows.push(row);
    }
    rows
}

/// `h(x) = prod (x - c_i)^(m_i)`, monic of degree `N`.
pub fn minimal_h(spec: &SobolevSpec) -> Polynomial {
    spec.roots()
        .iter()
        .fold(Polynomial::one(), |acc, &(c, m)| {
            (0..m).fold(acc, |p, _| &p * &Polynomial::linear_factor(c))
        })
}

/// The bilinear form evaluated directly on monomial-coefficient
/// polynomials (real part for complex input).
pub fn inner(spec: &SobolevSpec, p: &Polynomial, q: &Polynomial) -> Result<f64, SobolevError> {
    if p.is_zero() || q.is_zero() {
        return Ok(0.0);
    }
    let degree = (p.degree() + q.degree()) as usize;
    let nodes = spec.measure.quadrature(degree)?;
    let integral: f64 = nodes
        .iter()
        .map(|&(x, w)| w * (p.eval_real(x) * q.eval_real(x)).re)
        .sum();
    let discrete: f64 = spec
        .functionals()
        .iter()
        .map(|(w, f)| w * f.apply(p) * f.apply(q))
        .sum();
    Ok(integral + discrete)
}

/// Orthonormal polynomials `p_n = sum_k C[n][k] q_k` in the basis of
/// `mu`-orthonormal polynomials `q_k`, plus the Gram matrix of that basis
/// (large enough to also hold `h p_n`).
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevFamily {
    spec: SobolevSpec,
    tri: Tridiagonal,
    mass: f64,
    gram: DMatrix<f64>,
    coeffs: Vec<Vec<f64>>,
}

/// Orthonormal family of `count` polynomials (degrees `0..count`), with
/// positive leading coefficients.
pub fn orthonormal_family(spec: &SobolevSpec, count: usize) -> Result<SobolevFamily, SobolevError> {
    if count == 0 || count > MAX_DEGREE + 1 {
        return Err(SobolevError::DegreeCap { count });
    }
    let capacity = spec.measure.recurrence_capacity();
    if capacity < count {
        return Err(SobolevError::InsufficientMeasure {
            needed: count,
            available: capacity,
        });
    }
    let (tri, gram) = basis_gram(spec, capacity.min(count + spec.n()))?;
    let factor = cholesky_checked(gram.view((0, 0), (count, count)).into_owned())?;
    let inv = factor
        .solve_lower_triangular(&DMatrix::identity(count, count))
        .expect("Cholesky factor has a positive diagonal");
    let coeffs = (0..count)
        .map(|n| (0..=n).map(|k| inv[(n, k)]).collect())
        .collect();
    Ok(SobolevFamily {
        spec: spec.clone(),
        tri,
        mass: spec.measure.total_mass(),
        gram,
        coeffs,
    })
}

/// Recurrence of the `mu`-orthonormal basis and the Gram matrix of its
/// first `len` members under the full form.
fn basis_gram(spec: &SobolevSpec, len: usize) -> Result<(Tridiagonal, DMatrix<f64>), SobolevError> {
    let tri = spec.measure.recurrence(len)?;
    let mass = spec.measure.total_mass();
    let mut gram = DMatrix::identity(len, len);
    for (w, f) in spec.functionals() {
        let v = f.on_basis(&tri, mass, len);
        for i in 0..len {
            for j in 0..len {
                gram[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    Ok((tri, gram))
}

/// Cholesky factor `L` of `g = L L^T`, rejecting pivots that fall below
/// [`PIVOT_TOL`] times the leading pivot.
fn cholesky_checked(g: DMatrix<f64>) -> Result<DMatrix<f64>, SobolevError> {
    let n = g.nrows();
    let lead = g[(0, 0)];
    let Some(chol) = Cholesky::new(g) else {
        // locate the failing order for the message
        return Err(SobolevError::GramNotPD { degree: n - 1, ratio: 0.0 });
    };
    let l = chol.unpack();
    for k in 0..n {
        let ratio = l[(k, k)] * l[(k, k)] / lead;
        if !(ratio >= PIVOT_TOL) {
            return Err(SobolevError::GramNotPD { degree: k, ratio });
        }
    }
    Ok(l)
}

/// `orthonormal_family(..).polynomials()`.
pub fn orthonormalize(spec: &SobolevSpec, count: usize) -> Result<Vec<Polynomial>, SobolevError> {
    Ok(orthonormal_family(spec, count)?.polynomials())
}

/// Orthonormalization from the monomial Gram matrix `<x^i, x^j>`. Only
/// usable at low degree; kept as an independent path to cross-check
/// [`orthonormal_family`].
pub fn orthonormalize_monomial(spec: &SobolevSpec, count: usize) -> Result<Vec<Polynomial>, SobolevError> {
    if count == 0 || count > MAX_DEGREE + 1 {
        return Err(SobolevError::DegreeCap { count });
    }
    let one = Complex64::new(1.0, 0.0);
    let mono: Vec<Polynomial> = (0..count).map(|k| Polynomial::monomial(k, one)).collect();
    let mut g = DMatrix::zeros(count, count);
    for i in 0..count {
        for j in 0..=i {
            let v = inner(spec, &mono[i], &mono[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let l = cholesky_checked(g)?;
    let inv = l
        .solve_lower_triangular(&DMatrix::identity(count, count))
        .expect("Cholesky factor has a positive diagonal");
    Ok((0..count)
        .map(|n| Polynomial::new((0..=n).map(|k| Complex64::new(inv[(n, k)], 0.0)).collect()))
        .collect())
}

impl SobolevFamily {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients of `p_n` in the `mu`-orthonormal basis.
    pub fn coefficients(&self, n: usize) -> &[f64] {
        &self.coeffs[n]
    }

    /// Monomial coefficients of `q_0, ..., q_{len-1}`.
    pub fn basis_polynomials(&self, len: usize) -> Vec<Polynomial> {
        let x = Polynomial::from_real(&[0.0, 1.0]);
        let mut q = vec![Polynomial::from_real(&[1.0 / self.mass.sqrt()])];
        for k in 0..len.saturating_sub(1) {
            let mut next = &(&x - &Polynomial::from_real(&[self.tri.b[k]])) * &q[k];
            if k > 0 {
                next = &next - &q[k - 1].scale(Complex64::new(self.tri.a[k - 1], 0.0));
            }
            q.push(next.scale(Complex64::new(1.0 / self.tri.a[k], 0.0)));
        }
        q.truncate(len);
        q
    }

    /// The family in monomial form.
    pub fn polynomials(&self) -> Vec<Polynomial> {
        let q = self.basis_polynomials(self.len());
        self.coeffs
            .iter()
            .map(|row| {
                let mut acc = vec![Complex64::new(0.0, 0.0); row.len()];
                for (k, &ck) in row.iter().enumerate() {
                    for (i, &qi) in q[k].coeffs().iter().enumerate() {
                        acc[i] += qi * ck;
                    }
                }
                Polynomial::new(acc)
            })
            .collect()
    }

    /// Gram matrix `<p_n, p_m>` of the family.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| form(&self.gram, &self.coeffs[i], &self.coeffs[j]))
    }

    /// `H[n][m] = <h p_n, p_m>`.
    pub fn multiplication_matrix(&self, h: &Polynomial) -> Result<DMatrix<f64>, SobolevError> {
        if !h.is_real(1e-14) {
            return Err(SobolevError::ComplexH);
        }
        let hc: Vec<f64> = h.coeffs().iter().map(|c| c.re).collect();
        let needed = self.len() + h.degree().max(0) as usize;
        let available = self.spec.measure.recurrence_capacity();
        if available < needed {
            return Err(SobolevError::InsufficientMeasure { needed, available });
        }
        let (tri, gram) = if self.gram.nrows() >= needed {
            (self.tri.clone(), self.gram.clone())
        } else {
            basis_gram(&self.spec, needed)?
        };
        let hp: Vec<Vec<f64>> = self.coeffs.iter().map(|u| times_poly(&tri, &hc, u)).collect();
        let n = self.len();
        Ok(DMatrix::from_fn(n, n, |i, j| form(&gram, &hp[i], &self.coeffs[j])))
    }

    /// Recurrence coefficients `c_{n,0} = <h p_n, p_n>`,
    /// `c_{n,k} = <h p_n, p_{n-k}>`, after checking that `<h p_n, p_m>`
    /// vanishes outside the band.
    pub fn extract_recurrence(&self, h: &Polynomial) -> Result<RecurrenceSystem, SobolevError> {
        let hm = self.multiplication_matrix(h)?;
        system_from_products(&hm, h, self.polynomials())
    }
}

/// `u^T g v` for coefficient vectors in the `mu`-orthonormal basis.
fn form(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0.0 {
            continue;
        }
        for (j, &vj) in v.iter().enumerate() {
            s += ui * g[(i, j)] * vj;
        }
    }
    s
}

/// `x * u` in the `mu`-orthonormal basis.
fn times_x(tri: &Tridiagonal, u: &[f64]) -> Vec<f64> {
    let (a, b) = (&tri.a, &tri.b);
    let mut out = vec![0.0; u.len() + 1];
    for (k, &uk) in u.iter().enumerate() {
        out[k] += b[k] * uk;
        out[k + 1] += a[k] * uk;
        if k > 0 {
            out[k - 1] += a[k - 1] * uk;
        }
    }
    out
}

/// `h(x) * u` by Horner's scheme in the `mu`-orthonormal basis.
fn times_poly(tri: &Tridiagonal, h: &[f64], u: &[f64]) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    for &hc in h.iter().rev() {
        if !acc.is_empty() {
            acc = times_x(tri, &acc);
        }
        if acc.len() < u.len() {
            acc.resize(u.len(), 0.0);
        }
        acc.iter_mut().zip(u).for_each(|(r, &ui)| *r += hc * ui);
    }
    acc
}

/// [`SobolevFamily::extract_recurrence`] for a family given in monomial
/// form, with every product evaluated by [`inner`].
pub fn extract_recurrence(spec: &SobolevSpec, p: &[Polynomial], h: &Polynomial) -> Result<RecurrenceSystem, SobolevError> {
    if !h.is_real(1e-14) {
        return Err(SobolevError::ComplexH);
    }
    let count = p.len();
    let mut hm = DMatrix::zeros(count, count);
    for i in 0..count {
        let hp = h * &p[i];
        for j in 0..count {
            hm[(i, j)] = inner(spec, &hp, &p[j])?;
        }
    }
    system_from_products(&hm, h, p.to_vec())
}

fn system_from_products(hm: &DMatrix<f64>, h: &Polynomial, p: Vec<Polynomial>) -> Result<RecurrenceSystem, SobolevError> {
    let width = h.degree().max(0) as usize;
    let count = hm.nrows();
    if count < width {
        return Err(SobolevError::TooFewPolynomials {
            needed: width,
            got: count,
        });
    }
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..count {
        for j in 0..count {
            if i.abs_diff(j) > width {
                let v = hm[(i, j)].abs();
                if v > BAND_TOL && worst.is_none_or(|w| v > w.2) {
                    worst = Some((i, j, v));
                }
            }
        }
    }
    if let Some((n, m, value)) = worst {
        return Err(SobolevError::BandViolation { n, m, value, width });
    }
    let c0 = (0..count).map(|n| hm[(n, n)]).collect();
    let c = (1..=width)
        .map(|k| {
            (0..count)
                .map(|n| Complex64::new(if n >= k { hm[(n, n - k)] } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let initial = p.into_iter().take(width).collect();
    Ok(RecurrenceSystem::new(h.clone(), c0, c, initial)?)
}
