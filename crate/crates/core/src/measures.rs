//! Positive measures on the real line, Gaussian quadrature, and the matrix of
//! measures `dM_{k,l}(x) = x^{k+l} dmu(x)` pushed forward through `h` with a
//! matrix point mass `L` at the origin.
//!
//! `M` is never stored: every integral against it is reduced to scalar
//! quadrature against `mu`, and the pushforward is realized by substituting
//! `h(x)` into the integrand.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hbasis::HBasis;
use crate::jacobi::Tridiagonal;
use crate::linalg::{cre, CMatrix};
use crate::matpoly::MatrixPolynomial;
use crate::poly::falling_factorial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("integrand degree {degree} needs {needed} quadrature nodes, only {available} available")]
    DegreeExceedsQuadrature {
        degree: usize,
        needed: usize,
        available: usize,
    },
    #[error("support has {distinct} distinct points, cannot produce {count} recurrence coefficients")]
    RankDeficient { distinct: usize, count: usize },
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("derivative order {order} is outside 1..={max}")]
    IndexOutOfRange { order: usize, max: usize },
    #[error("matrix L is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotSemidefinite(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// A positive measure, either finitely supported or described by the
/// three-term recurrence of its orthonormal polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureWire", into = "MeasureWire")]
pub enum Measure {
    Discrete(Vec<(f64, f64)>),
    Recurrence { tri: Tridiagonal, mass: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MeasureWire {
    Support(Vec<(f64, f64)>),
    Recurrence {
        a: Vec<f64>,
        b: Vec<f64>,
        #[serde(default = "unit_mass")]
        mass: f64,
    },
}

fn unit_mass() -> f64 {
    1.0
}

impl TryFrom<MeasureWire> for Measure {
    type Error = MeasureError;
    fn try_from(w: MeasureWire) -> Result<Self, MeasureError> {
        match w {
            MeasureWire::Support(points) => Measure::discrete(points),
            MeasureWire::Recurrence { a, b, mass } => {
                Measure::from_recurrence(Tridiagonal::new(a, b), mass)
            }
        }
    }
}

impl From<Measure> for MeasureWire {
    fn from(m: Measure) -> Self {
        match m {
            Measure::Discrete(points) => MeasureWire::Support(points),
            Measure::Recurrence { tri, mass } => MeasureWire::Recurrence {
                a: tri.a,
                b: tri.b,
                mass,
            },
        }
    }
}

impl Measure {
    pub fn discrete(points: Vec<(f64, f64)>) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::Invalid("empty support".into()));
        }
        if let Some(&(x, w)) = points
            .iter()
            .find(|(x, w)| !(x.is_finite() && w.is_finite() && *w > 0.0))
        {
            return Err(MeasureError::Invalid(format!(
                "support point ({x}, {w}) needs a finite location and positive weight"
            )));
        }
        Ok(Measure::Discrete(points))
    }

    pub fn from_recurrence(tri: Tridiagonal, mass: f64) -> Result<Self, MeasureError> {
        if tri.b.is_empty() {
            return Err(MeasureError::Invalid("no recurrence coefficients".into()));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(MeasureError::Invalid(format!("mass {mass} must be positive")));
        }
        if tri.a.iter().any(|&a| !(a > 0.0)) || tri.b.iter().any(|b| !b.is_finite()) {
            return Err(MeasureError::Invalid(
                "recurrence needs a_n > 0 and finite b_n".into(),
            ));
        }
        Ok(Measure::Recurrence { tri, mass })
    }

    /// Normalized arcsine measure on `[-1, 1]` with `len` recurrence terms.
    pub fn chebyshev(len: usize) -> Self {
        Measure::Recurrence {
            tri: Tridiagonal::chebyshev(len),
            mass: 1.0,
        }
    }

    /// Uniform probability measure on `[-1, 1]` with `len` recurrence terms.
    pub fn legendre(len: usize) -> Self {
        Measure::Recurrence {
            tri: Tridiagonal::legendre(len),
            mass: 1.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Discrete(points) => points.iter().map(|p| p.1).sum(),
            Measure::Recurrence { mass, .. } => *mass,
        }
    }

    /// Largest number of orthonormal polynomials the measure determines.
    pub fn recurrence_capacity(&self) -> usize {
        match self {
            Measure::Discrete(points) => distinct_count(points),
            Measure::Recurrence { tri, .. } => tri.len(),
        }
    }

    /// Recurrence coefficients for the first `count` orthonormal
    /// polynomials.
    pub fn recurrence(&self, count: usize) -> Result<Tridiagonal, MeasureError> {
        match self {
            Measure::Discrete(points) => stieltjes(points, count),
            Measure::Recurrence { tri, .. } => {
                if count > tri.len() {
                    return Err(MeasureError::RankDeficient {
                        distinct: tri.len(),
                        count,
                    });
                }
                Ok(tri.truncated(count))
            }
        }
    }

    /// `q`-point Gauss rule, sorted by node.
    pub fn gauss_nodes(&self, q: usize) -> Result<Vec<(f64, f64)>, MeasureError> {
        let tri = self.recurrence(q)?;
        Ok(golub_welsch(&tri, q, self.total_mass()))
    }

    /// Nodes and weights integrating every polynomial of degree `<= degree`
    /// exactly (the support itself for discrete measures).
    pub fn quadrature(&self, degree: usize) -> Result<Vec<(f64, f64)>, MeasureError> {
        match self {
            Measure::Discrete(points) => Ok(points.clone()),
            Measure::Recurrence { tri, mass } => {
                let needed = degree / 2 + 1;
                if needed > tri.len() {
                    return Err(MeasureError::DegreeExceedsQuadrature {
                        degree,
                        needed,
                        available: tri.len(),
                    });
                }
                Ok(golub_welsch(tri, needed, *mass))
            }
        }
    }

    /// `∫ x^k dmu`
    pub fn moment(&self, k: usize) -> Result<f64, MeasureError> {
        Ok(self
            .quadrature(k)?
            .iter()
            .map(|&(x, w)| w * x.powi(k as i32))
            .sum())
    }
}

fn distinct_count(points: &[(f64, f64)]) -> usize {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.len()
}

/// Gauss nodes and weights from the eigen-decomposition of the `q × q`
/// Jacobi matrix; weights are `mass * (first eigenvector component)^2`.
pub fn golub_welsch(tri: &Tridiagonal, q: usize, mass: f64) -> Vec<(f64, f64)> {
    let eig = SymmetricEigen::new(tri.to_dense(q));
    let mut nodes: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

/// Recurrence coefficients of the orthonormal polynomials of a discrete
/// measure, by the Lanczos process on `diag(x)` started from `sqrt(w)`,
/// with full reorthogonalization.
pub fn stieltjes(support: &[(f64, f64)], count: usize) -> Result<Tridiagonal, MeasureError> {
    let distinct = distinct_count(support);
    if count > distinct || count == 0 {
        return Err(MeasureError::RankDeficient { distinct, count });
    }
    let s = support.len();
    let xs: Vec<f64> = support.iter().map(|p| p.0).collect();
    let mut v: Vec<f64> = support.iter().map(|p| p.1.sqrt()).collect();
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    v.iter_mut().for_each(|t| *t /= norm);

    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut a = Vec::with_capacity(count.saturating_sub(1));
    let mut b = Vec::with_capacity(count);
    for k in 0..count {
        let vk = &basis[k];
        let mut w: Vec<f64> = (0..s).map(|i| xs[i] * vk[i]).collect();
        b.push(dot(&w, vk));
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(&w, q);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= proj * qi);
            }
        }
        if k + 1 == count {
            break;
        }
        let beta = dot(&w, &w).sqrt();
        let scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        if beta <= 1e-14 * scale {
            return Err(MeasureError::RankDeficient { distinct, count });
        }
        a.push(beta);
        w.iter_mut().for_each(|t| *t /= beta);
        basis.push(w);
    }
    Ok(Tridiagonal::new(a, b))
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// A derivative term `lambda * f^(order)(c) g^(order)(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTerm {
    pub c: f64,
    pub order: usize,
    pub lambda: f64,
}

/// `L = sum lambda L(c, j)` with
/// `L_{k,n}(c, j) = k! n! / ((k-j)! (n-j)!) c^(n+k-2j)` for `j <= k, n < N`.
pub fn build_l_sobolev(n: usize, terms: &[DerivativeTerm]) -> Result<DMatrix<f64>, MeasureError> {
    let mut l = DMatrix::zeros(n, n);
    for t in terms {
        if t.order == 0 || t.order >= n {
            return Err(MeasureError::IndexOutOfRange {
                order: t.order,
                max: n.saturating_sub(1),
            });
        }
        if !(t.lambda >= 0.0) {
            return Err(MeasureError::Invalid(format!("lambda {} must be >= 0", t.lambda)));
        }
        let j = t.order;
        let v: Vec<f64> = (0..n)
            .map(|k| falling_factorial(k, j) * t.c.powi(k.saturating_sub(j) as i32))
            .collect();
        for k in j..n {
            for m in j..n {
                l[(k, m)] += t.lambda * v[k] * v[m];
            }
        }
    }
    Ok(l)
}

/// Rank-one `L = v v^T` with `v_k = sum_j a_j c_j^k`.
pub fn build_l_pointmass(n: usize, a: &[f64], c: &[f64]) -> Result<DMatrix<f64>, MeasureError> {
    if a.len() != c.len() {
        return Err(MeasureError::DimensionMismatch(format!(
            "{} weights for {} points",
            a.len(),
            c.len()
        )));
    }
    let v: Vec<f64> = (0..n)
        .map(|k| a.iter().zip(c).map(|(aj, cj)| aj * cj.powi(k as i32)).sum())
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| v[i] * v[j]))
}

/// `M(h^{-1}) + L delta_0` for `dM_{k,l} = x^{k+l} dmu`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMeasure {
    base: Measure,
    l: DMatrix<f64>,
}

/// Semidefiniteness slack for `L`, relative to its trace.
pub const PSD_TOL: f64 = 1e-12;

impl MatrixMeasure {
    pub fn new(base: Measure, l: DMatrix<f64>) -> Result<Self, MeasureError> {
        if l.nrows() != l.ncols() || l.nrows() == 0 {
            return Err(MeasureError::DimensionMismatch("L must be square and non-empty".into()));
        }
        if (&l - l.transpose()).abs().max() > PSD_TOL * l.abs().max().max(1.0) {
            return Err(MeasureError::Invalid("L must be symmetric".into()));
        }
        let min = smallest_eigenvalue(&l);
        if min < -PSD_TOL * l.trace().max(0.0) {
            return Err(MeasureError::NotSemidefinite(min));
        }
        Ok(Self { base, l })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }
}

pub fn smallest_eigenvalue(l: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(l.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `∫ P_n(h(x)) dM(x) P_m(h(x))^* + P_n(0) L P_m(0)^*`.
///
/// Entry `(i, j)` of the integral part is
/// `sum_{k,l} ∫ P_{n,i,k}(h(x)) x^(k+l) conj(P_{m,j,l}(h(x))) dmu(x)`, evaluated
/// as `∫ v_i(x) conj(w_j(x)) dmu` with `v(x) = P_n(h(x)) (1, x, ..., x^{N-1})^T`.
pub fn matrix_inner(
    pn: &MatrixPolynomial,
    pm: &MatrixPolynomial,
    mm: &MatrixMeasure,
    basis: &HBasis,
) -> Result<CMatrix, MeasureError> {
    let n = basis.n();
    if pn.n() != n || pm.n() != n || mm.n() != n {
        return Err(MeasureError::DimensionMismatch(
            "matrix polynomials, L and h must agree on N".into(),
        ));
    }
    let deg = |p: &MatrixPolynomial| (p.degree().max(0) as usize) * n + n - 1;
    let nodes = mm.base.quadrature(deg(pn) + deg(pm))?;
    let h = basis.h();
    let mut out = CMatrix::zeros(n, n);
    for &(x, w) in &nodes {
        let t = h.eval_real(x);
        let vn = stacked_values(&pn.eval(t), x);
        let vm = stacked_values(&pm.eval(t), x);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += vn[i] * vm[j].conj() * w;
            }
        }
    }
    let l = mm.l.map(cre);
    out += pn.eval(cre(0.0)) * l * pm.eval(cre(0.0)).adjoint();
    Ok(out)
}

fn stacked_values(p_at_t: &CMatrix, x: f64) -> Vec<Complex64> {
    let n = p_at_t.nrows();
    (0..n)
        .map(|i| {
            (0..n)
                .rev()
                .fold(cre(0.0), |acc, k| acc * x + p_at_t[(i, k)])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> Measure {
        Measure::discrete(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn dirac_at_zero_moments() {
        let mu = Measure::discrete(vec![(0.0, 1.0)]).unwrap();
        assert_eq!(mu.moment(0).unwrap(), 1.0);
        for k in 1..5 {
            assert_eq!(mu.moment(k).unwrap(), 0.0);
        }
    }

    #[test]
    fn chebyshev_moments() {
        let mu = Measure::chebyshev(10);
        assert!(mu.moment(1).unwrap().abs() < 1e-15);
        assert!((mu.moment(2).unwrap() - 0.5).abs() < 1e-15);
        // ∫ x^4 of the arcsine law = 3/8
        assert!((mu.moment(4).unwrap() - 0.375).abs() < 1e-15);
        assert!(matches!(
            Measure::chebyshev(3).moment(6),
            Err(MeasureError::DegreeExceedsQuadrature { needed: 4, .. })
        ));
    }

    #[test]
    fn gauss_rules() {
        let mu = Measure::chebyshev(10);
        let one = mu.gauss_nodes(1).unwrap();
        assert_eq!(one, vec![(0.0, 1.0)]);
        let two = mu.gauss_nodes(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((two[0].0 + r).abs() < 1e-15 && (two[1].0 - r).abs() < 1e-15);
        assert!((two[0].1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_recovers_discrete_support() {
        let pts = vec![(-0.9, 0.1), (-0.2, 0.4), (0.3, 0.25), (1.7, 0.05)];
        let mu = Measure::discrete(pts.clone()).unwrap();
        let nodes = mu.gauss_nodes(4).unwrap();
        for (got, want) in nodes.iter().zip(&pts) {
            assert!((got.0 - want.0).abs() < 1e-13);
            assert!((got.1 - want.1).abs() < 1e-13);
        }
    }

    #[test]
    fn stieltjes_examples() {
        let single = stieltjes(&[(0.75, 2.0)], 1).unwrap();
        assert_eq!(single.b, vec![0.75]);
        let tri = stieltjes(&[(-1.0, 0.5), (1.0, 0.5)], 2).unwrap();
        assert!(tri.b[0].abs() < 1e-15);
        assert!((tri.a[0] - 1.0).abs() < 1e-15);
        assert!(matches!(
            stieltjes(&[(0.0, 1.0), (0.0, 1.0)], 2),
            Err(MeasureError::RankDeficient { distinct: 1, count: 2 })
        ));
    }

    #[test]
    fn stieltjes_on_chebyshev_extrema() {
        // 64 points cos(pi k / 63) with uniform weights; the discrete measure
        // matches the arcsine law on low-degree polynomials.
        let m = 64;
        let pts: Vec<(f64, f64)> = (0..m)
            .map(|k| ((std::f64::consts::PI * k as f64 / (m - 1) as f64).cos(), 1.0 / m as f64))
            .collect();
        let tri = stieltjes(&pts, 20).unwrap();
        for &a in &tri.a[3..15] {
            assert!((a - 0.5).abs() < 0.02, "a = {a}");
        }
        assert!(tri.b.iter().all(|b| b.abs() < 1e-12));
    }

    #[test]
    fn two_point_moments_exact() {
        let mu = two_point();
        for k in 0..8 {
            let expect = if k % 2 == 0 { 1.0 } else { 0.0 };
            assert_eq!(mu.moment(k).unwrap(), expect);
        }
    }

    #[test]
    fn l_sobolev_examples() {
        let l = build_l_sobolev(2, &[DerivativeTerm { c: 0.3, order: 1, lambda: 2.5 }]).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.5]));
        let zero = build_l_sobolev(3, &[DerivativeTerm { c: 1.0, order: 1, lambda: 0.0 }]).unwrap();
        assert_eq!(zero, DMatrix::zeros(3, 3));
        let l3 = build_l_sobolev(3, &[DerivativeTerm { c: 1.0, order: 1, lambda: 1.0 }]).unwrap();
        assert_eq!(l3[(1, 2)], 2.0);
        assert_eq!(l3[(2, 2)], 4.0);
        assert!(matches!(
            build_l_sobolev(2, &[DerivativeTerm { c: 0.0, order: 2, lambda: 1.0 }]),
            Err(MeasureError::IndexOutOfRange { order: 2, max: 1 })
        ));
    }

    #[test]
    fn l_pointmass_examples() {
        let delta = 0.3;
        let l = build_l_pointmass(2, &[1.0, -1.0], &[0.0, delta]).unwrap();
        assert_eq!(l[(0, 0)], 0.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l[(1, 1)] - delta * delta).abs() < 1e-16);
        let zero = build_l_pointmass(3, &[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(zero, DMatrix::zeros(3, 3));
        let classical = build_l_pointmass(1, &[1.5], &[0.4]).unwrap();
        assert_eq!(classical[(0, 0)], 2.25);
    }

    #[test]
    fn matrix_measure_rejects_indefinite() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            MatrixMeasure::new(Measure::chebyshev(4), l),
            Err(MeasureError::NotSemidefinite(_))
        ));
    }

    #[test]
    fn matrix_inner_scalar_reduction() {
        let basis = HBasis::monomial(1).unwrap();
        let mm = MatrixMeasure::new(Measure::chebyshev(10), DMatrix::zeros(1, 1)).unwrap();
        let p = MatrixPolynomial::new(1, vec![CMatrix::from_element(1, 1, cre(0.0)), CMatrix::from_element(1, 1, cre(2f64.sqrt()))]);
        let g = matrix_inner(&p, &p, &mm, &basis).unwrap();
        assert!((g[(0, 0)] - cre(1.0)).norm() < 1e-14);
        let one = MatrixPolynomial::identity(1);
        assert!(matrix_inner(&p, &one, &mm, &basis).unwrap()[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn matrix_inner_pure_point_mass() {
        // mu = tiny mass far away would still contribute; use a measure whose
        // integrals vanish on these polynomials instead: delta at a root of h.
        let basis = HBasis::new(crate::Polynomial::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        let mm = MatrixMeasure::new(
            Measure::discrete(vec![(1.0, 1e-300)]).unwrap(),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let p = MatrixPolynomial::new(
            2,
            vec![
                CMatrix::from_row_slice(2, 2, &[cre(1.0), cre(0.0), cre(0.5), cre(2.0)]),
                CMatrix::from_row_slice(2, 2, &[cre(0.3), cre(0.0), cre(1.0), cre(-1.0)]),
            ],
        );
        let g = matrix_inner(&p, &p, &mm, &basis).unwrap();
        let p0 = p.eval(cre(0.0));
        let expect = &p0 * p0.adjoint();
        assert!(crate::linalg::frobenius(&(g - expect)) < 1e-12);
    }
}
