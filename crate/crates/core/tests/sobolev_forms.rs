mod common;

use common::random_matrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use ortho_block::linalg::{cre, frobenius, CMatrix};
use ortho_block::matpoly::{scalars_to_matrices, MatrixPolynomial};
use ortho_block::measures::{build_l_pointmass, build_l_sobolev, matrix_inner, DerivativeTerm};
use ortho_block::sobolev::{
    inner, minimal_h, orthonormal_family, orthonormalize, orthonormalize_monomial, DerivativePoint, PointTerms,
    SobolevFamily,
};
use ortho_block::{HBasis, MatrixMeasure, Measure, Polynomial, SobolevSpec, Tridiagonal};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn derivative_point(c: f64, orders: &[(usize, f64)]) -> DerivativePoint {
    DerivativePoint {
        c,
        orders: orders.iter().copied().collect::<BTreeMap<_, _>>(),
    }
}

fn reference_specs() -> Vec<(&'static str, SobolevSpec)> {
    vec![
        (
            "chebyshev, first derivative at 0",
            SobolevSpec::single_derivative(Measure::chebyshev(90), 0.0, 1, 1.0).unwrap(),
        ),
        (
            "legendre, two orders at 1/2",
            SobolevSpec::new(Measure::legendre(90), vec![derivative_point(0.5, &[(1, 0.5), (2, 0.25)])], None)
                .unwrap(),
        ),
        (
            "legendre, evaluations at 0 and 1",
            SobolevSpec::point_evaluation(Measure::legendre(90), vec![1.0, -1.0], vec![0.0, 1.0]).unwrap(),
        ),
        (
            "chebyshev, derivative plus evaluation",
            SobolevSpec::new(
                Measure::chebyshev(90),
                vec![derivative_point(-0.5, &[(1, 1.0)])],
                Some(PointTerms { a: vec![2.0], c: vec![0.5] }),
            )
            .unwrap(),
        ),
        (
            "legendre, two derivative points",
            SobolevSpec::new(
                Measure::legendre(90),
                vec![derivative_point(-0.3, &[(1, 1.0)]), derivative_point(0.6, &[(1, 0.5), (2, 2.0)])],
                None,
            )
            .unwrap(),
        ),
    ]
}

/// Taylor coefficients `q_k(x0 + t) = sum_j T[k][j] t^j` up to `t^order`,
/// carried through the three-term recurrence as truncated power series.
fn basis_jets(tri: &Tridiagonal, mass: f64, x0: f64, order: usize, len: usize) -> Vec<Vec<f64>> {
    let mut jets = vec![vec![0.0; order + 1]; len];
    jets[0][0] = 1.0 / mass.sqrt();
    for k in 0..len - 1 {
        let mut next = vec![0.0; order + 1];
        for j in 0..=order {
            next[j] += (x0 - tri.b[k]) * jets[k][j];
            if j > 0 {
                next[j] += jets[k][j - 1];
            }
            if k > 0 {
                next[j] -= tri.a[k - 1] * jets[k - 1][j];
            }
        }
        jets[k + 1] = next.into_iter().map(|v| v / tri.a[k]).collect();
    }
    jets
}

/// Independent evaluation of the form for a family given in the basis of
/// `mu`-orthonormal polynomials: Gauss quadrature for the integral, Taylor
/// jets for every point functional.
struct FormOracle {
    nodes: Vec<(f64, f64)>,
    node_values: Vec<Vec<f64>>,
    h: Polynomial,
    derivative_terms: Vec<(f64, usize, f64)>,
    point_terms: Vec<(f64, f64)>,
    tri: Tridiagonal,
    mass: f64,
    len: usize,
}

fn factorial(j: usize) -> f64 {
    (1..=j).map(|i| i as f64).product()
}

impl FormOracle {
    fn new(spec: &SobolevSpec, len: usize) -> Self {
        let mu = spec.measure();
        let tri = mu.recurrence(len).unwrap();
        let mass = mu.total_mass();
        let h = minimal_h(spec);
        let nodes = mu.quadrature(2 * len + h.degree() as usize).unwrap();
        let node_values = nodes
            .iter()
            .map(|&(x, _)| basis_jets(&tri, mass, x, 0, len).into_iter().map(|j| j[0]).collect())
            .collect();
        let derivative_terms = spec
            .derivative_terms()
            .iter()
            .flat_map(|t| t.orders.iter().map(move |(&j, &l)| (t.c, j, l)))
            .collect();
        let point_terms = spec
            .point_terms()
            .map(|p| p.a.iter().copied().zip(p.c.iter().copied()).collect())
            .unwrap_or_default();
        FormOracle { nodes, node_values, h, derivative_terms, point_terms, tri, mass, len }
    }

    /// Taylor coefficients at `x0` of `sum_k coeffs[k] q_k`, optionally times `h`.
    fn taylor(&self, coeffs: &[f64], x0: f64, order: usize, with_h: bool) -> Vec<f64> {
        let jets = basis_jets(&self.tri, self.mass, x0, order, self.len);
        let mut t = vec![0.0; order + 1];
        for (c, jet) in coeffs.iter().zip(&jets) {
            t.iter_mut().zip(jet).for_each(|(ti, ji)| *ti += c * ji);
        }
        if !with_h {
            return t;
        }
        let ht: Vec<f64> = (0..=order)
            .map(|i| self.h.derivative(i).eval_real(x0).re / factorial(i))
            .collect();
        (0..=order).map(|j| (0..=j).map(|i| ht[i] * t[j - i]).sum()).collect()
    }

    /// `<h^a p, q>` for `p, q` given by basis coefficients (`a` is 0 or 1).
    fn form(&self, p: &[f64], q: &[f64], times_h: bool) -> f64 {
        let mut total = 0.0;
        for (&(x, w), vals) in self.nodes.iter().zip(&self.node_values) {
            let pv: f64 = p.iter().zip(vals).map(|(c, v)| c * v).sum();
            let qv: f64 = q.iter().zip(vals).map(|(c, v)| c * v).sum();
            let hx = if times_h { self.h.eval_real(x).re } else { 1.0 };
            total += w * hx * pv * qv;
        }
        for &(c, j, lambda) in &self.derivative_terms {
            let dp = self.taylor(p, c, j, times_h)[j] * factorial(j);
            let dq = self.taylor(q, c, j, false)[j] * factorial(j);
            total += lambda * dp * dq;
        }
        if !self.point_terms.is_empty() {
            let fp: f64 = self.point_terms.iter().map(|&(a, c)| a * self.taylor(p, c, 0, times_h)[0]).sum();
            let fq: f64 = self.point_terms.iter().map(|&(a, c)| a * self.taylor(q, c, 0, false)[0]).sum();
            total += fp * fq;
        }
        total
    }
}

fn padded(family: &SobolevFamily, n: usize, len: usize) -> Vec<f64> {
    let mut v = family.coefficients(n).to_vec();
    v.resize(len, 0.0);
    v
}

#[test]
fn orthonormal_and_banded_up_to_thirty() {
    for (name, spec) in reference_specs() {
        let count = 31;
        let family = orthonormal_family(&spec, count).unwrap();
        let big_n = spec.n();
        let oracle = FormOracle::new(&spec, count);
        let rows: Vec<Vec<f64>> = (0..count).map(|n| padded(&family, n, count)).collect();
        let (mut gram_err, mut band_err): (f64, f64) = (0.0, 0.0);
        for n in 0..count {
            for m in 0..count {
                let target = if n == m { 1.0 } else { 0.0 };
                gram_err = gram_err.max((oracle.form(&rows[n], &rows[m], false) - target).abs());
                if n.abs_diff(m) > big_n {
                    band_err = band_err.max(oracle.form(&rows[n], &rows[m], true).abs());
                }
            }
        }
        assert!(gram_err <= 1e-9, "{name}: gram {gram_err:e}");
        assert!(band_err <= 1e-9, "{name}: band {band_err:e}");
    }
}

#[test]
fn extracted_recurrence_matches_oracle_inner_products() {
    for (name, spec) in reference_specs() {
        let count = 25;
        let h = minimal_h(&spec);
        let big_n = spec.n();
        let family = orthonormal_family(&spec, count).unwrap();
        let sys = family.extract_recurrence(&h).unwrap();
        let len = count + big_n;
        let oracle = FormOracle::new(&spec, len);
        for n in 0..count {
            let pn = padded(&family, n, len);
            for k in 0..=big_n.min(n) {
                let expected = oracle.form(&pn, &padded(&family, n - k, len), true);
                let got = sys.coeff(n, k).unwrap();
                assert!((got.re - expected).abs() <= 1e-9 && got.im == 0.0, "{name}: c_({n},{k})");
            }
            if n >= big_n {
                assert!(sys.coeff(n, big_n).unwrap().norm() > 1e-6, "{name}: c_({n},N)");
            }
        }
    }
}

#[test]
fn multiplication_by_h_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (name, spec) in reference_specs() {
        let h = minimal_h(&spec);
        for _ in 0..20 {
            let dp = rng.gen_range(0..=25);
            let dq = rng.gen_range(0..=25);
            let p = Polynomial::from_real(&(0..=dp).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            let q = Polynomial::from_real(&(0..=dq).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
            let lhs = inner(&spec, &(&h * &p), &q).unwrap();
            let rhs = inner(&spec, &p, &(&h * &q)).unwrap();
            let pq = inner(&spec, &p, &q).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + pq.abs()), "{name}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn lower_degree_h_breaks_the_band() {
    for (name, spec) in reference_specs() {
        let h = minimal_h(&spec);
        let (trial, _) = h.divmod(&Polynomial::linear_factor(spec.derivative_terms().first().map_or(0.0, |t| t.c))).unwrap();
        let family = orthonormal_family(&spec, 20).unwrap();
        assert!(family.extract_recurrence(&trial).is_err(), "{name}");
    }
}

#[test]
fn gram_paths_agree_at_low_degree() {
    for (name, spec) in reference_specs() {
        let stable = orthonormalize(&spec, 11).unwrap();
        let monomial = orthonormalize_monomial(&spec, 11).unwrap();
        for (a, b) in stable.iter().zip(&monomial) {
            assert!(a.max_abs_diff(b) <= 1e-8 * a.max_abs(), "{name}");
        }
    }
}

#[test]
fn matrix_orthonormality_end_to_end() {
    for (name, spec) in reference_specs() {
        let big_n = spec.n();
        // Monomial coefficients and the h-basis split both lose accuracy with
        // degree when the roots of h sit away from the origin; stay below 16.
        let blocks = 16 / big_n;
        let h = minimal_h(&spec);
        let basis = HBasis::new(h).unwrap();
        let family = orthonormal_family(&spec, blocks * big_n).unwrap();
        let mats = scalars_to_matrices(&family.polynomials(), &basis).unwrap();
        let mm = spec.matrix_measure().unwrap();
        for n in 0..mats.len() {
            for m in 0..mats.len() {
                let g = matrix_inner(&mats[n], &mats[m], &mm, &basis).unwrap();
                let target = if n == m { CMatrix::identity(big_n, big_n) } else { CMatrix::zeros(big_n, big_n) };
                let err = frobenius(&(g - target));
                assert!(err <= 1e-8, "{name}: ({n},{m}) {err:e}");
            }
        }
    }
}

fn random_matpoly(rng: &mut ChaCha8Rng, n: usize, degree: usize) -> MatrixPolynomial {
    MatrixPolynomial::new(n, (0..=degree).map(|_| random_matrix(rng, n)).collect())
}

#[test]
fn matrix_inner_is_conjugate_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for (_, spec) in reference_specs() {
        let big_n = spec.n();
        let basis = HBasis::new(minimal_h(&spec)).unwrap();
        let mm = spec.matrix_measure().unwrap();
        for _ in 0..5 {
            let deg = rng.gen_range(0..4);
            let p = random_matpoly(&mut rng, big_n, deg);
            let deg = rng.gen_range(0..4);
            let q = random_matpoly(&mut rng, big_n, deg);
            let pq = matrix_inner(&p, &q, &mm, &basis).unwrap();
            let qp = matrix_inner(&q, &p, &mm, &basis).unwrap();
            assert!(frobenius(&(&pq - qp.adjoint())) <= 1e-12 * frobenius(&pq).max(1.0));
        }
    }
}

/// `sum_x w P(h(x)) M(x) Q(h(x))^*` with `M(x)_{k,l} = x^(k+l)` built densely.
fn dense_m_oracle(
    p: &MatrixPolynomial,
    q: &MatrixPolynomial,
    support: &[(f64, f64)],
    h: &Polynomial,
    l: &DMatrix<f64>,
) -> CMatrix {
    let n = p.n();
    let mut out = CMatrix::zeros(n, n);
    for &(x, w) in support {
        let m = CMatrix::from_fn(n, n, |k, j| cre(x.powi((k + j) as i32)));
        let t = h.eval_real(x);
        out += p.eval(t) * m * q.eval(t).adjoint() * cre(w);
    }
    out + p.eval(cre(0.0)) * l.map(cre) * q.eval(cre(0.0)).adjoint()
}

#[test]
fn matrix_inner_matches_dense_matrix_of_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for big_n in 1..=4 {
        let points = rng.gen_range(big_n + 1..=20);
        let support: Vec<(f64, f64)> = (0..points)
            .map(|_| (rng.gen_range(-1.5..1.5), rng.gen_range(0.1..1.0)))
            .collect();
        let mu = Measure::discrete(support.clone()).unwrap();
        let roots: Vec<f64> = (0..big_n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = roots.iter().fold(Polynomial::one(), |acc, &r| &acc * &Polynomial::linear_factor(r));
        let a: Vec<f64> = (0..big_n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = build_l_pointmass(big_n, &a, &roots).unwrap();
        let mm = MatrixMeasure::new(mu, l.clone()).unwrap();
        let basis = HBasis::new(h.clone()).unwrap();
        for _ in 0..4 {
            let deg = rng.gen_range(0..4);
            let p = random_matpoly(&mut rng, big_n, deg);
            let deg = rng.gen_range(0..4);
            let q = random_matpoly(&mut rng, big_n, deg);
            let got = matrix_inner(&p, &q, &mm, &basis).unwrap();
            let want = dense_m_oracle(&p, &q, &support, &h, &l);
            assert!(frobenius(&(&got - &want)) <= 1e-12 * frobenius(&want).max(1.0), "N={big_n}");
        }
    }
}

#[test]
fn two_point_moments_are_exact() {
    let support = vec![(-1.0, 0.5), (1.0, 0.5)];
    let discrete = Measure::discrete(support.clone()).unwrap();
    let tri = ortho_block::measures::stieltjes(&support, 2).unwrap();
    let gauss = Measure::from_recurrence(tri, 1.0).unwrap();
    for k in 0..=3 {
        let exact = if k % 2 == 0 { 1.0 } else { 0.0 };
        assert_eq!(discrete.moment(k).unwrap(), exact);
        assert!((gauss.moment(k).unwrap() - exact).abs() <= 1e-15, "k={k}");
    }
}

fn complex_vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn quadratic_form(l: &DMatrix<f64>, v: &[Complex64]) -> f64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (i, vi) in v.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            total += vi.conj() * l[(i, j)] * vj;
        }
    }
    total.re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sobolev_l_is_semidefinite(
        (n, terms, v) in (2usize..=5).prop_flat_map(|n| (
            Just(n),
            prop::collection::vec((-1.0..1.0f64, 1..n, 0.0..2.0f64), 1..=3),
            complex_vector(n),
        ))
    ) {
        let terms: Vec<DerivativeTerm> = terms
            .into_iter()
            .map(|(c, order, lambda)| DerivativeTerm { c, order, lambda })
            .collect();
        let l = build_l_sobolev(n, &terms).unwrap();
        prop_assert!(quadratic_form(&l, &v) >= -1e-12);
    }

    #[test]
    fn pointmass_l_is_semidefinite(
        (n, a, c, v) in (1usize..=5).prop_flat_map(|n| (
            Just(n),
            prop::collection::vec(-2.0..2.0f64, n),
            prop::collection::vec(-1.0..1.0f64, n),
            complex_vector(n),
        ))
    ) {
        let l = build_l_pointmass(n, &a, &c).unwrap();
        prop_assert!(quadratic_form(&l, &v) >= -1e-12);
    }
}
