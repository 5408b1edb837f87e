//! Expansion of polynomials in the basis `{x^m h(x)^k : 0 <= m < N, k >= 0}`.
//!
//! A polynomial `p` is written as `p(x) = sum_m x^m part_m(h(x))`; the
//! `part_m` are the components collected in a [`ComponentVector`]. With
//! `h = x^N` this is the split of `p` into residue classes of exponents
//! modulo `N` (even/odd parts for `N = 2`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{falling_factorial, PolyError, Polynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HBasisError {
    #[error("basis polynomial must have degree >= 1, got {0}")]
    InvalidDegree(isize),
    #[error("expected {expected} components, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} is not a root of h (|h(c)| = {1:e})")]
    NotARoot(f64, f64),
    #[error("h^({order})({point}) = {value:e} is not zero; root multiplicity is too low")]
    MultiplicityTooLow { point: f64, order: usize, value: f64 },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Relative tolerance used when checking that `c` is a root of `h` of a
/// given multiplicity.
pub const ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Polynomial", into = "Polynomial")]
pub struct HBasis {
    h: Polynomial,
}

impl HBasis {
    pub fn new(h: Polynomial) -> Result<Self, HBasisError> {
        if h.degree() < 1 {
            return Err(HBasisError::InvalidDegree(h.degree()));
        }
        Ok(Self { h })
    }

    /// The basis for `h(x) = x^n`.
    pub fn monomial(n: usize) -> Result<Self, HBasisError> {
        if n == 0 {
            return Err(HBasisError::InvalidDegree(0));
        }
        Self::new(Polynomial::monomial(n, Complex64::new(1.0, 0.0)))
    }

    /// Block size `N = deg h`.
    pub fn n(&self) -> usize {
        self.h.degree() as usize
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    /// Splits `p` into its `N` components by repeated division by `h`.
    pub fn decompose(&self, p: &Polynomial) -> ComponentVector {
        let n = self.n();
        let mut slots: Vec<Vec<Complex64>> = vec![Vec::new(); n];
        let mut rest = p.clone();
        while !rest.is_zero() {
            let (q, r) = rest
                .divmod(&self.h)
                .expect("basis polynomial is nonzero by construction");
            for (m, slot) in slots.iter_mut().enumerate() {
                slot.push(r.coeff(m));
            }
            rest = q;
        }
        ComponentVector {
            parts: slots.into_iter().map(Polynomial::new).collect(),
        }
    }

    /// Inverse of [`HBasis::decompose`]: `sum_m x^m part_m(h(x))`.
    pub fn reconstruct(&self, parts: &ComponentVector) -> Result<Polynomial, HBasisError> {
        let n = self.n();
        if parts.parts.len() != n {
            return Err(HBasisError::DimensionMismatch {
                expected: n,
                got: parts.parts.len(),
            });
        }
        Ok(parts
            .parts
            .iter()
            .enumerate()
            .fold(Polynomial::zero(), |acc, (m, part)| {
                &acc + &part.compose(&self.h).shift(m)
            }))
    }

    fn check_root(&self, c: f64, order: usize) -> Result<(), HBasisError> {
        let tol = ROOT_TOL * (1.0 + self.h.max_abs());
        let value = self.h.eval_real(c).norm();
        if value > tol {
            return Err(HBasisError::NotARoot(c, value));
        }
        for m in 1..=order {
            let value = self.h.derivative(m).eval_real(c).norm();
            if value > tol {
                return Err(HBasisError::MultiplicityTooLow {
                    point: c,
                    order: m,
                    value,
                });
            }
        }
        Ok(())
    }

    /// `p^(j)(c)` computed only from the values `part_n(0)`, valid when `c`
    /// is a root of `h` of multiplicity at least `j + 1`:
    ///
    /// `p^(j)(c) = sum_{n >= j} n!/(n-j)! c^(n-j) part_n(0)`.
    pub fn derivatives_at_root(
        &self,
        p: &Polynomial,
        c: f64,
        j: usize,
    ) -> Result<Complex64, HBasisError> {
        self.check_root(c, j)?;
        let at_zero = self.decompose(p).values_at_zero();
        Ok(derivative_from_components(&at_zero, c, j))
    }
}

/// `sum_{n >= j} n!/(n-j)! c^(n-j) v_n`, the row vector that maps component
/// values at zero to `p^(j)(c)`.
pub(crate) fn derivative_from_components(at_zero: &[Complex64], c: f64, j: usize) -> Complex64 {
    at_zero
        .iter()
        .enumerate()
        .skip(j)
        .map(|(n, &v)| v * falling_factorial(n, j) * c.powi((n - j) as i32))
        .sum()
}

impl TryFrom<Polynomial> for HBasis {
    type Error = HBasisError;
    fn try_from(h: Polynomial) -> Result<Self, Self::Error> {
        HBasis::new(h)
    }
}

impl From<HBasis> for Polynomial {
    fn from(b: HBasis) -> Polynomial {
        b.h
    }
}

/// The `N` components of a polynomial in an [`HBasis`]. Always holds exactly
/// `N` entries, zero slots included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentVector {
    pub parts: Vec<Polynomial>,
}

impl ComponentVector {
    pub fn new(parts: Vec<Polynomial>) -> Self {
        Self { parts }
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn values_at_zero(&self) -> Vec<Complex64> {
        self.parts.iter().map(|p| p.coeff(0)).collect()
    }
}
