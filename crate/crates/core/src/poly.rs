//! Dense univariate polynomials with complex double-precision coefficients.
//!
//! Coefficients are stored lowest degree first and the stored vector always
//! ends in a nonzero leading coefficient; the zero polynomial is the empty
//! vector and has degree `-1`.
//!
//! Degree normalization is cancellation-aware. Constructors drop only exact
//! zeros (or, via [`Polynomial::with_tolerance`], coefficients below a given
//! fraction of the largest one). Addition and subtraction additionally drop
//! leading coefficients that cancel to within `DEFAULT_ZERO_TOL` of the
//! operands' own size. A relative-to-maximum rule would misclassify genuine
//! leading coefficients of high-degree orthogonal polynomials, which can be
//! twelve or more orders of magnitude below the largest coefficient.
//!
//! Degrees are capped at [`MAX_DEGREE`]. Arithmetic that would exceed the cap
//! panics instead of truncating.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_DEGREE: usize = 512;
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("degree {0} exceeds the supported maximum of {MAX_DEGREE}")]
    DegreeTooLarge(usize),
}

#[derive(Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

fn trim_exact(mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
    while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
        coeffs.pop();
    }
    coeffs
}

/// `a ± b` coefficientwise, dropping leading terms lost to cancellation.
fn combine(a: &[Complex64], b: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    let zero = Complex64::new(0.0, 0.0);
    let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or(zero);
    let mut out: Vec<Complex64> = (0..n).map(|i| get(a, i) + get(b, i) * sign).collect();
    while let Some(last) = out.last() {
        let i = out.len() - 1;
        let size = get(a, i).norm().max(get(b, i).norm());
        if last.norm() <= DEFAULT_ZERO_TOL * size {
            out.pop();
        } else {
            break;
        }
    }
    out
}

fn trim(mut coeffs: Vec<Complex64>, rel_tol: f64) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cutoff = rel_tol * scale;
    while let Some(last) = coeffs.last() {
        if last.norm() <= cutoff {
            coeffs.pop();
        } else {
            break;
        }
    }
    coeffs
}

impl Polynomial {
    /// Builds a polynomial from coefficients, lowest degree first.
    ///
    /// Panics if the trimmed degree exceeds [`MAX_DEGREE`]; use
    /// [`Polynomial::try_new`] for untrusted input.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self::checked(trim_exact(coeffs))
    }

    pub fn try_new(coeffs: Vec<Complex64>) -> Result<Self, PolyError> {
        let coeffs = trim_exact(coeffs);
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(PolyError::DegreeTooLarge(coeffs.len() - 1));
        }
        Ok(Self { coeffs })
    }

    /// Drops trailing coefficients with `|c| <= rel_tol * max |coeff|`.
    pub fn with_tolerance(coeffs: Vec<Complex64>, rel_tol: f64) -> Self {
        Self::checked(trim(coeffs, rel_tol))
    }

    fn checked(coeffs: Vec<Complex64>) -> Self {
        assert!(
            coeffs.len() <= MAX_DEGREE + 1,
            "polynomial degree {} exceeds MAX_DEGREE = {}",
            coeffs.len() - 1,
            MAX_DEGREE
        );
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`
    pub fn monomial(k: usize, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `x - root`
    pub fn linear_factor(root: f64) -> Self {
        Self::from_real(&[-root, 1.0])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `x^i`; zero beyond the degree.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient of `self - other` without trimming cancellation,
    /// for measuring residuals.
    pub fn max_abs_diff(&self, other: &Polynomial) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).map(|i| (self.coeff(i) - other.coeff(i)).norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        self.coeffs.iter().all(|c| c.im.abs() <= tol * scale)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self::new(coeffs)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Long division: returns `(q, r)` with `self = q*divisor + r` and
    /// `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial), PolyError> {
        if divisor.is_zero() {
            return Err(PolyError::ZeroDivisor);
        }
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let qlen = rem.len() - dd;
        let mut quot = vec![Complex64::new(0.0, 0.0); qlen];
        for k in (0..qlen).rev() {
            let t = rem[k + dd] / lead;
            quot[k] = t;
            rem[k + dd] = Complex64::new(0.0, 0.0);
            for (i, &d) in divisor.coeffs[..dd].iter().enumerate() {
                rem[k + i] -= t * d;
            }
        }
        rem.truncate(dd);
        Ok((Polynomial::new(quot), Polynomial::new(rem)))
    }

    /// `j`-th derivative.
    pub fn derivative(&self, j: usize) -> Self {
        if j == 0 {
            return self.clone();
        }
        if self.coeffs.len() <= j {
            return Self::zero();
        }
        let coeffs = (j..self.coeffs.len())
            .map(|i| self.coeffs[i] * falling_factorial(i, j))
            .collect();
        Self::new(coeffs)
    }

    /// `self(inner(x))`, by Horner's scheme over polynomials.
    pub fn compose(&self, inner: &Polynomial) -> Self {
        self.coeffs.iter().rev().fold(Polynomial::zero(), |acc, &c| {
            &(&acc * inner) + &Polynomial::constant(c)
        })
    }
}

/// `n (n-1) ... (n-k+1)` as a float; `1` for `k = 0`.
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).fold(1.0, |acc, i| acc * i as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({})", c)?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{}", i)?,
            }
        }
        Ok(())
    }
}

impl Add<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::checked(combine(&self.coeffs, &rhs.coeffs, 1.0))
    }
}

impl Sub<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::checked(combine(&self.coeffs, &rhs.coeffs, -1.0))
    }
}

impl Mul<&Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&[c.re, c.im])?;
        }
        seq.end()
    }
}

/// One coefficient on the wire: `[re, im]` or a bare real number.
#[derive(Deserialize)]
#[serde(untagged)]
enum WireCoeff {
    Pair([f64; 2]),
    Real(f64),
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PolyVisitor;
        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = Polynomial;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of [re, im] coefficient pairs, lowest degree first")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Polynomial, A::Error> {
                let mut coeffs = Vec::new();
                while let Some(c) = seq.next_element::<WireCoeff>()? {
                    coeffs.push(match c {
                        WireCoeff::Pair([re, im]) => Complex64::new(re, im),
                        WireCoeff::Real(re) => Complex64::new(re, 0.0),
                    });
                }
                Polynomial::try_new(coeffs).map_err(de::Error::custom)
            }
        }
        deserializer.deserialize_seq(PolyVisitor)
    }
}
