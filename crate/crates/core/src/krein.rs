//! Finite-section diagnostics for the relation between the accumulation
//! points of the spectrum of a Jacobi matrix `J` and the zeros of `h`: every
//! accumulation point of `σ(J)` is a root of `h` exactly when `h(J)` is
//! compact.
//!
//! Nothing here decides compactness. A [`SpectralReport`] records how many
//! eigenvalues of a truncation of `J` sit near the roots of `h`, and how the
//! blocks of the truncated `h(J)` decay along the diagonal.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::{decay_profile, h_of_tridiagonal, JacobiError, Tridiagonal};
use crate::linalg::CMatrix;
use crate::measures::{Measure, MeasureError};
use crate::poly::Polynomial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KreinError {
    #[error("roots of h could not be isolated to {tol:e} (residual step {step:e} at {root})")]
    RootFindingFailure { root: Complex64, step: f64, tol: f64 },
    #[error("truncation size {size} exceeds the {available} available recurrence coefficients")]
    SizeTooLarge { size: usize, available: usize },
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

/// Required accuracy of an isolated (simple) root after polishing.
pub const ROOT_TOL: f64 = 1e-10;
/// Companion eigenvalues closer than this (relative) are treated as one
/// multiple root and are not Newton-polished.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub size: usize,
    /// Eigenvalues of the `size × size` truncation of `J`, ascending.
    pub eigenvalues: Vec<f64>,
    pub roots: Vec<Complex64>,
    pub epsilon: f64,
    /// Fraction of eigenvalues within `epsilon` of some root of `h`.
    pub near_fraction: f64,
    /// Block norms of the truncated `h(J)`, see [`decay_profile`].
    pub decay: Vec<f64>,
}

impl SpectralReport {
    pub fn decay_head(&self) -> f64 {
        self.decay.first().copied().unwrap_or(0.0)
    }

    pub fn decay_tail(&self) -> f64 {
        self.decay.last().copied().unwrap_or(0.0)
    }
}

/// Sorted eigenvalues of the leading `size × size` section of `J`.
pub fn truncated_spectrum(tri: &Tridiagonal, size: usize) -> Result<Vec<f64>, KreinError> {
    if size == 0 || size > tri.len() {
        return Err(KreinError::SizeTooLarge {
            size,
            available: tri.len(),
        });
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(tri.to_dense(size))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// All complex roots of `h`, from the eigenvalues of the companion matrix of
/// the monic normalization followed by one Newton step. Clusters of
/// eigenvalues (multiple roots) are replaced by their mean, once per member.
pub fn roots(h: &Polynomial) -> Result<Vec<Complex64>, KreinError> {
    let n = h.degree();
    if n < 1 {
        return Ok(Vec::new());
    }
    let n = n as usize;
    let lead = h.leading();
    let monic: Vec<Complex64> = h.coeffs().iter().map(|c| c / lead).collect();
    let companion = CMatrix::from_fn(n, n, |i, j| {
        if j == n - 1 {
            -monic[i]
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let eig = companion
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .map(|s| s.unpack().1.diagonal())
        .ok_or(KreinError::RootFindingFailure {
            root: Complex64::new(f64::NAN, f64::NAN),
            step: f64::INFINITY,
            tol: ROOT_TOL,
        })?;
    let mut raw: Vec<Complex64> = eig.iter().copied().collect();
    raw.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = raw.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let dh = h.derivative(1);
    let mut out = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let members: Vec<usize> = (i..n)
            .filter(|&j| !used[j] && (raw[j] - raw[i]).norm() <= CLUSTER_TOL * scale)
            .collect();
        members.iter().for_each(|&j| used[j] = true);
        if members.len() > 1 {
            let mean = members.iter().map(|&j| raw[j]).sum::<Complex64>() / members.len() as f64;
            out.extend(std::iter::repeat_n(mean, members.len()));
            continue;
        }
        let mut z = raw[i];
        let d = dh.eval(z);
        if d.norm() > 0.0 {
            z -= h.eval(z) / d;
        }
        let d = dh.eval(z);
        let step = if d.norm() > 0.0 { (h.eval(z) / d).norm() } else { f64::INFINITY };
        if !(step <= ROOT_TOL * (1.0 + z.norm())) {
            return Err(KreinError::RootFindingFailure {
                root: z,
                step,
                tol: ROOT_TOL,
            });
        }
        if z.im.abs() <= ROOT_TOL * (1.0 + z.norm()) {
            z.im = 0.0;
        }
        out.push(z);
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Fraction of `eigenvalues` within `epsilon` of some root.
pub fn near_fraction(eigenvalues: &[f64], roots: &[Complex64], epsilon: f64) -> f64 {
    if eigenvalues.is_empty() {
        return 0.0;
    }
    let near = eigenvalues
        .iter()
        .filter(|&&x| roots.iter().any(|r| (Complex64::new(x, 0.0) - r).norm() <= epsilon))
        .count();
    near as f64 / eigenvalues.len() as f64
}

pub fn krein_report(mu: &Measure, h: &Polynomial, size: usize, epsilon: f64) -> Result<SpectralReport, KreinError> {
    if !(epsilon > 0.0) {
        return Err(KreinError::InvalidEpsilon(epsilon));
    }
    let available = mu.recurrence_capacity();
    if size > available {
        return Err(KreinError::SizeTooLarge { size, available });
    }
    let tri = mu.recurrence(size)?;
    let eigenvalues = truncated_spectrum(&tri, size)?;
    let roots = roots(h)?;
    let near_fraction = near_fraction(&eigenvalues, &roots, epsilon);
    let decay = decay_profile(&h_of_tridiagonal(&tri, h, size)?);
    Ok(SpectralReport {
        size,
        eigenvalues,
        roots,
        epsilon,
        near_fraction,
        decay,
    })
}

/// Largest distance between an eigenvalue of the unpolluted leading block of
/// the truncated `h(J)` and the nearest value `h(λ)` over eigenvalues `λ` of
/// the truncated `J`.
pub fn spectral_mapping_defect(mu: &Measure, h: &Polynomial, size: usize) -> Result<f64, KreinError> {
    let tri = mu.recurrence(size)?;
    let mapped: Vec<f64> = truncated_spectrum(&tri, size)?
        .iter()
        .map(|&x| h.eval_real(x).re)
        .collect();
    let hj = h_of_tridiagonal(&tri, h, size)?;
    let keep = size - hj.polluted();
    let dense = hj.to_dense();
    let interior = dense.view((0, 0), (keep, keep)).map(|z| z.re);
    let ev = SymmetricEigen::new(interior).eigenvalues;
    Ok(ev
        .iter()
        .map(|&e| mapped.iter().map(|&m| (e - m).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// `sum_{k=1}^{K} 2^{-k} (δ_{1 - 1/(k+1)} + δ_{-1 + 1/(k+1)})`: a measure
/// whose support accumulates only at `±1`.
pub fn accumulating_measure(pairs: usize) -> Measure {
    let mut points = Vec::with_capacity(2 * pairs);
    for k in 1..=pairs {
        let x = 1.0 - 1.0 / (k as f64 + 1.0);
        let w = 0.5f64.powi(k as i32);
        points.push((-x, w));
        points.push((x, w));
    }
    Measure::discrete(points).expect("weights are positive")
}
