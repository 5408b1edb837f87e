#![allow(dead_code)]

use num_complex::Complex64;
use ortho_block::linalg::CMatrix;
use ortho_block::{Polynomial, RecurrenceSystem};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random system with complex c_{n,k}, |c_{n,N}| in [0.5, 2], random real
/// monic-up-to-scale h of degree N and random initial polynomials.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize, len: usize) -> RecurrenceSystem {
    let mut h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    h.push(rng.gen_range(0.5..1.5));
    let c0 = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cs = (1..=n)
        .map(|k| {
            (0..len)
                .map(|_| {
                    if k == n {
                        let r = rng.gen_range(0.5..2.0);
                        let t = rng.gen_range(0.0..std::f64::consts::TAU);
                        Complex64::from_polar(r, t)
                    } else {
                        random_complex(rng, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    let initial = (0..n)
        .map(|k| {
            let mut coeffs: Vec<Complex64> = (0..k).map(|_| random_complex(rng, 1.0)).collect();
            coeffs.push(Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.28)));
            Polynomial::new(coeffs)
        })
        .collect();
    RecurrenceSystem::new(Polynomial::from_real(&h), c0, cs, initial).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| random_complex(rng, 1.0))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let m = random_matrix(rng, n);
    (&m + m.adjoint()) * c(0.5, 0.0)
}

/// Relative coefficient distance between polynomial lists.
pub fn max_rel_diff(a: &[Polynomial], b: &[Polynomial]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.max_abs_diff(y) / x.max_abs().max(1.0))
        .fold(0.0, f64::max)
}
