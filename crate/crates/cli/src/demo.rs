//! Canonical end-to-end scenarios with a plain-text report.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use ortho_block::krein::accumulating_measure;
use ortho_block::matpoly::scalars_to_matrices;
use ortho_block::sobolev::{inner, minimal_h, orthonormal_family, SobolevFamily};
use ortho_block::{HBasis, Measure, Polynomial, SobolevSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{krein_reports, orthonormality_residual};
use crate::io::{input, num, CliError, Sink};

/// Largest `|<h p_n, p_m>|` outside the band `|n - m| <= N`.
fn band_residual(family: &SobolevFamily, h: &Polynomial) -> Result<f64, CliError> {
    let n = h.degree() as usize;
    let hm = family.multiplication_matrix(h).map_err(input)?;
    let mut worst: f64 = 0.0;
    for i in 0..hm.nrows() {
        for j in 0..hm.ncols() {
            if i.abs_diff(j) > n {
                worst = worst.max(hm[(i, j)].abs());
            }
        }
    }
    Ok(worst)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAILED"
    }
}

fn matrix_lines(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
            format!("    [{}]\n", row.join(", "))
        })
        .collect()
}

pub fn sobolev_legendre(tol: f64, seed: u64, out: &Sink) -> Result<(), CliError> {
    let spec = SobolevSpec::single_derivative(Measure::legendre(90), 0.0, 1, 1.0).map_err(input)?;
    let h = minimal_h(&spec);
    let mut report = String::from("sobolev-legendre: <p,q> = ∫ p q dx/2 + p'(0) q'(0), h = x^2, N = 2\n");

    let family = orthonormal_family(&spec, 31).map_err(input)?;
    let band = band_residual(&family, &h)?;
    let sys = family.extract_recurrence(&h).map_err(input)?;
    let min_lead = (2..sys.len())
        .map(|n| sys.coeff(n, 2).map(|c| c.norm()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    writeln!(report, "band residual (n, m <= 30):     {band:.3e}").unwrap();
    writeln!(report, "min |c_(n,2)|:                  {min_lead:.6}").unwrap();

    let basis = HBasis::new(h.clone()).map_err(input)?;
    let mats = scalars_to_matrices(&family.polynomials()[..16], &basis).map_err(input)?;
    let mm = spec.matrix_measure().map_err(input)?;
    let ortho = orthonormality_residual(&mats, &mm, &basis)?;
    writeln!(report, "L = ").unwrap();
    report += &matrix_lines(mm.l());
    writeln!(report, "matrix orthonormality (n <= 7): {ortho:.3e}  {}", verdict(ortho <= tol)).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut symmetry: f64 = 0.0;
    for _ in 0..20 {
        let mut random_poly = || {
            let deg = rng.gen_range(0..=25);
            Polynomial::from_real(&(0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
        };
        let (p, q) = (random_poly(), random_poly());
        let lhs = inner(&spec, &(&h * &p), &q).map_err(input)?;
        let rhs = inner(&spec, &p, &(&h * &q)).map_err(input)?;
        let pq = inner(&spec, &p, &q).map_err(input)?;
        symmetry = symmetry.max((lhs - rhs).abs() / (1.0 + pq.abs()));
    }
    writeln!(report, "symmetry <hp,q> = <p,hq> (seed {seed}, 20 pairs): {symmetry:.3e}").unwrap();
    out.write(&report)?;
    if ortho > tol {
        return Err(CliError::Verification {
            what: "matrix orthonormality".into(),
            residual: ortho,
            tol,
        });
    }
    Ok(())
}

/// Largest coefficient difference over the first `count` polynomials.
fn gap(a: &[Polynomial], b: &[Polynomial]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.max_abs_diff(q)).fold(0.0, f64::max)
}

pub fn bavinck_difference(tol: f64, out: &Sink) -> Result<(), CliError> {
    let mu = Measure::chebyshev(90);
    let mut report = String::from("bavinck-difference: <p,q> = ∫ p q dmu + Δp(0) Δq(0), step δ, N = 2\n");
    let spec = SobolevSpec::difference(mu.clone(), 2, 0.0, 1.0).map_err(input)?;
    let h = minimal_h(&spec);
    writeln!(report, "δ = 1: h = x(x-1), L =").unwrap();
    report += &matrix_lines(&spec.l_matrix().map_err(input)?);
    let band = band_residual(&orthonormal_family(&spec, 31).map_err(input)?, &h)?;
    writeln!(report, "band residual (n, m <= 30): {band:.3e}  {}", verdict(band <= tol)).unwrap();

    let target_spec = SobolevSpec::single_derivative(mu.clone(), 0.0, 1, 1.0).map_err(input)?;
    let target = orthonormal_family(&target_spec, 8).map_err(input)?.polynomials();
    writeln!(report, "\nscaled difference Δp(0)/δ against the limit p'(0), first 8 polynomials:").unwrap();
    writeln!(report, "delta,band_residual,gap,relative_gap,step").unwrap();
    let mut previous: Option<Vec<Polynomial>> = None;
    let mut worst_band = band;
    for delta in [1.0, 0.1, 0.01] {
        let spec = SobolevSpec::scaled_difference(mu.clone(), 2, 0.0, delta).map_err(input)?;
        let band = band_residual(&orthonormal_family(&spec, 31).map_err(input)?, &minimal_h(&spec))?;
        worst_band = worst_band.max(band);
        let family = orthonormal_family(&spec, 8).map_err(input)?.polynomials();
        let relative = family
            .iter()
            .zip(&target)
            .map(|(p, q)| p.max_abs_diff(q) / q.max_abs())
            .fold(0.0, f64::max);
        let step = previous.as_ref().map_or(String::new(), |prev| num(gap(&family, prev)));
        writeln!(report, "{delta},{},{},{},{step}", num(band), num(gap(&family, &target)), num(relative)).unwrap();
        previous = Some(family);
    }
    out.write(&report)?;
    if worst_band > tol {
        return Err(CliError::Verification {
            what: "band".into(),
            residual: worst_band,
            tol,
        });
    }
    Ok(())
}

pub fn krein_accumulation(out: &Sink) -> Result<(), CliError> {
    let h = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
    let runs = [
        ("accumulating-25", accumulating_measure(25), vec![25, 50]),
        ("accumulating-100", accumulating_measure(100), vec![25, 50, 100, 200]),
        ("chebyshev", Measure::chebyshev(120), vec![50, 100]),
    ];
    let mut text = String::from("measure,size,near_fraction,decay_head,decay_tail\n");
    for (name, mu, sizes) in &runs {
        for r in krein_reports(mu, &h, sizes, 0.1)? {
            writeln!(
                text,
                "{name},{},{},{},{}",
                r.size,
                num(r.near_fraction),
                num(r.decay_head()),
                num(r.decay_tail())
            )
            .unwrap();
        }
    }
    out.write(&text)
}
