use nalgebra::DMatrix;
use ortho_block::jacobi::{block_partition, build_banded};
use ortho_block::krein::{krein_report, SpectralReport};
use ortho_block::linalg::{frobenius, CMatrix, MatrixWire};
use ortho_block::matpoly::{default_u0, lower_triangularize, scalars_to_matrices, verify_three_term, MatrixPolynomial};
use ortho_block::measures::matrix_inner;
use ortho_block::sobolev::{minimal_h, orthonormal_family};
use ortho_block::{
    BlockJacobi, ComponentVector, HBasis, MatrixMeasure, Measure, Polynomial, RecurrenceSystem, SobolevSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{input, num, pool, read_json, CliError, Sink};
use crate::Format;

#[derive(Serialize, Deserialize)]
pub struct Decomposed {
    pub h: Polynomial,
    pub parts: ComponentVector,
}

#[derive(Serialize, Deserialize)]
pub struct Composed {
    pub h: Polynomial,
    pub p: Polynomial,
}

pub fn decompose(h: Option<&str>, p: Option<&str>, file: Option<&str>, out: &Sink) -> Result<(), CliError> {
    let composed = match (file, h, p) {
        (Some(f), None, None) => read_json::<Composed>(f, "--input")?,
        (None, Some(h), Some(p)) => Composed {
            h: read_json(h, "--h")?,
            p: read_json(p, "--p")?,
        },
        _ => return Err(CliError::Input("give either --input or both --h and --p".into())),
    };
    let basis = HBasis::new(composed.h.clone()).map_err(input)?;
    out.json(&Decomposed {
        parts: basis.decompose(&composed.p),
        h: composed.h,
    })
}

pub fn reconstruct(file: &str, out: &Sink) -> Result<(), CliError> {
    let d: Decomposed = read_json(file, "--input")?;
    let basis = HBasis::new(d.h.clone()).map_err(input)?;
    out.json(&Composed {
        p: basis.reconstruct(&d.parts).map_err(input)?,
        h: d.h,
    })
}

pub fn block_jacobi(sys: &str, size: usize, banded: bool, out: &Sink) -> Result<(), CliError> {
    let sys: RecurrenceSystem = read_json(sys, "--sys")?;
    let j = build_banded(&sys, size).map_err(input)?;
    if banded {
        let mut text = String::from("row,col,re,im\n");
        for (r, c, re, im) in j.entries() {
            text += &format!("{r},{c},{},{}\n", num(re), num(im));
        }
        return out.write(&text);
    }
    out.json(&block_partition(&j).map_err(input)?)
}

#[derive(Serialize)]
struct Matrixified {
    #[serde(rename = "N")]
    n: usize,
    h: Polynomial,
    family: Vec<MatrixPolynomial>,
    /// Block three-term residual against the partitioned banded matrix.
    residual: f64,
}

pub fn matrixify(sys: &str, count: usize, out: &Sink) -> Result<(), CliError> {
    let sys: RecurrenceSystem = read_json(sys, "--sys")?;
    let n = sys.n();
    let basis = HBasis::new(sys.h().clone()).map_err(input)?;
    let scalars = sys.scalar_family(count * n).map_err(input)?;
    let family = scalars_to_matrices(&scalars, &basis).map_err(input)?;
    let blocks = block_partition(&build_banded(&sys, count * n).map_err(input)?).map_err(input)?;
    out.json(&Matrixified {
        n,
        h: sys.h().clone(),
        residual: verify_three_term(&family, &blocks),
        family,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizeInput {
    #[serde(rename = "A")]
    a: Vec<MatrixWire>,
    #[serde(rename = "B")]
    b: Vec<MatrixWire>,
    #[serde(rename = "U0")]
    u0: Option<MatrixWire>,
    /// When given (and `U0` is not), `U0` makes `U0 Q0` lower triangular.
    #[serde(rename = "Q0")]
    q0: Option<MatrixWire>,
}

#[derive(Serialize)]
struct NormalizeOutput {
    #[serde(flatten)]
    blocks: BlockJacobi,
    #[serde(rename = "U")]
    u: Vec<MatrixWire>,
}

fn squares(list: &[MatrixWire], what: &str) -> Result<Vec<CMatrix>, CliError> {
    list.iter()
        .enumerate()
        .map(|(i, m)| m.to_square().ok_or_else(|| CliError::Input(format!("{what}[{i}] is not square"))))
        .collect()
}

pub fn normalize(blocks: &str, out: &Sink) -> Result<(), CliError> {
    let inp: NormalizeInput = read_json(blocks, "--blocks")?;
    let a = squares(&inp.a, "A")?;
    let b = squares(&inp.b, "B")?;
    let n = b.first().map(|m| m.nrows()).ok_or_else(|| CliError::Input("B is empty".into()))?;
    let u0 = match (&inp.u0, &inp.q0) {
        (Some(u), _) => squares(std::slice::from_ref(u), "U0")?.remove(0),
        (None, Some(q)) => default_u0(&squares(std::slice::from_ref(q), "Q0")?.remove(0)),
        (None, None) => CMatrix::identity(n, n),
    };
    let normalized = lower_triangularize(&a, &b, &u0).map_err(input)?;
    out.json(&NormalizeOutput {
        u: normalized.unitaries.iter().map(MatrixWire::from).collect(),
        blocks: normalized.blocks,
    })
}

#[derive(Serialize)]
struct SobolevOutput {
    #[serde(rename = "N")]
    n: usize,
    h: Polynomial,
    #[serde(rename = "L")]
    l: Vec<Vec<f64>>,
    measure: Measure,
    polynomials: Vec<Polynomial>,
    family: Vec<MatrixPolynomial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recurrence: Option<RecurrenceSystem>,
}

pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn sobolev(spec: &str, count: usize, extract: bool, format: Format, out: &Sink) -> Result<(), CliError> {
    let spec: SobolevSpec = read_json(spec, "--spec")?;
    let h = minimal_h(&spec);
    let family = orthonormal_family(&spec, count).map_err(input)?;
    let polynomials = family.polynomials();
    let recurrence = if extract {
        Some(family.extract_recurrence(&h).map_err(input)?)
    } else {
        None
    };
    if format == Format::Csv {
        let mut text = String::new();
        match &recurrence {
            Some(sys) => {
                text += "n,k,re,im\n";
                for n in 0..sys.len() {
                    for k in 0..=sys.n() {
                        let c = sys.coeff(n, k).map_err(input)?;
                        text += &format!("{n},{k},{},{}\n", num(c.re), num(c.im));
                    }
                }
            }
            None => {
                text += "n,i,re,im\n";
                for (n, p) in polynomials.iter().enumerate() {
                    for (i, c) in p.coeffs().iter().enumerate() {
                        text += &format!("{n},{i},{},{}\n", num(c.re), num(c.im));
                    }
                }
            }
        }
        return out.write(&text);
    }
    let basis = HBasis::new(h.clone()).map_err(input)?;
    out.json(&SobolevOutput {
        n: spec.n(),
        l: rows(&spec.l_matrix().map_err(input)?),
        measure: spec.measure().clone(),
        family: scalars_to_matrices(&polynomials, &basis).map_err(input)?,
        polynomials,
        recurrence,
        h,
    })
}

/// Either a bare array of matrix polynomials or any object with a
/// `family` field (the output of `matrixify` and `sobolev`).
#[derive(Deserialize)]
#[serde(untagged)]
enum FamilyInput {
    Bare(Vec<MatrixPolynomial>),
    Wrapped { family: Vec<MatrixPolynomial> },
}

#[derive(Serialize)]
pub struct Verdict {
    pub residual: f64,
    pub tol: f64,
    pub count: usize,
    pub pass: bool,
}

/// Largest `||<P_n, P_m> - δ_nm I||_F` over all pairs.
pub fn orthonormality_residual(
    family: &[MatrixPolynomial],
    mm: &MatrixMeasure,
    basis: &HBasis,
) -> Result<f64, CliError> {
    let n = basis.n();
    let worst = pool()?.install(|| {
        (0..family.len())
            .into_par_iter()
            .map(|i| {
                (0..family.len()).try_fold(0.0f64, |acc, j| {
                    let g = matrix_inner(&family[i], &family[j], mm, basis)?;
                    let target = if i == j { CMatrix::identity(n, n) } else { CMatrix::zeros(n, n) };
                    Ok(acc.max(frobenius(&(g - target))))
                })
            })
            .collect::<Result<Vec<f64>, ortho_block::measures::MeasureError>>()
    });
    Ok(worst.map_err(input)?.into_iter().fold(0.0, f64::max))
}

pub fn verify(family: &str, measure: &str, h: &str, l: &str, tol: f64, out: &Sink) -> Result<(), CliError> {
    let family = match read_json::<FamilyInput>(family, "--family")? {
        FamilyInput::Bare(f) | FamilyInput::Wrapped { family: f } => f,
    };
    let measure: Measure = read_json(measure, "--measure")?;
    let basis = HBasis::new(read_json(h, "--h")?).map_err(input)?;
    let l: Vec<Vec<f64>> = read_json(l, "--L")?;
    let size = l.len();
    if l.iter().any(|r| r.len() != size) {
        return Err(CliError::Input("--L must be a square matrix".into()));
    }
    let l = DMatrix::from_fn(size, size, |i, j| l[i][j]);
    let mm = MatrixMeasure::new(measure, l).map_err(input)?;
    let residual = orthonormality_residual(&family, &mm, &basis)?;
    let verdict = Verdict {
        residual,
        tol,
        count: family.len(),
        pass: residual <= tol,
    };
    out.json(&verdict)?;
    if !verdict.pass {
        return Err(CliError::Verification {
            what: "orthonormality".into(),
            residual,
            tol,
        });
    }
    Ok(())
}

/// Reports for each size, computed in parallel, returned in input order.
pub fn krein_reports(mu: &Measure, h: &Polynomial, sizes: &[usize], epsilon: f64) -> Result<Vec<SpectralReport>, CliError> {
    pool()?
        .install(|| sizes.par_iter().map(|&s| krein_report(mu, h, s, epsilon)).collect::<Result<Vec<_>, _>>())
        .map_err(input)
}

pub fn krein(measure: &str, h: &str, sizes: &[usize], epsilon: f64, format: Format, out: &Sink) -> Result<(), CliError> {
    let mu: Measure = read_json(measure, "--measure")?;
    let h: Polynomial = read_json(h, "--h")?;
    let reports = krein_reports(&mu, &h, sizes, epsilon)?;
    if format == Format::Json {
        return out.json(&reports);
    }
    let mut text = String::from("size,near_fraction,decay_head,decay_tail\n");
    for r in &reports {
        text += &format!("{},{},{},{}\n", r.size, num(r.near_fraction), num(r.decay_head()), num(r.decay_tail()));
    }
    text += "\nsize,index,eigenvalue\n";
    for r in &reports {
        for (i, e) in r.eigenvalues.iter().enumerate() {
            text += &format!("{},{i},{}\n", r.size, num(*e));
        }
    }
    out.write(&text)
}
