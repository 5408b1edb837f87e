mod commands;
mod demo;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::io::{CliError, Sink};

/// Block Jacobi matrices, (2N+1)-term recurrences and matrix orthonormal
/// polynomials.
///
/// Every `<json>` argument is either literal JSON (starting with `{` or `[`)
/// or a path to a JSON file. Exit status: 0 success, 1 verification failure,
/// 2 input error.
#[derive(Parser)]
#[command(name = "ortho-block", version)]
struct Cli {
    /// Tolerance for verification residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Split p into the components R_m(p) with p = sum x^m R_m(p)(h(x)).
    Decompose {
        #[arg(long)]
        h: Option<String>,
        #[arg(long)]
        p: Option<String>,
        /// `{"h": ..., "p": ...}`, e.g. the output of `reconstruct`.
        #[arg(long, conflicts_with_all = ["h", "p"])]
        input: Option<String>,
    },
    /// Inverse of `decompose`; reads its output.
    Reconstruct {
        #[arg(long)]
        input: String,
    },
    /// Blocks E_n, D_n of the banded matrix of a recurrence system.
    BlockJacobi {
        #[arg(long)]
        sys: String,
        #[arg(long)]
        size: usize,
        /// Dump the banded matrix as CSV (row, col, re, im) instead.
        #[arg(long)]
        banded: bool,
    },
    /// Matrix polynomials P_0..P_{count-1} of a recurrence system.
    Matrixify {
        #[arg(long)]
        sys: String,
        #[arg(long)]
        count: usize,
    },
    /// Unitary normalization to lower-triangular D_n; input `{"A", "B", "U0"?, "Q0"?}`.
    Normalize {
        #[arg(long)]
        blocks: String,
    },
    /// Orthonormal polynomials of a discrete Sobolev or point-evaluation form.
    Sobolev {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        extract_recurrence: bool,
    },
    /// Matrix orthonormality residual of a family.
    Verify {
        #[arg(long)]
        family: String,
        #[arg(long)]
        measure: String,
        #[arg(long)]
        h: String,
        #[arg(long = "L")]
        l: String,
    },
    /// Truncated spectra against the roots of h, and decay of h(J).
    Krein {
        #[arg(long)]
        measure: String,
        #[arg(long)]
        h: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Canonical scenarios.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoName {
    SobolevLegendre,
    BavinckDifference,
    KreinAccumulation,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if !(cli.tol > 0.0) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", cli.tol)));
    }
    let out = Sink::new(cli.out);
    let json_only = |name: &str| {
        if cli.format == Format::Csv {
            Err(CliError::Input(format!("{name} has no CSV output")))
        } else {
            Ok(())
        }
    };
    match cli.command {
        Command::Decompose { h, p, input } => {
            json_only("decompose")?;
            commands::decompose(h.as_deref(), p.as_deref(), input.as_deref(), &out)
        }
        Command::Reconstruct { input } => {
            json_only("reconstruct")?;
            commands::reconstruct(&input, &out)
        }
        Command::BlockJacobi { sys, size, banded } => {
            commands::block_jacobi(&sys, size, banded || cli.format == Format::Csv, &out)
        }
        Command::Matrixify { sys, count } => {
            json_only("matrixify")?;
            commands::matrixify(&sys, count, &out)
        }
        Command::Normalize { blocks } => {
            json_only("normalize")?;
            commands::normalize(&blocks, &out)
        }
        Command::Sobolev {
            spec,
            count,
            extract_recurrence,
        } => commands::sobolev(&spec, count, extract_recurrence, cli.format, &out),
        Command::Verify { family, measure, h, l } => {
            json_only("verify")?;
            commands::verify(&family, &measure, &h, &l, cli.tol, &out)
        }
        Command::Krein {
            measure,
            h,
            sizes,
            epsilon,
        } => commands::krein(&measure, &h, &sizes, epsilon, cli.format, &out),
        Command::Demo { name } => match name {
            DemoName::SobolevLegendre => demo::sobolev_legendre(cli.tol, cli.seed, &out),
            DemoName::BavinckDifference => demo::bavinck_difference(cli.tol, &out),
            DemoName::KreinAccumulation => demo::krein_accumulation(&out),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ortho-block: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
