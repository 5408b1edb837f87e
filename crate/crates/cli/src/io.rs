//! Input parsing, output sinks and number formatting shared by all
//! subcommands.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, or a request the library rejects.
    Input(String),
    /// A residual above the tolerance.
    Verification { what: String, residual: f64, tol: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Verification { what, residual, tol } => {
                write!(f, "verification failed: {what} residual {residual:e} exceeds tolerance {tol:e}")
            }
        }
    }
}

/// Library errors all surface as input errors.
pub fn input<E: fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// A JSON argument is taken literally when it starts with `{` or `[`, and as
/// a file path otherwise.
pub fn read_json<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, CliError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Input(format!("{what}: cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{what}: {e}")))
}

pub struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    pub fn write(&self, text: &str) -> Result<(), CliError> {
        match &self.path {
            Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Input(format!("cannot write stdout: {e}")))
            }
        }
    }

    pub fn json<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(input)?;
        text.push('\n');
        self.write(&text)
    }
}

/// CSV float: 17 significant digits, enough for an exact round trip.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rayon pool honouring `ORTHO_BLOCK_THREADS`.
pub fn pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ORTHO_BLOCK_THREADS") {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Input(format!("ORTHO_BLOCK_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(threads);
    }
    builder.build().map_err(input)
}
