//! Crate-wide error type.

use thiserror::Error;

/// Unified error for grid construction, transforms, quadrature, simulation and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid size (not a power of two, or below the minimum).
    #[error("invalid grid: {0}")]
    Grid(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Inverse transform of a spectral field that is not conjugate-symmetric.
    #[error("spectral field is not conjugate-symmetric: max imaginary residue {max_imag:.3e} exceeds 1e-10")]
    NotConjugateSymmetric { max_imag: f64 },

    /// Negative mollifier width.
    #[error("mollifier width must be nonnegative, got {0}")]
    NegativeEpsilon(f64),

    /// CFL number outside (0, 1/2].
    #[error("cfl must lie in (0, 1/2], got {0}")]
    BadCfl(f64),

    /// Kernel evaluated at its singular point z = 0.
    #[error("kernel evaluated at the singular point z = 0")]
    KernelSingular,

    /// Probe point too close to a contour node for the line-integral quadrature.
    #[error("probe point lies on the contour (distance {dist:.3e} below 1e-9)")]
    PointOnContour { dist: f64 },

    /// Contour with too few nodes, repeated points, or colliding nodes.
    #[error("degenerate contour: {0}")]
    DegenerateContour(String),

    /// Level-set field with no sign change: no contour to extract.
    #[error("level set has no zero crossing; nothing to extract")]
    EmptyContour,

    /// Indicator with zero mass where a patch is required.
    #[error("patch is empty")]
    EmptyPatch,

    /// NaN/Inf detected in an updated field.
    #[error("numerical blow-up at t = {t:.6} (step {step})")]
    Blowup { t: f64, step: u64 },

    /// Configuration file problem, with a 1-based line number when known.
    #[error("config error{}: {msg}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, msg: String },

    /// Malformed snapshot or data file.
    #[error("file format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Config error without a line number.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            msg: msg.into(),
        }
    }

    /// Config error tied to a 1-based line number.
    pub fn config_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line: Some(line),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
