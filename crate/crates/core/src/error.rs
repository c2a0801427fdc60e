use thiserror::Error;

use crate::io::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sizing error: {0}")]
    Sizing(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate strand: all points coincide")]
    DegenerateStrand,

    #[error("uv ({u}, {v}) lies outside the scalp chart")]
    OutsideChart { u: f64, v: f64 },

    #[error("point lies outside the scalp cap (polar angle {angle} > {cap})")]
    OutsideCap { angle: f64, cap: f64 },

    #[error("{} strand root(s) outside the scalp chart: {indices:?}", indices.len())]
    RootsOutsideChart { indices: Vec<usize> },

    #[error("corpus has zero variance")]
    ZeroVariance,

    #[error("corpus too small: need at least {needed} strands, got {got}")]
    CorpusTooSmall { needed: usize, got: usize },

    #[error("all channel weights are zero")]
    ZeroWeights,

    #[error("texture has no valid texels")]
    NoValidTexels,

    #[error("density is zero on every masked texel")]
    ZeroDensity,

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("sigma {sigma} outside the uncertainty knot range [{lo}, {hi}]")]
    SigmaOutOfRange { sigma: f64, lo: f64, hi: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Sizing(_) => "sizing",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::DegenerateStrand => "degenerate_strand",
            Error::OutsideChart { .. } => "outside_chart",
            Error::OutsideCap { .. } => "outside_cap",
            Error::RootsOutsideChart { .. } => "roots_outside_chart",
            Error::ZeroVariance => "zero_variance",
            Error::CorpusTooSmall { .. } => "corpus_too_small",
            Error::ZeroWeights => "zero_weights",
            Error::NoValidTexels => "no_valid_texels",
            Error::ZeroDensity => "zero_density",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::SigmaOutOfRange { .. } => "sigma_out_of_range",
            Error::Empty(_) => "empty_input",
            Error::Parse { .. } => "parse",
            Error::Format(e) => e.code(),
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
