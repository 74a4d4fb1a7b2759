//! Crate-wide error type.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Which side of the evaluation point a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Interior,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Interior => "interior",
        })
    }
}

/// The boundary quantity whose estimation failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Mean,
    Density,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Mean => "conditional mean",
            Quantity::Density => "density",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("insufficient data: need at least {needed} usable points, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("singular design matrix in local polynomial fit")]
    SingularDesign,

    #[error(
        "degenerate support: {:.1}% of in-window running-variable values are duplicates",
        duplicate_fraction * 100.0
    )]
    DegenerateSupport { duplicate_fraction: f64 },

    #[error("{side} of cutoff, {quantity}: {source}")]
    OnSide {
        side: Side,
        quantity: Quantity,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),

    #[error("invalid outcome range [{low}, {high}]")]
    InvalidOutcomeRange { low: f64, high: f64 },

    #[error("no outcome observations with positive weight in the trimming window")]
    EmptyWindow,

    #[error("invalid z-grid size {0} (need at least 2)")]
    InvalidGrid(usize),

    #[error("empty input")]
    EmptyInput,

    #[error("bounds refer to different targets or outcome ranges")]
    MixedTargets,

    #[error("stratum `{0}` does not carry an informative bound")]
    NotInformative(String),

    #[error("{failed} of {total} bootstrap replicates failed")]
    TooManyFailedReplicates { failed: usize, total: usize },

    #[error("invalid inputs: {0}")]
    InvalidInputs(String),

    #[error("invalid type weights: {0}")]
    InvalidWeights(String),

    #[error("sample does not carry latent variables")]
    MissingLatents,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("parse error on line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("unknown data-generating process `{0}`")]
    UnknownDgp(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn on_side(self, side: Side, quantity: Quantity) -> Error {
        Error::OnSide {
            side,
            quantity,
            source: Box::new(self),
        }
    }

    /// Side label attached by boundary estimation, if any.
    pub fn side(&self) -> Option<Side> {
        match self {
            Error::OnSide { side, .. } => Some(*side),
            _ => None,
        }
    }

    /// The error with any side label stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::OnSide { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
