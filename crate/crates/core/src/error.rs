//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Error`]. Variants carry
//! enough context (row indices, column names, location ids) for a caller to
//! report the failure without re-deriving it, and [`Error::code`] exposes a
//! stable machine-readable identifier used by downstream tooling.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    /// A column named in the schema is absent from the input file.
    #[error("missing column `{0}` in input")]
    MissingColumn(String),

    /// A cell that should hold a number could not be parsed as one.
    #[error("non-numeric value in column `{column}`, data row {row}")]
    NonNumericCell { row: usize, column: String },

    /// Two samples share an identical coordinate pair and jitter is disabled.
    #[error("duplicate coordinates: rows {first} and {second} share the same (u, v)")]
    DuplicateCoordinate { first: usize, second: usize },

    /// Fewer rows than the estimators downstream can support.
    #[error("too few rows: got {rows}, need at least {needed}")]
    TooFewRows { rows: usize, needed: usize },

    /// A variable column is constant, so it cannot be standardized.
    #[error("column `{0}` has zero variance")]
    ZeroVariance(String),

    /// Two points in a distance computation coincide.
    #[error("degenerate coordinates: points {first} and {second} coincide")]
    DegenerateCoordinates { first: usize, second: usize },

    /// Neighbour count outside `1..=n-1`.
    #[error("k = {k} out of range for n = {n} points")]
    KOutOfRange { k: usize, n: usize },

    /// Mismatched lengths between paired inputs.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The global design matrix is numerically rank deficient.
    #[error("design matrix is rank deficient (reciprocal condition below {rcond:e})")]
    RankDeficient { rcond: f64 },

    /// An auxiliary regression fits perfectly, so the VIF diverges.
    #[error("perfect collinearity at predictor `{0}`")]
    PerfectCollinearity(String),

    /// A local weighted design is rank deficient at one calibration location.
    #[error("locally rank-deficient design at location {location}")]
    LocalRankDeficient { location: usize },

    /// The effective number of parameters leaves no residual degrees of freedom.
    #[error("degrees of freedom exhausted: effective parameters {enp:.3} with n = {n}")]
    DegreesOfFreedomExhausted { enp: f64, n: usize },

    /// A search bracket with `lo >= hi`.
    #[error("bad bracket: [{lo}, {hi}]")]
    BadBracket { lo: f64, hi: f64 },

    /// Kernel bandwidth must be strictly positive.
    #[error("bandwidth must be positive, got {0}")]
    NonpositiveBandwidth(f64),

    /// A model description that contradicts itself or the data.
    #[error("inconsistent model spec: {0}")]
    InconsistentSpec(String),

    /// A covariance matrix that should be positive definite is not.
    #[error("covariance matrix is not positive definite")]
    NonPositiveDefiniteCovariance,

    /// Bootstrap resampling kept producing degenerate replicates.
    #[error("bootstrap degenerate: {attempts} redraw attempts exhausted")]
    BootstrapDegenerate { attempts: usize },

    /// No samples supplied where at least one is required.
    #[error("empty sample set")]
    EmptySamples,

    /// A raster grid description that cannot be realised.
    #[error("bad grid spec: {0}")]
    BadGridSpec(String),

    /// Every cell of a raster is masked, so there is nothing to render.
    #[error("all cells are masked")]
    AllMasked,

    /// A mask excludes every entry, so an aggregate over it is undefined.
    #[error("mask excludes every entry")]
    EmptyMask,

    /// An estimator that requires standardized inputs received raw ones.
    #[error("dataset is not standardized (standardize it first or enable raw mode)")]
    NotStandardized,

    /// A configuration value outside its documented domain.
    #[error("bad config: {0}")]
    BadConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier for machine consumption (one per variant).
    pub fn code(&self) -> &'static str {
        match self {
            Error::MissingColumn(_) => "MissingColumn",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::DuplicateCoordinate { .. } => "DuplicateCoordinate",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::ZeroVariance(_) => "ZeroVariance",
            Error::DegenerateCoordinates { .. } => "DegenerateCoordinates",
            Error::KOutOfRange { .. } => "KOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::PerfectCollinearity(_) => "PerfectCollinearity",
            Error::LocalRankDeficient { .. } => "LocalRankDeficient",
            Error::DegreesOfFreedomExhausted { .. } => "DegreesOfFreedomExhausted",
            Error::BadBracket { .. } => "BadBracket",
            Error::NonpositiveBandwidth(_) => "NonpositiveBandwidth",
            Error::InconsistentSpec(_) => "InconsistentSpec",
            Error::NonPositiveDefiniteCovariance => "NonPositiveDefiniteCovariance",
            Error::BootstrapDegenerate { .. } => "BootstrapDegenerate",
            Error::EmptySamples => "EmptySamples",
            Error::BadGridSpec(_) => "BadGridSpec",
            Error::AllMasked => "AllMasked",
            Error::EmptyMask => "EmptyMask",
            Error::NotStandardized => "NotStandardized",
            Error::BadConfig(_) => "BadConfig",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
        }
    }
}
