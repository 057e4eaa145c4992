use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty column")]
    EmptyColumn,
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("invalid neighbor count: M = {m} must lie in [1, {n}]")]
    InvalidNeighborCount { m: usize, n: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("degenerate sample: n = {0}, need at least 2 observations")]
    DegenerateSample(usize),
    #[error("constant column: rank correlation is undefined")]
    ConstantColumn,
    #[error("no events: every observation is censored")]
    NoEvents,
    #[error("invalid survival response: {0}")]
    InvalidResponse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("target CR unattainable: {0}")]
    CensoringUnattainable(String),
    #[error("no comparable pairs")]
    NoComparablePairs,
    #[error("no candidate neighbor has feature {feature} observed (missing cell at row {row})")]
    NoImputationDonor { row: usize, feature: usize },
    #[error("{0}")]
    Data(String),
    #[error("config: {0}")]
    Config(String),
    #[error("replication {rep} failed (data seed {seed}, stream {stream}): {source}")]
    Replication {
        rep: usize,
        seed: u64,
        stream: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyColumn => "empty_column",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidNeighborCount { .. } => "invalid_neighbor_count",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::DegenerateSample(_) => "degenerate_sample",
            Error::ConstantColumn => "constant_column",
            Error::NoEvents => "no_events",
            Error::InvalidResponse(_) => "invalid_response",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::CensoringUnattainable(_) => "censoring_unattainable",
            Error::NoComparablePairs => "no_comparable_pairs",
            Error::NoImputationDonor { .. } => "no_imputation_donor",
            Error::Data(_) => "data",
            Error::Config(_) => "config",
            Error::Replication { .. } => "replication",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}
