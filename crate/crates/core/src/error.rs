use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains no rows")]
    EmptyData,
    #[error("malformed row {0}: {1}")]
    MalformedRow(usize, String),
    #[error("sample size {0} is too small for the interval-count rule (need n >= 2)")]
    DegenerateSample(usize),
    #[error("time {0} lies outside [0, 1]")]
    OutOfDomain(f64),
    #[error("integrand is singular at the censoring boundary (t = {0})")]
    IntegrandSingular(f64),
    #[error("median survival lies beyond the horizon")]
    NoFiniteMedian,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} draws, got {got}")]
    InsufficientDraws { needed: usize, got: usize },
    #[error("dataset has no events")]
    NoEvents,
    #[error("length {0} is not a power of two")]
    BadShape(usize),
    #[error("histogram with 2^{0} bins exceeds the configured maximum")]
    TooLarge(u32),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
