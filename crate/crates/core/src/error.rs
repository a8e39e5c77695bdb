use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {value} (expected {expected})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid timestamp: {0}")]
    Timestamp(String),

    #[error("timestamps are not strictly increasing at row {row}")]
    NonMonotone { row: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("innovation variance {value} is not positive at daylight index {index}")]
    InnovationVariance { value: f64, index: usize },

    #[error("no parameter estimate available at index {0}")]
    MissingEstimate(usize),

    #[error("day {0} is outside the dataset")]
    DayOutOfRange(u32),

    #[error("no weather forecast for daylight index {0}")]
    MissingForecast(usize),

    #[error("metric {metric} is undefined: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: &'static str,
    },

    #[error("unknown scenario id {0} (valid: 0..=12)")]
    UnknownScenario(u32),

    #[error("schema mismatch in {path}: {detail}")]
    Schema { path: PathBuf, detail: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
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
