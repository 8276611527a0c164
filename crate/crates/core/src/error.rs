use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty trace file")]
    EmptyFile,

    #[error("trace has no devices")]
    NoDevices,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("patch fraction {0} is outside [0, 100]")]
    FractionOutOfRange(f64),

    #[error("event {index} at time {time} precedes the simulation clock {clock}")]
    OutOfOrder { index: usize, time: f64, clock: f64 },

    #[error("enumeration cap exceeded: {found} potentially-infecting events, cap is {cap}")]
    CapExceeded { cap: usize, found: usize },

    #[error("grid mismatch: {0}")]
    AxisMismatch(String),

    #[error("unsupported ranking metric: {0}")]
    UnsupportedMetric(&'static str),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
