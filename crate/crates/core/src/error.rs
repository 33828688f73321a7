use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("ZF equalizer undefined: channel Gram matrix singular at tone {tone}")]
    SingularTone { tone: usize },

    #[error("DFT size {n} is shorter than the channel length {taps}")]
    DftTooShort { n: usize, taps: usize },

    #[error("invalid length: {0}")]
    InvalidLength(String),

    #[error("infeasible frame schedule: stream {stream}, window {window}, discard {discard}")]
    InfeasibleSchedule {
        stream: usize,
        window: usize,
        discard: usize,
    },

    #[error("incomplete reconstruction: samples {start}..{end} not all equalized")]
    IncompleteReconstruction { start: usize, end: usize },

    #[error("root finder did not converge for polynomial {coefficients:?}")]
    RootFinding { coefficients: Vec<(f64, f64)> },

    #[error("pole {pole} lies on the unit circle")]
    PoleOnUnitCircle { pole: String },

    #[error("poles {0} and {1} are not distinct")]
    NearMultiplePoles(usize, usize),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed record: {0}")]
    Parse(String),

    #[error("no records to write")]
    NoRecords,

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
