//! Error type shared across the crate.

use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong, from bad parameters to I/O failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A model or estimator parameter is outside its domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// Materializing a series would exceed the in-memory sample budget.
    #[error(
        "run of {requested} periods exceeds the in-memory budget of {budget} \
         samples; use the streaming runner instead"
    )]
    MemoryBudget { requested: u64, budget: u64 },

    /// PSD segment lengths must be powers of two.
    #[error("segment length {0} is not a power of two >= 8")]
    BadSegmentLen(usize),

    /// Not enough samples for even one PSD segment.
    #[error("{len} samples is shorter than one segment of {segment_len}")]
    StreamTooShort { len: u64, segment_len: usize },

    /// An estimate or input slice was empty where data is required.
    #[error("empty estimate: no frequency points to work with")]
    EmptyEstimate,

    /// Counting windows would be too few for a meaningful variance.
    #[error("window of {window} periods gives {got} count windows in {n} periods; need at least {min}")]
    TooFewWindows { window: u64, n: u64, got: u64, min: u64 },

    /// An event-based statistic needs more events than the run produced.
    #[error("need at least {need} events, found {found}")]
    TooFewEvents { need: usize, found: usize },

    /// Curve fitting could not produce a usable answer.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Malformed run or sweep configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A structured file had the wrong shape.
    #[error("{path}: line {line}: {msg}")]
    Malformed { path: PathBuf, line: usize, msg: String },

    /// Underlying I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Classifies the error for process exit codes: `true` means the caller
    /// supplied something invalid (exit 2) as opposed to a runtime failure
    /// (exit 3).
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::MemoryBudget { .. })
    }

    /// Annotate an I/O failure with the path involved.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
