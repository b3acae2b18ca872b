use thiserror::Error;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("non-finite entries in {0}")]
    NonFinite(String),

    #[error("truncation: {what} needs cavity_dim >= {required} (got {given})")]
    Truncation {
        what: String,
        required: usize,
        given: usize,
    },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("weights sum to {0}, expected 1")]
    Normalization(f64),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("window {0} has a divergent SNR; supply a cap to average it")]
    DivergentSnr(usize),

    #[error("mismatched protocol settings: {0}")]
    Mismatch(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("window {window}: {source}")]
    Window {
        window: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
