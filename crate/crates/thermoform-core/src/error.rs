use thiserror::Error;

/// Crate-wide error type. Diagnostics that are expected outcomes (wide
/// brackets, inconclusive mixing, hypothesis flags) are reported in result
/// structs instead; these variants are for genuine failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chain is not topologically mixing: {0}")]
    NotMixing(String),

    #[error("enumeration would exceed the configured cap ({projected} > {cap})")]
    ResourceCap { projected: f64, cap: u64 },

    #[error("iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("pattern construction infeasible: {0}")]
    Infeasible(String),

    #[error("requested depth {requested} exceeds reliable depth {reliable}")]
    DepthOverflow { requested: usize, reliable: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inadmissible word: symbols {a} -> {b} not allowed by the transition matrix")]
    Inadmissible { a: u32, b: u32 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
