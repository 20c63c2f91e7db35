use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    Dimension {
        expected: usize,
        got: usize,
        context: &'static str,
    },
    #[error(
        "singular system in {context} (smallest pivot {min_pivot:e}, condition estimate {cond:e})"
    )]
    Singular {
        context: &'static str,
        min_pivot: f64,
        cond: f64,
    },
    #[error("structural check `{check}` failed: residual {residual:e} > {tolerance:e} ({detail})")]
    Structure {
        check: &'static str,
        residual: f64,
        tolerance: f64,
        detail: String,
    },
    #[error("time step {step} failed: {reason}")]
    Solver { step: usize, reason: String },
}
