use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: expected d={expected_d} n={expected_n}, got d={got_d} n={got_n}")]
    GridMismatch {
        expected_d: usize,
        expected_n: usize,
        got_d: usize,
        got_n: usize,
    },

    #[error("sample count {got} does not match grid size {expected}")]
    SampleCount { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field is not divergence-free (relative divergence {residual:e})")]
    NonSolenoidal { residual: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("iteration diverged at iterate {iteration}: {norm} = {value:e} exceeds {limit:e}")]
    Divergence {
        iteration: usize,
        norm: String,
        value: f64,
        limit: f64,
    },

    #[error("instant {0} is not sampled by the trajectory")]
    InstantNotSampled(f64),

    #[error("block index {j} outside the resolvable range [{lo}, {hi}]")]
    BlockOutOfRange { j: i32, lo: i32, hi: i32 },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
