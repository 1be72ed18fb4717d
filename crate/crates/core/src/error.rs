use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a domain constraint (probability out of range, bad
    /// parameter, unknown id, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// Pinning every type to its floor leaves mass that has nowhere to go.
    #[error("cannot pin all types to the belief floor at chi = {chi} (residual mass {residual})")]
    InfeasiblePin { chi: f64, residual: f64 },

    #[error("search budget exceeded: {profiles} sender profiles (limit {limit})")]
    SearchBudget { profiles: u128, limit: u128 },

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The declared supports leave a linear system without a unique solution.
    #[error("support system is indeterminate: {0}")]
    Indeterminate(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("comparison undefined on an empty interval")]
    EmptyInterval,

    #[error("{source_name}:{line}:{column}: {message}")]
    GameFile {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{source_name}:{line}: {message}")]
    Csv {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Resource and convergence failures, as opposed to bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::SearchBudget { .. } | Error::NoConvergence { .. })
    }
}
