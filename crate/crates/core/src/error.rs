use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cardinality {kappa} outside [1, {n}]")]
    InvalidCardinality { kappa: usize, n: usize },

    #[error("degenerate projection: truncated vector is zero")]
    DegenerateProjection,

    #[error("degenerate anti-projection: truncated vector is zero")]
    DegenerateAntiProjection,

    #[error("vector is not a feasible point: {0}")]
    Infeasible(String),

    #[error("oracle enumeration limited to n <= {limit}, got n = {n}")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("power method did not converge in {iterations} iterations (residual {residual:e})")]
    PowerMethodNotConverged { iterations: usize, residual: f64 },

    #[error("BB step undefined: iterate did not move")]
    ZeroStep,

    #[error("backtracking exceeded {trials} trials at iteration {iteration}")]
    BacktrackingFailed { iteration: usize, trials: usize },

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
