use thiserror::Error;

#[derive(Debug, Error)]
pub enum FqError {
    #[error("solver failed to converge: residual {residual:e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid too coarse: n = {n} but at least {required} points are required")]
    Resolution { n: usize, required: usize },

    #[error("knot {knot} is not aligned to the grid")]
    GridAlignment { knot: f64 },

    #[error("incompatible paths: {0}")]
    GridMismatch(String),

    #[error("grid size {n} exceeds the limit {limit} for this operation")]
    SizeLimit { n: usize, limit: usize },

    #[error("multi-index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("solution blew up at t = {time} (cell {cell:?})")]
    BlowUp { time: f64, cell: Vec<usize> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FqError>;
