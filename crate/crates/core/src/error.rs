use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),
    #[error("invalid field recipe: {0}")]
    InvalidRecipe(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field is not divergence free (max relative divergence {0:e})")]
    NotDivergenceFree(f64),
    #[error("time step {dt:e} exceeds the advective stability cap {cap:e}")]
    CflViolation { dt: f64, cap: f64 },
    #[error("non-finite values in the state at t = {t}")]
    BlowUp { t: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last residual {last:e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        residual_history: Vec<f64>,
    },
    #[error("input family is rank deficient at field {index}")]
    RankDeficient { index: usize },
    #[error("frame is not orthonormal (Gram deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("checkpoint format: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
