use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh geometry: {0}")]
    Geometry(String),
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operation requires the {expected} representation")]
    Representation { expected: &'static str },
    #[error("CFL violation at step {step}: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { step: usize, dt: f64, limit: f64 },
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },
    #[error("invariant violated at step {step}: {what}")]
    Invariant { step: usize, what: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
