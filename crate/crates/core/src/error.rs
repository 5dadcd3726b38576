use thiserror::Error;

use crate::singularity::SingularArc;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("finite-difference stencil of step {step} leaves the domain at {point:?}")]
    Stencil { point: Vec<f64>, step: f64 },
    #[error("segment hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("no admissible sample point near {0:?}")]
    Isolation(Vec<f64>),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("partition of unity error: {0}")]
    Partition(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("degenerate direction: {0}")]
    DegenerateDirection(String),
    #[error("singularity lost at s = {s} after {} accepted samples", partial.samples.len())]
    PropagationLost { s: f64, partial: Box<SingularArc> },
    #[error("stage {stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch { expected, got: x.len() });
    }
    Ok(())
}
