use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kinematic singularity: |cos(pitch)| = {cos_pitch:.3e}")]
    KinematicSingularity { cos_pitch: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("integrator step size underflow at t = {time:.6} s")]
    StepUnderflow { time: f64 },

    #[error("simulation aborted at t = {time:.4} s: {cause}")]
    Aborted { time: f64, cause: Box<Error> },

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),

    #[error("ill-conditioned fit (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("record error: {0}")]
    Record(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
