use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("derivative order {order} exceeds stored maximum {max}")]
    OrderExceeded { order: usize, max: usize },

    #[error("integration diverged (non-finite state) at t = {t_last}")]
    IntegrationDiverged { t_last: f64 },

    #[error("matrix numerically singular (condition estimate {cond:.3e})")]
    SingularMatrix { cond: f64 },

    #[error("consistency violation: {0}")]
    ConsistencyViolation(String),

    #[error("unsupported beam order k = {0} (supported: 1..=3)")]
    UnsupportedOrder(usize),

    #[error("unsupported dimension n = {0} for this operation")]
    UnsupportedDimension(usize),

    #[error("backward characteristic foot point left the grid box at node {node:?} (foot {foot:?})")]
    OutOfDomain { node: Vec<usize>, foot: Vec<f64> },

    #[error("point {0:?} lies outside the grid box")]
    OutsideBox(Vec<f64>),

    #[error("spectral domain too small: |psi| = {amplitude:.3e} inside the boundary band at t = {t}")]
    DomainTooSmall { amplitude: f64, t: f64 },

    #[error("wave field grids do not match")]
    GridMismatch,

    #[error("empty beam list")]
    EmptyBeamList,

    #[error("time {t} is not on the shared step grid (dt = {dt})")]
    TimeOffGrid { t: f64, dt: f64 },

    #[error("config validation failed: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
