use thiserror::Error;

/// Errors raised by the core models and analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum VocError {
    #[error("network must contain at least one node")]
    EmptyNetwork,
    #[error("edge {edge} is a self-loop on node {node}")]
    SelfLoop { edge: usize, node: usize },
    #[error("edge {edge} references node {node}, but the network has {n} nodes")]
    EdgeOutOfRange { edge: usize, node: usize, n: usize },
    #[error("{what} must be positive (index {index}, got {value})")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what} must be finite (index {index})")]
    NonFinite { what: &'static str, index: usize },
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("numerically singular matrix: {0}")]
    Singular(&'static str),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("state frame does not match the model: {0}")]
    FrameMismatch(&'static str),
    #[error("parameter step at t = {time} does not fall on the integration grid")]
    EventOffGrid { time: f64 },
    #[error("integration diverged; last finite state at t = {last_good_time}")]
    IntegrationDiverged { last_good_time: f64 },
    #[error("invalid integration settings: {0}")]
    InvalidIntegration(&'static str),
}

pub type Result<T> = core::result::Result<T, VocError>;
