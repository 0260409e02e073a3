use thiserror::Error;

/// Errors raised by the model constructors and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechError {
    #[error("type {theta} lies outside the support [{lo}, {hi}]")]
    Domain { theta: f64, lo: f64, hi: f64 },

    #[error("invalid economy: {0}")]
    InvalidEconomy(String),

    #[error("marginal benefit does not fall below 1/{weight} on [0, {bound}]")]
    Unbounded { weight: f64, bound: f64 },

    #[error("root is not bracketed on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("partition signs contradict the declared {curvature} curvature at agent {agent}")]
    ContiguityViolation { curvature: String, agent: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointDivergence { iterations: usize, residual: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, MechError>;
