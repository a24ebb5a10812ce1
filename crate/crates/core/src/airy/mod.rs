//! The Airy solution pair, its zeros, the inhomogeneous kernel and the model
//! operator −∂² + y on a half-line.

mod eval;
mod kernel;
mod zeros;

pub use eval::{airy_eval, decaying, AiryPair, MAX_ARGUMENT, SERIES_LIMIT};
pub use kernel::{
    airy_mass, hilbert_schmidt, kernel, kernel_solve, scaled_hilbert_schmidt, transition_ratio,
    AiryKernel, KernelSolution,
};
pub use zeros::{airy_zeros, model_operator_eigs, zero_seed, AiryZeros, MAX_ZEROS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AiryError {
    #[error("argument {u} outside the supported range |u| <= 200")]
    ArgumentOutOfRange { u: f64 },
    #[error("growing solution overflows at u = {u}")]
    Overflow { u: f64 },
    #[error("at least one zero must be requested")]
    EmptyRequest,
    #[error("{requested} zeros requested, at most {limit} supported")]
    TooManyZeros { requested: usize, limit: usize },
    #[error("could not bracket zero number {index}")]
    ZeroNotBracketed { index: usize },
    #[error("scale parameter must be positive and finite, got {t}")]
    InvalidScale { t: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("grid starting at {a} with step {h} must contain the origin as an interior node")]
    GridMissesOrigin { a: f64, h: f64 },
    #[error("grid has only {points} points")]
    GridTooSmall { points: usize },
    #[error("grid too coarse: ODE residual {residual:e} exceeds {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
}
