use thiserror::Error;

use crate::pressure::PressureEstimate;

/// Errors raised anywhere in the lab.
///
/// Every variant can report the module it originates from (see
/// [`LabError::module`]) so that batch front-ends can attribute failures.
#[derive(Debug, Clone, Error)]
pub enum LabError {
    #[error("branch {branch} is not expanding (minimal expansion {min_expansion:.6} <= 1)")]
    NonExpanding { branch: usize, min_expansion: f64 },

    #[error("branch images violate the Markov property: {0}")]
    NonMarkov(String),

    #[error("bad map spec: {0}")]
    BadSpec(String),

    #[error("orbit left every branch domain at step {step}")]
    EscapedRepeller { step: usize },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("separation {eps} exceeds the minimal branch gap {gap}")]
    EpsilonTooLarge { eps: f64, gap: f64 },

    #[error("pressure did not converge: residual {} at depth {}", .partial.residual, .partial.depth)]
    NoConvergence { partial: Box<PressureEstimate> },

    #[error("{cylinders} cylinders exceed the configured cap {cap}")]
    MatrixTooLarge { cylinders: usize, cap: usize },

    #[error("equivariance residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotSemiConjugate { residual: f64, tol: f64 },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("base window exhausted: position {needed} outside horizon {horizon}")]
    HorizonExceeded { needed: i64, horizon: usize },

    #[error("perturbation too large: minimal expansion {min_expansion:.6} below certified {required:.6}")]
    PerturbationTooLarge { min_expansion: f64, required: f64 },
}

impl LabError {
    /// Name of the module that raises this error.
    pub fn module(&self) -> &'static str {
        match self {
            LabError::NonExpanding { .. }
            | LabError::NonMarkov(_)
            | LabError::BadSpec(_)
            | LabError::EscapedRepeller { .. }
            | LabError::SingularMatrix => "dynamics-core",
            LabError::EpsilonTooLarge { .. }
            | LabError::NoConvergence { .. }
            | LabError::MatrixTooLarge { .. }
            | LabError::NotSemiConjugate { .. } => "pressure",
            LabError::NoSignChange { .. } => "bowen-solver",
            LabError::HorizonExceeded { .. } | LabError::PerturbationTooLarge { .. } => "random-bundle",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
