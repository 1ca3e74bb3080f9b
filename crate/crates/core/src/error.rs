use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("jump probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("mixture weights sum to {0}, expected 1 within 1e-12")]
    WeightsNotNormalized(f64),
    #[error("mixture weight {0} is not strictly positive")]
    NonPositiveWeight(f64),
    #[error("mixture has no atoms")]
    EmptyMixture,
    #[error("beta shape parameters must be positive and finite, got alpha={alpha}, beta={beta}")]
    InvalidShape { alpha: f64, beta: f64 },
    #[error("clip interval [{lo}, {hi}] must satisfy 0 < lo <= hi < 1")]
    InvalidClip { lo: f64, hi: f64 },
    #[error("expectation of {0} is not integrable for an unclipped beta law; set a clip interval")]
    NonIntegrable(&'static str),
    #[error("increment {0} is not +1 or -1")]
    InvalidIncrement(i64),
    #[error("exact enumeration supports at most {max} steps, got {n}")]
    EnumerationBudget { n: usize, max: usize },
    #[error("velocity {0} is outside [-1, 1]")]
    VelocityOutOfRange(f64),
    #[error("strategy has zero drift; the posterior kernel needs a transient strategy")]
    ZeroDrift,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
