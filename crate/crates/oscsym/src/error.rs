//! Error types shared across evaluation routes.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside an operation's domain (bad dimension, negative t, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The two parity sub-sums cancel beyond the available significand bits.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// Series order K too small for the requested argument.
    #[error("underresolved series: {0}")]
    Underresolved(String),

    /// Derivative recurrence evaluated at its singular point t = 0.
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// Derivative representation exceeded the multi-index order cap.
    #[error("representation overflow: {0}")]
    RepOverflow(String),

    /// No evaluation route meets the requested accuracy.
    #[error("accuracy gap: {0}")]
    Gap(String),

    /// Abel/Richardson extrapolation did not settle.
    #[error("non-convergent extrapolation: {0}")]
    NonConvergent(String),

    /// Adaptive integrator step size collapsed.
    #[error("stiffness: {0}")]
    Stiffness(String),

    /// Residuals sit at the precision floor; a fit would measure noise.
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    /// Quadrature tail bound exceeds the requested tolerance.
    #[error("tail bound too loose: {0}")]
    TailBoundLoose(String),
}

pub type Result<T> = std::result::Result<T, Error>;
