use std::fmt;

use thiserror::Error;

use crate::quantizer::ModulatorState;

/// The admissibility inequality a parameter tuple failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `0 < alpha < 1`.
    Alpha,
    /// `lambda >= 1`.
    Lambda,
    /// `lambda <= 1 + alpha(1-alpha) / (2(1+alpha))`.
    Lambda2,
    /// `2 dH (lambda-1) / dL <= epsilon <= alpha`.
    Eps2,
    /// `2 dH / dL <= C <= epsilon^2 dL / (2 dH (lambda-1)^2)`.
    C2,
    /// `C >= 2 dH / dL`.
    LowerC,
    /// The multiplier lies outside the admissible interval.
    GammaRange,
    /// The single-parameter dynamic range must be positive.
    BetaPositive,
}

impl Bound {
    pub fn name(self) -> &'static str {
        match self {
            Bound::Alpha => "alpha",
            Bound::Lambda => "lambda",
            Bound::Lambda2 => "lambda2",
            Bound::Eps2 => "eps2",
            Bound::C2 => "C2",
            Bound::LowerC => "lowerc",
            Bound::GammaRange => "gamma-range",
            Bound::BetaPositive => "beta-positive",
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state diverged at step {step} (last finite state u={}, v={})", last_state.u, last_state.v)]
    Divergence { step: usize, last_state: ModulatorState },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("index {index} is below the difference order {order}")]
    Index { index: usize, order: usize },

    #[error("infeasible parameters: violates {bound} ({detail})")]
    Infeasible { bound: Bound, detail: String },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("sample window does not cover kernel support around t={t}")]
    Coverage { t: f64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn infeasible(bound: Bound, detail: impl Into<String>) -> Self {
        Error::Infeasible {
            bound,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
