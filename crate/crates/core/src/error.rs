use thiserror::Error;

/// Errors raised by the Fock-space algebra.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("invalid mode dimension {0}: every truncated mode needs dim >= 2")]
    InvalidDimension(usize),

    #[error(
        "coherent amplitude |alpha|^2 = {alpha_sq} too large for dim {dim}; need dim >= {required}"
    )]
    TruncationTooSmall {
        alpha_sq: f64,
        dim: usize,
        required: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),
}

/// Errors raised while integrating a master equation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("integration failed at t = {t_reached:e}: {reason}")]
    IntegrationFailure { t_reached: f64, reason: String },

    #[error("trace drift {drift:e} exceeds accuracy bound {bound:e}")]
    Accuracy { drift: f64, bound: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Errors raised by the closed-form models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("no finite maximum: linear loss gamma = 0 gives monotone saturation")]
    NoMaximum,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Errors raised by the device-design calculator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("unknown platform `{0}`")]
    UnknownPlatform(String),

    #[error("invalid platform `{name}`: {reason}")]
    InvalidPlatform { name: String, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Errors raised when assembling or running a scenario.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Fock(#[from] FockError),

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}
