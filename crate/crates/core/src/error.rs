use thiserror::Error;

/// One step of a regularization schedule: the damping parameter and the
/// sup-norm change of the extrapolated estimate after including it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpsilonStep {
    pub epsilon: f64,
    pub change: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("unknown test-function recipe `{0}`")]
    UnknownRecipe(String),

    #[error("extrapolation did not converge: {message}")]
    Convergence {
        message: String,
        trace: Vec<EpsilonStep>,
    },

    #[error("malformed serialized data: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
