use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid morphology: {0}")]
    InvalidMorphology(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("degenerate band [{b}, {a}]: band-match needs a > b")]
    DegenerateBand { b: f64, a: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("numerical conditioning: {0}")]
    NumericalConditioning(String),

    #[error("non-finite value during {0}")]
    NonFinite(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
