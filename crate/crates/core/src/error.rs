use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("derivative order {order} exceeds the cap {cap}")]
    OrderTooLarge { order: usize, cap: usize },

    #[error("jets differ in base point, order or precision")]
    MismatchedJets,

    #[error("division by a jet whose value {0:e} is below the singularity threshold")]
    NearSingular(f64),

    #[error("need derivatives through order {needed}, got {got}")]
    InsufficientDerivatives { needed: usize, got: usize },

    #[error("function value must be positive, got {0:e}")]
    NonPositiveValue(f64),

    #[error("pole at x = {0}")]
    Pole(f64),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("no integral representation for alpha = {alpha}, x = {x}")]
    Branch { alpha: f64, x: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
