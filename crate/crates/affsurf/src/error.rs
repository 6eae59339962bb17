use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point ({x1}, {x2}) is outside the domain (x1 > 0 required)")]
    Domain { x1: f64, x2: f64 },
    #[error("operation not supported for {0} surfaces")]
    UnsupportedKind(&'static str),
    #[error("expected Ricci rank {expected}, found {found}")]
    Rank { expected: usize, found: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("vanishing denominator in {0}")]
    Division(&'static str),
    #[error("surface is flat")]
    FlatSurface,
    #[error("type B surface could not be matched to a normal form")]
    UnclassifiedTypeB,
    #[error("expression leaves the function dictionary: {0}")]
    DictionaryOverflow(&'static str),
    #[error("brackets do not close on the basis (residual {0:e})")]
    NotClosed(f64),
    #[error("structure constants violate the Jacobi identity (residual {0:e})")]
    Jacobi(f64),
    #[error("verification of {what} failed (residual {residual:e})")]
    Verification { what: String, residual: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("invalid input: {0}")]
    Parse(String),
    #[error("metric is near-degenerate (|det| = {0:e})")]
    Conditioning(f64),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
