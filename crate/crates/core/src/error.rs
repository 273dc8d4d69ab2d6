use thiserror::Error;

/// Errors raised by the library. Inequality violations are never errors;
/// they are reported through [`crate::bounds::CheckReport`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PottsError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("vertex {vertex} out of range (tree has {count} vertices)")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("color {color} out of range for q = {q}")]
    ColorOutOfRange { color: usize, q: usize },

    #[error("{free} free vertices exceed the brute-force cap of {cap}")]
    TooManyFreeVertices { free: usize, cap: usize },

    #[error("vertex {vertex} has {children} children, degree bound allows {max}")]
    DegreeBound { vertex: usize, children: usize, max: usize },

    #[error("vertex {0} is fixed by the boundary condition")]
    FixedVertex(usize),

    #[error("invalid vector: {0}")]
    InvalidVector(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("input parse error: {0}")]
    Parse(String),

    #[error("explicit tree would need {needed} vertices, cap is {cap}")]
    TreeTooLarge { needed: u128, cap: usize },
}

pub type Result<T, E = PottsError> = std::result::Result<T, E>;
