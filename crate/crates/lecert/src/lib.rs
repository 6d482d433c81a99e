//! Equisingularity certificates for one-parameter polynomial families with
//! a line singularity along the z1-axis.
//!
//! Everything combinatorial (Newton polyhedra, Newton numbers, Le numbers)
//! is computed in exact rational/integer arithmetic; floating point shows up
//! only in the numerical regularity probe and in witness searches, never in
//! a certified quantity.

pub mod admissibility;
pub mod certify;
pub mod colength;
pub mod le;
pub mod newton;
pub mod nondegen;
pub mod numeric;
pub mod parse;
pub mod poly;
pub mod probe;

/// Crate-wide error type. Inconclusive analysis outcomes are values, not
/// errors; errors mean the requested computation could not be carried out.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("evaluation overflowed to a non-finite value")]
    NonFinite,
    #[error("point has {got} coordinates, expected {want}")]
    DimensionMismatch { want: usize, got: usize },
    #[error("Newton number undefined: {0}")]
    NewtonNumberUndefined(String),
    #[error("no z1-free vertex on the Newton boundary")]
    NoZ1FreeVertex,
    #[error("equality mu = nu not certified: {0}")]
    MuNuNotCertified(String),
    #[error("stabilization not reached: no exponent <= {cap} passes the window test ({detail})")]
    StabilizationNotReached { cap: u32, detail: String },
    #[error("ILM extraction failed: {0}")]
    IlmExtraction(String),
    #[error("arc generation failed: {0}")]
    ArcGeneration(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integer overflow in exact computation: {0}")]
    Overflow(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
