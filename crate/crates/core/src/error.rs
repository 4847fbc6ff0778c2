use thiserror::Error;

use crate::semimodule::Closure;
use crate::semiring::SemiringKind;

/// Errors shared by every layer of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("semiring mismatch: {left} vs {right}")]
    SemiringMismatch {
        left: SemiringKind,
        right: SemiringKind,
    },

    #[error("invalid {kind} scalar: {reason}")]
    InvalidScalar { kind: SemiringKind, reason: String },

    #[error("ground sets do not match")]
    GroundMismatch,

    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    #[error("{0}")]
    DimensionMismatch(String),

    #[error("point `{0}` lies outside the support of the semimodule")]
    OutsideSupport(String),

    #[error("vector is not a member of the semimodule")]
    NotMember,

    #[error("semimodule is not admissible")]
    NotAdmissible,

    #[error("operation requires {expected} closure, semimodule uses {found}")]
    WrongClosure { expected: Closure, found: Closure },

    #[error("tabulated operator is inconsistent: {0}")]
    InconsistentTabulation(String),

    #[error("empty operator family")]
    EmptyFamily,

    #[error("matrix is not a semimetric: d = d◦d fails at ({x}, {y})")]
    NotSemimetric { x: String, y: String },

    #[error("triangle inequality fails on ({i}, {j}, {k})")]
    TriangleViolation { i: String, j: String, k: String },

    #[error("grid coordinates must be strictly increasing")]
    UnsortedCoords,

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
