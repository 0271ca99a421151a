use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad error classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Parse,
    Patch,
    Degenerate,
    Dimension,
    Internal,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Parse => "parse",
            ErrorCategory::Patch => "patch",
            ErrorCategory::Degenerate => "degenerate",
            ErrorCategory::Dimension => "dimension",
            ErrorCategory::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix (determinant ratio {ratio:.3e} below tolerance)")]
    SingularMatrix { ratio: f64 },

    #[error("pivot block M[alpha, omega] is singular")]
    SingularPivotBlock,

    #[error("index sets differ in cardinality ({0} vs {1})")]
    CardinalityMismatch(usize, usize),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("integer overflow in exact determinant")]
    IntegerOverflow,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown node {0}")]
    UnknownNode(String),

    #[error("unknown branch {0}")]
    UnknownBranch(String),

    #[error("spanning-tree count exceeds cap {cap} (enumerated {found} before stopping)")]
    TreeCountExceedsCap { cap: usize, found: usize },

    #[error("branch set {0:?} is not a spanning tree")]
    NotASpanningTree(Vec<usize>),

    #[error("tree determinant vanishes: not a spanning tree or invalid cut/cycle matrices")]
    ZeroTreeDeterminant,

    #[error("invalid cut/cycle pair: {0}")]
    InvalidPair(String),

    #[error("excluded projective point (0:0:1)")]
    ExcludedPoint,

    #[error("non-finite parameter value")]
    NonFinite,

    #[error("{model} model requires {requirement}; violated at branches {branches:?}")]
    PatchViolation {
        model: &'static str,
        requirement: &'static str,
        branches: Vec<usize>,
    },

    #[error("configurations are not projectively equal at branch {0}")]
    NotProjectivelyEqual(usize),

    #[error("open-circuit (Thévenin) side is degenerate")]
    DegenerateTheveninSide,

    #[error("short-circuit (Norton) side is degenerate")]
    DegenerateNortonSide,

    #[error("residual check failed: {which} residual {value:.3e} exceeds {limit:.3e}")]
    ResidualCheck {
        which: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("invalid controlled source: {0}")]
    InvalidCoupling(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate branch id {0}")]
    DuplicateBranch(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse { .. }
            | Error::DuplicateBranch(_)
            | Error::UnknownNode(_)
            | Error::UnknownBranch(_)
            | Error::InvalidGraph(_)
            | Error::ExcludedPoint
            | Error::NonFinite
            | Error::InvalidCoupling(_) => ErrorCategory::Parse,
            Error::PatchViolation { .. } => ErrorCategory::Patch,
            Error::SingularMatrix { .. }
            | Error::SingularPivotBlock
            | Error::DegenerateTheveninSide
            | Error::DegenerateNortonSide => ErrorCategory::Degenerate,
            Error::DimensionMismatch(_) | Error::CardinalityMismatch(..) => {
                ErrorCategory::Dimension
            }
            _ => ErrorCategory::Internal,
        }
    }
}
