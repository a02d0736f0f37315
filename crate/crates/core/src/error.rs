use thiserror::Error;

/// Errors produced by the field-construction and diagnostic layers.
///
/// Validity of numeric parameters is enforced at construction time, so
/// most simulation paths are total; errors here are either structural
/// (mismatched shapes, empty inputs) or modeling preconditions the
/// catalog refuses to work around.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty selection")]
    EmptySelection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A path or configuration point does not record enough coordinates
    /// for the requested shift.
    #[error("point outside recorded domain: {0}")]
    DomainExceeded(String),

    #[error("operation not supported for this family: {0}")]
    UnsupportedFamily(String),

    /// A modeling assumption of the construction fails (transient class,
    /// degenerate kernel, missing full support).
    #[error("model precondition violated: {0}")]
    ModelPrecondition(String),

    /// The characteristic-function modulus never enters the usable band,
    /// so no scale can be fitted.
    #[error("characteristic-function fit unstable")]
    FitUnstable,

    /// The factor ledger contains `Unclassified` entries, so quantifier
    /// queries over it are meaningless.
    #[error("ledger contains unclassified entries")]
    IndeterminateLedger,

    #[error("internal assertion failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
