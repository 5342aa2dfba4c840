use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unsupported factor for this operation: {0}")]
    UnsupportedFactor(String),

    #[error("unsupported representation tag {tag} for group {group}")]
    UnsupportedRep { tag: String, group: String },

    #[error("factor size out of supported range: {0}")]
    SizeOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("torus basis fails to commute (construction bug): residual {0:.3e}")]
    TorusNotCommuting(f64),

    #[error("exact polynomial division left a remainder (non-dominant label or Weyl enumeration bug)")]
    DivisionRemainder,

    #[error("negative coefficient for label {label:?} while peeling: input is not a character")]
    NotACharacter { label: Vec<i64> },

    #[error("character is not Weyl-symmetric at exponent {0:?}")]
    NotWeylSymmetric(Vec<i64>),

    #[error("non-dominant label {0:?}")]
    NonDominantLabel(Vec<i64>),

    #[error("quadrature-unstable invariant projection: residual {0:.3e} between resolutions")]
    QuadratureUnstable(f64),

    #[error("degenerate sampling: no generic sample found")]
    DegenerateSampling,

    #[error("arithmetic overflow in exact computation")]
    Overflow,

    #[error("{0}")]
    Invalid(String),
}
