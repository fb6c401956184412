use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown space {0:?}")]
    UnknownSpace(String),
    #[error("unknown level {level:?} on space {space:?}")]
    UnknownLevel { space: String, level: String },
    #[error("unknown atom {atom:?} in space {space:?}")]
    UnknownAtom { space: String, atom: String },
    #[error("no projection from {source_space:?} to {target:?}")]
    UnknownProjection { source_space: String, target: String },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("malformed structure: {0}")]
    Malformed(String),
    #[error("set is not measurable at level {0:?}")]
    NotMeasurable(String),
    #[error("levels are not nested: {0}")]
    NotNested(String),
    #[error("conditioning set has measure zero")]
    ZeroMeasure,
    #[error("invalid charge: {0}")]
    InvalidCharge(String),
    #[error("inconsistent witness: {0}")]
    Inconsistent(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("value {value} outside extension range [{low}, {high}]")]
    OutOfRange { value: String, low: String, high: String },
    #[error("size bound exceeded: {0}")]
    TooLarge(String),
    #[error("linear system is infeasible")]
    Infeasible,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid recipe: {0}")]
    Recipe(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
