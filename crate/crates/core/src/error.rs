use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("training data is empty")]
    EmptyData,

    #[error("feature arity mismatch: expected {expected}, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("categorical code {code} out of range for feature {feature} (cardinality {cardinality})")]
    CategoryOutOfRange {
        feature: usize,
        code: u32,
        cardinality: u32,
    },

    #[error("label value {value} out of range at position {position} (cardinality {cardinality})")]
    LabelOutOfRange {
        position: usize,
        value: u32,
        cardinality: u32,
    },

    #[error("expected {expected} label positions, got {got}")]
    LabelArity { expected: usize, got: usize },

    #[error("numeric value expected for feature {0}")]
    ExpectedNumeric(usize),

    #[error("categorical value expected for feature {0}")]
    ExpectedCategorical(usize),

    #[error("sequence `{id}` has length {len}, at least {need} required")]
    SequenceTooShort { id: String, len: usize, need: usize },

    #[error("sequence `{id}` is malformed: {reason}")]
    MalformedSequence { id: String, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("only {distinct} distinct points available for k = {k}")]
    TooFewPoints { distinct: usize, k: usize },

    #[error("non-finite coordinate at index {0}")]
    NonFiniteCoordinate(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("label order is not a permutation of 0..{0}")]
    InvalidOrder(usize),

    #[error("dataset has {0} instances, at least 2 required")]
    TooFewInstances(usize),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("dataset `{name}` is invalid: {violations} violation(s), first: {first}")]
    InvalidDataset {
        name: String,
        violations: usize,
        first: String,
    },

    #[error("cell ({dataset}, {method}) failed: {source}")]
    Cell {
        dataset: String,
        method: String,
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
