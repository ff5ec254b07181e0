use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty label")]
    EmptyLabel,
    #[error("malformed component `{component}` in label `{label}`")]
    MalformedComponent { label: String, component: String },
    #[error("`O` combined with other components in label `{0}`")]
    MixedOutside(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label schema has no `O` label")]
    MissingOutside,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label id {0} is outside the schema")]
    LabelOutOfRange(usize),
    #[error("malformed count key `{0}`")]
    MalformedKey(String),
    #[error("empty token sequence")]
    EmptySequence,
    #[error("no label sequence satisfies the transition mask")]
    NoValidSequence,
    #[error("sequence {sequence}: invalid BIO transition at position {position}")]
    InvalidTransition { sequence: usize, position: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("constraint has no coefficients")]
    EmptyConstraint,
    #[error("constraint {index} has invalid penalty {value}")]
    InvalidPenalty { index: usize, value: f64 },
    #[error("iteration budget must be at least 1")]
    ZeroIterations,
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("learning rate must be non-negative and finite, got {0}")]
    InvalidLearningRate(f64),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("instance has more than {bound} candidate sequences")]
    EnumerationBound { bound: u64 },
    #[error("no label sequence satisfies the hard constraints")]
    Infeasible,
    #[error("no iteration caps given")]
    EmptyCaps,
    #[error("iteration caps must be ascending")]
    UnsortedCaps,
}
