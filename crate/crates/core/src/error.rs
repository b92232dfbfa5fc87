use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty phrase after normalization")]
    EmptyPhrase,
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("negative triples cannot carry a confidence value")]
    ConfidenceOnNegative,
    #[error("confidence split requires a confidence on every positive (missing at index {0})")]
    MissingConfidence(usize),
    #[error("requested dev {dev} + test {test} triples but the corpus has {available}")]
    SplitTooLarge { dev: usize, test: usize, available: usize },
    #[error("the {0} pool needs at least 2 distinct values to draw swaps from")]
    PoolTooSmall(&'static str),
    #[error("embedding dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("duplicate word `{0}` in embedding table")]
    DuplicateWord(String),
    #[error("non-finite embedding value for `{0}`")]
    NonFiniteEmbedding(String),
    #[error("triple has no in-vocabulary token on its {0} side")]
    Unscorable(&'static str),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("{0} is undefined for constant input")]
    ConstantInput(&'static str),
    #[error("kappa is undefined when chance agreement is 1")]
    DegenerateKappa,
    #[error("dev set must contain both positive and negative labels")]
    SingleClass,
    #[error("non-finite gradient in tensor `{0}`")]
    NonFiniteGradient(String),
    #[error("training diverged at epoch {epoch}: non-finite loss")]
    Diverged { epoch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("tensor `{name}` has {found} values, expected {expected}")]
    TensorShape { name: String, expected: usize, found: usize },
}
