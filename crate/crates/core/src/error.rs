use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("subsystem name `{0}` appears more than once")]
    NameCollision(String),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("subsystem `{0}` must have a positive dimension")]
    EmptySubsystem(String),

    #[error("level index {index} out of range for dimension {dim}")]
    LevelOutOfRange { index: usize, dim: usize },

    #[error("rotation levels must differ (both are {0})")]
    EqualLevels(usize),

    #[error("states live on different spaces")]
    SpaceMismatch,

    #[error("measurement level set is empty")]
    EmptyLevelSet,

    #[error("forced measurement branch has probability {0:e}")]
    ZeroProbabilityBranch(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown pulse name `{0}`")]
    UnknownPulse(String),

    #[error("pair {pair_index} not captured within {max_trials} trials")]
    Exhausted { pair_index: u64, max_trials: u64 },
}
