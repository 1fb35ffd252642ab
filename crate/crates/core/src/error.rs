use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("failed to parse scenario field `{field}`: {message}")]
    ScenarioParse { field: String, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty channel vector")]
    EmptyChannel,

    #[error("null space is trivial; need more emitters than readers")]
    TrivialNullspace,

    #[error("degenerate solution: every entry is below the modulus threshold")]
    DegenerateSolution,

    #[error("null space has dimension {0}, expected 1")]
    NullspaceDimension(usize),

    #[error("oracle restricted to small instances (null space dimension {0} > 2)")]
    OracleTooLarge(usize),

    #[error("heatmap grids differ")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
