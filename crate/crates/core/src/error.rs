use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    MeshInvalid(String),

    #[error("right-hand side is not compatible: mean {mean:e} exceeds tolerance {tolerance:e}")]
    NotSolvable { mean: f64, tolerance: f64 },

    #[error("linear solver failure: {0}")]
    SolverFailure(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("construction failed: {0}")]
    ConstructionFailure(String),

    #[error("evaluation diverged: {0}")]
    Diverged(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: String, iterations: usize },

    #[error("inadmissible input: {0}")]
    Inadmissible(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("mountain-pass path degenerated: peak sits on endpoint {0}")]
    DegeneratePath(usize),

    #[error("second solution collapsed onto the first (sup distance {distance:e})")]
    CollapsedToFirst { distance: f64 },

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("probe at alpha = {alpha}: {source}")]
    Probe {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolated(msg.into())
    }

    /// Wraps an error with the pipeline stage that produced it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Strips any stage labels and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } | Error::Probe { source, .. } => source.root(),
            other => other,
        }
    }
}
