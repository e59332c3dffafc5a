use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("free variable `{0}`")]
    FreeVariable(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("incompatible index: {0}")]
    IncompatibleIndex(String),
    #[error("policy error: {0}")]
    Policy(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("sparsity violation at {site}")]
    SparsityViolation { site: String },
    #[error("insufficient tree: {0}")]
    InsufficientTree(String),
    #[error("coloring is not transitive: {0}")]
    NotTransitive(String),
    #[error("no solution found (exhaustive: {exhaustive})")]
    NotFound { exhaustive: bool },
    #[error("not tabulated: {0}")]
    NotTabulated(String),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn limit(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }

    pub fn sparsity(site: impl Into<String>) -> Self {
        Error::SparsityViolation { site: site.into() }
    }

    pub fn at_stage(self, stage: &str) -> Self {
        Error::Stage { stage: stage.to_string(), source: Box::new(self) }
    }

    /// Strips stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
