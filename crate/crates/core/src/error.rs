use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),

    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("vector norm {0:e} is below the degeneracy threshold")]
    DegenerateVector(f64),

    #[error("edge {edge} ({tail}, {head}) has coincident endpoints")]
    CoincidentPoints { edge: usize, tail: usize, head: usize },

    #[error("all points coincide; the configuration has no scaling direction")]
    DegenerateConfiguration,

    #[error("centered target configuration is zero")]
    DegenerateTarget,

    #[error("no bearing given for edge ({0}, {1})")]
    MissingBearing(usize, usize),

    #[error("bearing on ({0}, {1}) is given but ({0}, {1}) is not an edge")]
    BearingOnNonEdge(usize, usize),

    #[error("bearing on ({tail}, {head}) has norm {norm}, expected 1")]
    NonUnitBearing { tail: usize, head: usize, norm: f64 },

    #[error("bearings on ({0}, {1}) and ({1}, {0}) are not opposite")]
    AntisymmetryViolation(usize, usize),

    #[error("bearing on ({tail}, {head}) has {actual} components, expected {expected}")]
    BearingDimension { tail: usize, head: usize, expected: usize, actual: usize },

    #[error("graph is not connected")]
    DisconnectedGraph,

    #[error("follower set is empty")]
    EmptyFollowerSet,

    #[error("follower block of the bearing Laplacian is singular")]
    SingularFollowerBlock,

    #[error("at least 2 anchors are required, got {0}")]
    TooFewAnchors(usize),

    #[error("invalid integrator setting: {0}")]
    InvalidIntegrator(String),

    #[error("scenario generation failed: {0}")]
    GenerationFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.into(),
        message: message.into(),
    }
}
