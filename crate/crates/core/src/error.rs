use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JiggleError {
    #[error("vertex index {index} out of range (complex has {count} vertices)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("simplices {a:?} and {b:?} meet in a non-face")]
    FaceIntersectionViolation { a: Vec<usize>, b: Vec<usize> },
    #[error("degenerate simplex {0:?}")]
    DegenerateSimplex(Vec<usize>),
    #[error("query is not contained in the complex")]
    QueryNotInComplex,
    #[error("spanning set is rank deficient")]
    RankDeficient,
    #[error("ambient dimensions differ ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("plane is not a graph over the chart center")]
    OutsideChart,
    #[error("collar too small: {0}")]
    CollarTooSmall(String),
    #[error("maps are defined on different domains")]
    DomainMismatch,
    #[error("faces are not opposing faces of the simplex")]
    NotOpposingFaces,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("simplex is not transverse to the plane")]
    NotTransverse,
    #[error("infeasible dimensions: flat of dimension {flat} in a search domain of dimension {domain}")]
    InfeasibleDimensions { flat: usize, domain: usize },
    #[error("star simplex {0} is not transverse to every foliation")]
    StarNotTransverse(usize),
    #[error("no level up to {0} meets the oscillation requirement")]
    LevelExhausted(u32),
    #[error("perturbation failed at vertex {vertex}: {reason}")]
    PerturbationFailed { vertex: usize, reason: String },
    #[error("map is no longer a piecewise embedding")]
    EmbeddingLost,
    #[error("vertex {0} left its carrier face")]
    SkeletonViolation(usize),
    #[error("image volume {image} differs from domain volume {domain}")]
    VolumeMismatch { image: f64, domain: f64 },
    #[error("budget violation: {0}")]
    BudgetViolation(String),
    #[error("unsupported ambient dimension {0}")]
    UnsupportedDimension(usize),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, JiggleError>;
