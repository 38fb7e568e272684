//! Error type shared by every module in the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // order structures
    #[error("cycle detected in cover relation at `{0}`")]
    CycleDetected(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("size limit exceeded: {0}")]
    SizeLimitExceeded(String),
    #[error("`{0}` and `{1}` are not comparable")]
    NotComparable(String, String),
    #[error("lattice is not ranked: {0}")]
    NotRanked(String),
    #[error("missing weight for element `{0}`")]
    MissingWeight(String),
    #[error("empty set where a nonempty one is required")]
    EmptySet,

    // matroids
    #[error("basis exchange axiom violated: {0}")]
    ExchangeAxiomViolation(String),
    #[error("bases list is empty")]
    EmptyBasesList,
    #[error("element `{0}` is a loop")]
    LoopElement(String),

    // complexes
    #[error("rank gap detected: {0}")]
    RankGapDetected(String),
    #[error("not a face: {0}")]
    NotAFace(String),
    #[error("nonpositive weight: {0}")]
    NonpositiveWeight(String),

    // spectral
    #[error("isolated vertex `{0}` in skeleton")]
    IsolatedVertex(String),
    #[error("codimension too small: need at least 2, got {0}")]
    CodimTooSmall(usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("coloring is not strictly order-preserving: {0}")]
    NotOrderPreserving(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("regularity hypothesis violated: {0}")]
    RegularityViolated(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("cut is empty or full")]
    EmptyCut,
    #[error("graph is not bipartite: {0}")]
    NotBipartite(String),

    // lorentzian
    #[error("invalid s parameter: {0}")]
    InvalidS(String),
    #[error("not in the link: {0}")]
    NotInLink(String),
    #[error("evaluation too large: {0}")]
    ExponentialBlowup(String),
    #[error("wrong codimension: expected {expected}, got {got}")]
    WrongCodim { expected: usize, got: usize },
    #[error("unsupported coefficient system: {0}")]
    UnsupportedSystem(String),
    #[error("face is not contiguous: {0}")]
    NotContiguous(String),
    #[error("two-point coloring condition fails: {0}")]
    Phi2ConditionFailed(String),

    // sampler
    #[error("hypotheses not certified: {0}")]
    NotCertified(String),
    #[error("dimension must be even, got {0}")]
    OddDimension(usize),

    // plumbing
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
