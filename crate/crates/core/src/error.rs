use thiserror::Error;

/// Failure classes shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dust-like systems need at least two maps, got {0}")]
    TooFewMaps(usize),

    #[error("contraction ratio {0} is not in (0,1)")]
    RatioOutOfRange(String),

    #[error("ratios are not commensurable")]
    NotCommensurable,

    #[error("masses belong to different Moran contexts")]
    ContextMismatch,

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("strong separation could not be certified: {0}")]
    SscUnverifiable(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("one word is a prefix of the other")]
    PrefixOverlap,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no feasible step constant c <= {c_max}; last failure: {instance}")]
    NoFeasibleC { c_max: u32, instance: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("address of length {len} does not reach cut level {level}")]
    AddressTooShort { len: usize, level: u32 },

    #[error("the kept region does not meet the image")]
    EmptyIntersection,

    #[error("hypothesis not applicable: {0}")]
    HypothesisNotApplicable(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
