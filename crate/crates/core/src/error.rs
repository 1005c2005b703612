use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible spectral models")]
    IncompatibleModels,

    #[error("point outside the model domain: {0}")]
    Domain(String),

    #[error("point kind does not match the model (expected {expected})")]
    PointKind { expected: &'static str },

    #[error("multiplier is not finite at node {node} (eigenvalue {eigenvalue})")]
    NonFiniteMultiplier { node: usize, eigenvalue: f64 },

    #[error("empty function")]
    EmptyFunction,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("t-grid must avoid t=0 (zero Plancherel weight)")]
    OddTGrid,

    #[error("functional {functional}: total mass {mass} outside [{lower}, {upper}]")]
    MassBound {
        functional: usize,
        mass: f64,
        lower: f64,
        upper: f64,
    },

    #[error("pure-derivative sampling requires spectrum bounded away from zero")]
    PureMultiplierUnbounded,

    #[error("frame not certified; inversion undefined")]
    NotCertified,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty lattice")]
    EmptyLattice,

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
