use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("block {block} is not self-adjoint (residual {residual:.3e})")]
    NotSelfAdjoint { block: usize, residual: f64 },
    #[error("element of {found} used where {expected} was expected")]
    AlgebraMismatch { expected: String, found: String },
    #[error("invalid epimorphism: {0}")]
    InvalidEpimorphism(String),
    #[error("invalid Lip-norm: {0}")]
    InvalidLipNorm(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid metric space: {0}")]
    InvalidSpace(String),
    #[error("invalid tunnel: {0}")]
    InvalidTunnel(String),
    #[error("tunnels are not composable: {0}")]
    NotComposable(String),
    #[error("bridge condition fails on leg {leg}: quotient gap {gap:.3e} at {witness:?}")]
    BridgeConditionViolated { leg: char, gap: f64, witness: Vec<f64> },
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("linear program ended with status {0}")]
    Lp(String),
    #[error("{0}")]
    SizeCap(String),
    #[error("empty tunnel family")]
    EmptyFamily,
    #[error("journey is broken between legs {0} and {1}")]
    BrokenJourney(usize, usize),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<crate::lp::LpError> for Error {
    fn from(e: crate::lp::LpError) -> Self {
        Error::Lp(e.to_string())
    }
}
