use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid Coxeter matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{wb} is not below {wt} in the Bruhat order")]
    NotBelow { wb: String, wt: String },
    #[error("interval size cap of {cap} elements exceeded")]
    SizeCap { cap: usize },
    #[error("rank bounds violated: {0}")]
    RankBounds(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("chain complex check failed: {0}")]
    ChainComplex(String),
    #[error("CSS orthogonality violated: {0}")]
    Orthogonality(String),
    #[error("weight reduction: {0}")]
    WeightReduction(String),
    #[error("kernel dimension {dim} exceeds cap {cap}")]
    KernelCap { dim: usize, cap: usize },
    #[error("code has no logical qubits")]
    NoLogicals,
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable name of the variant, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::InvalidMatrix(_) => "invalid-matrix",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotBelow { .. } => "not-below",
            Error::SizeCap { .. } => "size-cap",
            Error::RankBounds(_) => "rank-bounds",
            Error::Structural(_) => "structural",
            Error::ChainComplex(_) => "chain-complex",
            Error::Orthogonality(_) => "orthogonality",
            Error::WeightReduction(_) => "weight-reduction",
            Error::KernelCap { .. } => "kernel-cap",
            Error::NoLogicals => "no-logicals",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
