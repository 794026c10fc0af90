use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(char),
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(char),
    #[error("symbol index {index} out of range for alphabet of size {size}")]
    SymbolOutOfRange { index: usize, size: usize },
    #[error("product alphabet of size {0} exceeds the 65536-symbol limit")]
    ProductTooLarge(u64),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no complete block of length {ell} in a string of length {len}")]
    NoCompleteBlock { ell: usize, len: usize },
    #[error("count table with {0} cells exceeds the configured cap")]
    TableTooLarge(u128),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("zero marginal for oracle block {0:?}")]
    ZeroMarginal(String),
    #[error("KL divergence undefined: q vanishes where p = {0}")]
    SupportViolation(f64),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid gambler: {0}")]
    InvalidGambler(String),
    #[error("oracle too short: need {needed} symbols, have {have}")]
    OracleTooShort { needed: usize, have: usize },
    #[error("cover grid has {size} representatives, cap is {cap}")]
    GridTooLarge { size: u128, cap: usize },
    #[error("stage {stage}: threshold scan reached its cap of {cap} symbols")]
    CapExhausted {
        stage: usize,
        cap: usize,
        log: Box<crate::stages::StageLog>,
    },
    #[error("resource exhausted: {0}")]
    ResourceExhausted(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by running out of memory or a size limit,
    /// as opposed to a logic or input error.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::ResourceExhausted(_) | Error::TableTooLarge(_) | Error::GridTooLarge { .. }
        )
    }
}
