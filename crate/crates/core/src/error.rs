use thiserror::Error;

/// Errors produced by the band, dimension and measure machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid partial quotient {0}: quotients must be >= 1")]
    InvalidQuotient(String),
    #[error("frequency has no period; only eventually periodic expansions are supported")]
    UnsupportedAperiodic,
    #[error("malformed continued fraction `{0}`")]
    Syntax(String),
    #[error("quotient a_{index} requested beyond the {available} quotients of a truncated expansion")]
    TruncatedExpansion { index: usize, available: usize },
    #[error("CouplingTooSmall: band machinery requires V > 20, got {0}")]
    CouplingTooSmall(f64),
    #[error("invalid coupling {0}")]
    InvalidCoupling(String),
    #[error("precision {0} bits is below the 64-bit minimum")]
    InvalidPrecision(u32),
    #[error("invalid trace label (k={level}, p={power})")]
    InvalidLabel { level: u32, power: i64 },
    #[error("value outside [-2,2]: |x|={0}")]
    DomainViolation(String),
    #[error("bracket failure while locating band {path}: {reason}")]
    BracketFailure { path: String, reason: String },
    #[error("bisection stalled above tolerance while locating band {path}")]
    PrecisionExhausted { path: String },
    #[error("inadmissible path {0}")]
    InadmissiblePath(String),
    #[error("derivative vanished at rung {rung}")]
    ZeroDerivative { rung: usize },
    #[error("NotContractive: generation contains a band of length {0} >= 1")]
    NotContractive(f64),
    #[error("empty generation")]
    EmptyGeneration,
    #[error("tree depth {depth} does not reach scale {scale}")]
    InsufficientDepth { depth: u32, scale: f64 },
    #[error("order {0} has not been enumerated")]
    OrderUnavailable(u32),
    #[error("Perron root at x=1 is {0} < 1; no unit root in (0,1]")]
    NoRootInUnitInterval(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
