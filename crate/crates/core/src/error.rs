use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidPrecision(String),
    #[error("degenerate Legendre parameter: {0}")]
    DegenerateLambda(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("argument lies on a lattice point (pole of the Weierstrass function)")]
    PoleAtLatticePoint,
    #[error("imaginary part of tau too small for the q-expansion: {0}")]
    InsufficientImaginaryPart(f64),
    #[error("point does not satisfy the Legendre equation")]
    NotOnCurve,
    #[error("points belong to different curves")]
    ParentMismatch,
    #[error("rational coordinate size {bits} bits exceeds cap {cap}")]
    CoordinateBlowup { bits: u64, cap: u64 },
    #[error("invalid discriminant {0}")]
    InvalidDiscriminant(i64),
    #[error("level {0} exceeds the modular polynomial cap {1}")]
    LevelTooLarge(u32, u32),
    #[error("parse error at position {position}: {reason}")]
    Parse { position: usize, reason: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("both parameter maps are constant")]
    ConstantMapDegenerate,
    #[error("curve is not asymmetric (deg X = {deg_x}, deg Y = {deg_y}); pass the override flag to scan anyway")]
    NotAsymmetric { deg_x: u64, deg_y: u64 },
    #[error("genericity hypothesis fails: {0}")]
    GenericityFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
