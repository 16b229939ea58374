use thiserror::Error;

use crate::curves::CurveValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library. [`Error::code`] yields the stable
/// machine-readable name used by the CLI and the HTTP layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("too few points: got {got}, need at least {need}")]
    TooFewPoints { got: usize, need: usize },

    #[error("fitted curve is not a smooth Jordan curve (immersed={}, simple={}, turning number {})",
        .0.immersed, .0.simple, .0.turning_number)]
    FitProducesInvalidCurve(Box<CurveValidationReport>),

    #[error("curve is not a smooth Jordan curve (immersed={}, simple={}, turning number {})",
        .0.immersed, .0.simple, .0.turning_number)]
    InvalidCurve(Box<CurveValidationReport>),

    #[error("malformed curve: {0}")]
    MalformedCurve(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("points {i} and {j} coincide (distance {distance:e})")]
    RepeatedPoints { i: usize, j: usize, distance: f64 },

    #[error("point {index} is off the unit circle (|z| = {modulus})")]
    NotOnUnitCircle { index: usize, modulus: f64 },

    #[error("theta = {theta} is outside (0, 2pi/{n})")]
    ThetaOutOfRange { n: usize, theta: f64 },

    #[error("points are not concyclic")]
    NotConcyclic,

    #[error("interpolation nodes {i} and {j} coincide")]
    RepeatedNodes { i: usize, j: usize },

    #[error("system is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("{count} nodes exceeds the supported maximum of {max}")]
    TooManyNodes { count: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point {index} is zero; negative powers are undefined")]
    ZeroPoint { index: usize },

    #[error("configuration is not interleaved on the unit circle")]
    NotInterleaved,

    #[error("left nullspace is not one-dimensional (singular values {singular_values:?})")]
    NullspaceNotOneDimensional { singular_values: Vec<f64> },

    #[error("normalized form coefficient {index} is not positive real ({value})")]
    NotPositive { index: usize, value: String },

    #[error("pullback identity fails (defect {defect:e})")]
    PullbackMismatch { defect: f64 },

    #[error("cross-ratio of non-distinct points")]
    DegenerateCrossRatio,

    #[error("could not generate a valid curve after {attempts} attempts")]
    CurveGenerationFailed { attempts: usize },

    #[error("degree {degree} does not match configuration with n = {n} (need degree n - 1)")]
    DegreeMismatch { degree: usize, n: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::FitProducesInvalidCurve(_) => "FitProducesInvalidCurve",
            Error::InvalidCurve(_) => "InvalidCurve",
            Error::MalformedCurve(_) => "MalformedCurve",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::RepeatedPoints { .. } => "RepeatedPoints",
            Error::NotOnUnitCircle { .. } => "NotOnUnitCircle",
            Error::ThetaOutOfRange { .. } => "ThetaOutOfRange",
            Error::NotConcyclic => "NotConcyclic",
            Error::RepeatedNodes { .. } => "RepeatedNodes",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::TooManyNodes { .. } => "TooManyNodes",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::ZeroPoint { .. } => "ZeroPoint",
            Error::NotInterleaved => "NotInterleaved",
            Error::NullspaceNotOneDimensional { .. } => "NullspaceNotOneDimensional",
            Error::NotPositive { .. } => "NotPositive",
            Error::PullbackMismatch { .. } => "PullbackMismatch",
            Error::DegenerateCrossRatio => "DegenerateCrossRatio",
            Error::CurveGenerationFailed { .. } => "CurveGenerationFailed",
            Error::DegreeMismatch { .. } => "DegreeMismatch",
            Error::InvalidOption(_) => "InvalidOption",
            Error::Json(_) => "MalformedJson",
        }
    }

    /// Input that parsed but is mathematically unusable, as opposed to
    /// input that could not be read at all.
    pub fn is_math_input(&self) -> bool {
        !matches!(
            self,
            Error::Json(_) | Error::MalformedCurve(_) | Error::InvalidOption(_)
        )
    }
}
