use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("family parameters must be positive and strictly decreasing: {0}")]
    NonStrictFamily(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("point has x_{axis} = 0; elliptic chart degenerates (roots {lambda:?})")]
    DegenerateChart { axis: usize, lambda: Vec<f64> },

    #[error("elliptic coordinates do not interlace with the family parameters")]
    InterlacingViolated,

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("ellipsoid parameter ordering violated: {0}")]
    OrderingViolated(String),

    #[error("point lies outside the Klein model ellipsoid (f = {f})")]
    OutsideModel { f: f64 },

    #[error("polynomial vanishes at the origin; the series expansion is undefined")]
    ZeroAtOrigin,

    #[error("series order {available} is below the required {needed}")]
    InsufficientOrder { needed: usize, available: usize },

    #[error("a curve parameter equals zero")]
    ZeroParameter,

    #[error("unsupported singularity: {0}")]
    HigherMultiplicity(String),

    #[error("no root of the period indicator in the bracket [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },

    #[error("grazing impact (transversality {transversality:e})")]
    TangentialImpact { transversality: f64 },

    #[error("point is not on the boundary (level residual {residual:e})")]
    NotOnBoundary { residual: f64 },

    #[error("trajectory left the Klein model (f = {f})")]
    LeftModel { f: f64 },

    #[error("energy {h} does not exceed the potential {v} at the evaluation point")]
    EnergyBelowPotential { h: f64, v: f64 },

    #[error("tensor L = B - x x^T is singular at the evaluation point")]
    SingularL,

    #[error("elliptic coordinates coincide; evaluation needs the confluent route")]
    CoincidentLambdas,

    #[error("potential is not separable (integrability defect {defect:e})")]
    NotSeparable { defect: f64 },

    #[error("basis normalization leaves a kernel of dimension {kernel}")]
    UnderdeterminedNormalization { kernel: usize },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error("bad parameter `{key}`: {expected}")]
    BadParameter { key: String, expected: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Distinct process exit status per error kind. Zero is reserved for success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonStrictFamily(_) => 10,
            Error::InvalidParameters(_) => 11,
            Error::DegenerateChart { .. } => 12,
            Error::InterlacingViolated => 13,
            Error::ZeroDirection => 14,
            Error::OrderingViolated(_) => 15,
            Error::OutsideModel { .. } => 16,
            Error::ZeroAtOrigin => 20,
            Error::InsufficientOrder { .. } => 21,
            Error::ZeroParameter => 22,
            Error::HigherMultiplicity(_) => 23,
            Error::NoRootInBracket { .. } => 24,
            Error::TangentialImpact { .. } => 30,
            Error::NotOnBoundary { .. } => 31,
            Error::LeftModel { .. } => 32,
            Error::EnergyBelowPotential { .. } => 33,
            Error::Integration(_) => 34,
            Error::SingularL => 40,
            Error::CoincidentLambdas => 50,
            Error::NotSeparable { .. } => 51,
            Error::UnderdeterminedNormalization { .. } => 52,
            Error::UnknownCommand(_) => 60,
            Error::BadParameter { .. } => 61,
            Error::Parse(_) => 62,
            Error::Io(_) => 70,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonStrictFamily(_) => "NonStrictFamily",
            Error::InvalidParameters(_) => "InvalidParameters",
            Error::DegenerateChart { .. } => "DegenerateChart",
            Error::InterlacingViolated => "InterlacingViolated",
            Error::ZeroDirection => "ZeroDirection",
            Error::OrderingViolated(_) => "OrderingViolated",
            Error::OutsideModel { .. } => "OutsideModel",
            Error::ZeroAtOrigin => "ZeroAtOrigin",
            Error::InsufficientOrder { .. } => "InsufficientOrder",
            Error::ZeroParameter => "ZeroParameter",
            Error::HigherMultiplicity(_) => "HigherMultiplicity",
            Error::NoRootInBracket { .. } => "NoRootInBracket",
            Error::TangentialImpact { .. } => "TangentialImpact",
            Error::NotOnBoundary { .. } => "NotOnBoundary",
            Error::LeftModel { .. } => "LeftModel",
            Error::EnergyBelowPotential { .. } => "EnergyBelowPotential",
            Error::Integration(_) => "Integration",
            Error::SingularL => "SingularL",
            Error::CoincidentLambdas => "CoincidentLambdas",
            Error::NotSeparable { .. } => "NotSeparable",
            Error::UnderdeterminedNormalization { .. } => "UnderdeterminedNormalization",
            Error::UnknownCommand(_) => "UnknownCommand",
            Error::BadParameter { .. } => "BadParameter",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
