use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spectrum is empty: no eigenvalue satisfies |lambda| <= {cutoff} with mass {mass}")]
    EmptySpectrum { cutoff: f64, mass: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("eigenvalue {value} lies inside the mass gap (mass {mass})")]
    MassGapViolation { value: f64, mass: f64 },

    #[error("positive branch is not nondecreasing at position {position}")]
    NotSorted { position: usize },

    #[error("spectrum does not match the model parameters: {0}")]
    SpectrumMismatch(String),

    #[error("index {0} is out of range")]
    IndexOutOfRange(i64),

    #[error("invalid interval: require a < b, got a = {a}, b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid softening function: {0}")]
    InvalidSoftening(String),

    #[error("negative sample f({t}) = {value}; softening functions must be nonnegative")]
    NegativeSample { t: f64, value: f64 },

    #[error(
        "quadrature failed at lambda = {lambda}: error estimate {estimate:e} above tolerance {tolerance:e}"
    )]
    QuadratureFailure {
        lambda: f64,
        estimate: f64,
        tolerance: f64,
    },

    #[error("eigenvalue {lambda} is below the mass gap (mass {mass})")]
    BelowMassGap { lambda: f64, mass: f64 },

    #[error("states are not comparable: {0}")]
    CutoffMismatch(String),

    #[error("series needs at least {need} modes, got {have}")]
    InsufficientModes { have: usize, need: usize },

    #[error("invalid sub-slab: require {a} < {a_sub} < {b_sub} < {b}")]
    InvalidSubslab {
        a: f64,
        b: f64,
        a_sub: f64,
        b_sub: f64,
    },

    #[error("time {t} lies outside the slab ({a}, {b})")]
    PointOutsideSlab { t: f64, a: f64, b: f64 },

    #[error("Fock oracle is limited to {max} modes, requested {requested}")]
    TooManyModes { requested: usize, max: usize },

    #[error("mode data mismatch: {0}")]
    ModeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Stable identifier used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySpectrum { .. } => "EmptySpectrum",
            Error::InvalidParams(_) => "InvalidParams",
            Error::MassGapViolation { .. } => "MassGapViolation",
            Error::NotSorted { .. } => "NotSorted",
            Error::SpectrumMismatch(_) => "SpectrumMismatch",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::InvalidInterval { .. } => "InvalidInterval",
            Error::InvalidSoftening(_) => "InvalidSoftening",
            Error::NegativeSample { .. } => "NegativeSample",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::BelowMassGap { .. } => "BelowMassGap",
            Error::CutoffMismatch(_) => "CutoffMismatch",
            Error::InsufficientModes { .. } => "InsufficientModes",
            Error::InvalidSubslab { .. } => "InvalidSubslab",
            Error::PointOutsideSlab { .. } => "PointOutsideSlab",
            Error::TooManyModes { .. } => "TooManyModes",
            Error::ModeMismatch(_) => "ModeMismatch",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse { .. } => "ParseError",
        }
    }
}
