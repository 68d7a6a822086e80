use thiserror::Error;

/// Errors raised by the library. `kind()` gives the stable machine-readable tag
/// used in CLI error JSON and FFI status codes.
#[derive(Debug, Error)]
pub enum GagliardoError {
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("kernel argument must be positive, got {0}")]
    SingularArgument(f64),

    #[error("energy is infinite for s = {s}, p = {p} (s*p >= 1)")]
    DivergentEnergy { s: f64, p: f64 },

    #[error("radius {r} must exceed 2*T*sqrt(d) = {min}")]
    InvalidRadius { r: f64, min: f64 },

    #[error(
        "jump at index {index} has multiplicity {multiplicity}; one-sided derivatives are infinite"
    )]
    CuspPoint { index: usize, multiplicity: usize },

    #[error("wrong regime: {0}")]
    WrongRegime(String),

    #[error("jump at index {index} is simple")]
    NotOverlapping { index: usize },

    #[error("line search failed {failures} consecutive times at iteration {iter}")]
    StalledDescent { iter: usize, failures: usize },

    #[error("iterate {iter} has overlapping jumps")]
    CuspEncountered { iter: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl GagliardoError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidConfiguration(_) => "InvalidConfiguration",
            Self::InvalidInterval { .. } => "InvalidInterval",
            Self::InvalidParams(_) => "InvalidParams",
            Self::SingularArgument(_) => "SingularArgument",
            Self::DivergentEnergy { .. } => "DivergentEnergy",
            Self::InvalidRadius { .. } => "InvalidRadius",
            Self::CuspPoint { .. } => "CuspPoint",
            Self::WrongRegime(_) => "WrongRegime",
            Self::NotOverlapping { .. } => "NotOverlapping",
            Self::StalledDescent { .. } => "StalledDescent",
            Self::CuspEncountered { .. } => "CuspEncountered",
            Self::Io(_) => "IOError",
            Self::Json(_) => "IOError",
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Self::DivergentEnergy { .. }
                | Self::StalledDescent { .. }
                | Self::CuspEncountered { .. }
                | Self::CuspPoint { .. }
                | Self::SingularArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, GagliardoError>;
