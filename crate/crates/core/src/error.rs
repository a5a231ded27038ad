use thiserror::Error;

pub type Result<T> = std::result::Result<T, GlError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlError {
    #[error("point {t} outside domain [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },
    #[error("warping function not positive at t = {t} (f = {f})")]
    NonPositive { t: f64, f: f64 },
    #[error("dimension must satisfy {need}, got {got}")]
    Dimension { need: &'static str, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("scalar curvature floor violated: min {min} at t = {at}, floor {floor}")]
    FloorViolation { min: f64, at: f64, floor: f64 },
    #[error("collar scale underflow: alpha = 10^{log10_alpha:.1} is below the representable range")]
    CollarScaleUnderflow { log10_alpha: f64 },
    #[error("curve left the closed first quadrant at s = {s}")]
    LeftQuadrant { s: f64 },
    #[error("admissibility condition ({0}) violated: {1}")]
    NotAdmissible(u8, String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("matrix not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for GlError {
    fn from(e: std::io::Error) -> Self {
        GlError::Io(e.to_string())
    }
}

impl From<csv::Error> for GlError {
    fn from(e: csv::Error) -> Self {
        GlError::Format(e.to_string())
    }
}

impl From<serde_json::Error> for GlError {
    fn from(e: serde_json::Error) -> Self {
        GlError::Format(e.to_string())
    }
}
