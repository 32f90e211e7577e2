use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("symbol is not even: |f(z) - f(-z)| = {residual:e} at z = {at}")]
    NotEven { residual: f64, at: String },
    #[error("unresolved on grid: {0}")]
    Resolution(String),
    #[error("multiplier unbounded on this vector: {0}")]
    Unbounded(String),
    #[error("periodization wraparound: edge magnitude {edge:e} exceeds {tol:e}")]
    Wraparound { edge: f64, tol: f64 },
    #[error("insufficient decay: {0}")]
    Decay(String),
    #[error("series divergent: {0}")]
    Divergent(String),
    #[error("contour below growth bound: Im z = {im} <= c = {c}")]
    Contour { im: f64, c: f64 },
    #[error("truncation bound not met: {0}")]
    Truncation(String),
    #[error("growth on frequency grid: {0}")]
    Growth(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Stable upper-case code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DOMAIN",
            Error::Overflow(_) => "OVERFLOW",
            Error::NotEven { .. } => "NOT_EVEN",
            Error::Resolution(_) => "RESOLUTION",
            Error::Unbounded(_) => "UNBOUNDED",
            Error::Wraparound { .. } => "WRAPAROUND",
            Error::Decay(_) => "DECAY",
            Error::Divergent(_) => "DIVERGENT",
            Error::Contour { .. } => "CONTOUR",
            Error::Truncation(_) => "TRUNCATION",
            Error::Growth(_) => "GROWTH",
            Error::GridMismatch(_) => "GRID_MISMATCH",
            Error::Config(_) => "CONFIG",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
