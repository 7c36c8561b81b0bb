use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge: subdivision depth exceeded {max_depth}")]
    NonConvergence { max_depth: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("blow-up at t = {time:.6e}{}", location.map(|y| format!(" (y = {y:.6e})")).unwrap_or_default())]
    BlowUp { time: f64, location: Option<f64> },

    #[error("invalid step size: {0}")]
    StepSize(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("insufficient snapshots: {0}")]
    InsufficientSnapshots(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("malformed {section} section at byte offset {offset}: {reason}")]
    Format {
        section: &'static str,
        offset: usize,
        reason: String,
    },

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }
}
