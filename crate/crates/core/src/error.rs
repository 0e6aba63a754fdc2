use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// One or more configuration violations, reported together.
    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("mollifier with n = {n} is under-resolved: support spans {cells:.2} cells (< 8); need Nx >= {required_nx}")]
    Resolution { n: u32, cells: f64, required_nx: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("log of non-positive value {value} at step {step}, cell {cell}")]
    Domain { step: usize, cell: usize, value: f64 },

    #[error("solver became unstable at step {step}: {detail}")]
    Instability { step: usize, detail: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }

    /// True for errors caused by the caller's configuration rather than by a
    /// numerical failure or the environment.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Resolution { .. } | Error::Dimension { .. }
        )
    }
}
