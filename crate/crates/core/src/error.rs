use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("UnsupportedK: alignment system needs K >= 3, got K = {0}")]
    UnsupportedK(usize),
    #[error("Theorem1IsThreeUser: the three-user condition needs K = 3, got K = {0}")]
    Theorem1IsThreeUser(usize),
    #[error("Corollary1IsThreeUser: line-of-sight spacing analysis needs K = 3, got K = {0}")]
    Corollary1IsThreeUser(usize),
    #[error("OrthogonalityViolated: spacing multiple n = 0 puts both subcarriers on the same frequency")]
    OrthogonalityViolated,
    #[error("degenerate scenario: the cross-delay combination is exactly zero")]
    DegenerateScenario,
    #[error("zero channel coefficient at rx {rx}, tx {tx}, subcarrier {subcarrier}")]
    ZeroCoefficient {
        rx: usize,
        tx: usize,
        subcarrier: usize,
    },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Whether the error stems from bad user input rather than a runtime failure.
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}
