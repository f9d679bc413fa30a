use thiserror::Error;

/// Errors raised anywhere in the crate. The variant decides the CLI exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a formula (e.g. ξ ≤ 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or inconsistent input data.
    #[error("input error: {0}")]
    Input(String),

    /// A material or run configuration that cannot be evaluated.
    #[error("configuration error: {0}")]
    Config(String),

    /// A sum or integral failed to converge within its limits.
    #[error("numerical error: {message} ({diagnostics})")]
    Numerical {
        message: String,
        diagnostics: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
