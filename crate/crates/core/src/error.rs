use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented domain constraint.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a configured resource cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A data file failed validation.
    #[error("invalid data in {path}: {message}")]
    Data { path: String, message: String },

    /// An error raised while evaluating one grid point.
    #[error("at {at}: {source}")]
    AtPoint {
        at: String,
        #[source]
        source: Box<Error>,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// The innermost error, looking through grid-point wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {p} is not a probability in [0, 1]")))
    }
}
