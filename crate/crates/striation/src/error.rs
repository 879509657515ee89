use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {chunk} chunk: {msg}", path.display())]
    Decode { path: PathBuf, chunk: &'static str, msg: String },
    #[error("{}:{line}: {msg}", path.display())]
    Format { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] striation_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True when the failure is attributable to what the caller supplied
    /// rather than to the computation itself.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Decode { .. } | Error::Format { .. } | Error::Input(_) => true,
            Error::Core(e) => {
                matches!(e, striation_core::Error::Config(_) | striation_core::Error::SignalTooShort { .. })
            }
        }
    }
}
