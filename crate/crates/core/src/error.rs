use thiserror::Error;

/// Errors raised across the harness.
///
/// Every variant maps onto one of three coarse categories (see [`ErrorKind`])
/// that the command-line front end turns into stable exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty model")]
    EmptyModel,

    #[error("dimension mismatch at layer {index} ({layer}): {detail}")]
    LayerDimension {
        index: usize,
        layer: String,
        detail: String,
    },

    #[error("non-finite weight in layer {layer}")]
    NonFiniteWeight { layer: String },

    #[error("non-finite value produced by layer {layer} at timestep {timestep}")]
    NonFiniteActivation { layer: String, timestep: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trace does not match model: {0}")]
    TraceMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("parse error in {field}: {detail}")]
    Parse { field: String, detail: String },

    #[error("instance {instance}: {source}")]
    Instance {
        instance: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error category.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Caller asked for something inconsistent or out of range.
    Usage,
    /// Input data is missing, malformed or does not fit the model.
    Data,
    /// The computation itself diverged or hit a singular system.
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::NonFiniteActivation { .. } | Error::Numerical(_) | Error::Singular(_) => {
                ErrorKind::Numerical
            }
            Error::Instance { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(field: impl Into<String>, detail: impl std::fmt::Display) -> Self {
        Error::Parse {
            field: field.into(),
            detail: detail.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
