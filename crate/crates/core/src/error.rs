use thiserror::Error;

/// Broad failure classes; the CLI maps these onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    InvalidParameter,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("unsupported Daubechies order {0}; supported orders are 1..=20")]
    UnsupportedOrder(usize),

    #[error(
        "decomposition depth {requested} too deep for {length} samples with a {taps}-tap filter; \
         maximum feasible depth is {max_depth}"
    )]
    DepthTooDeep {
        requested: usize,
        length: usize,
        taps: usize,
        max_depth: usize,
    },

    #[error("decomposition structure error: {0}")]
    Structure(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("filter design error: {0}")]
    Design(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{path}: {message}")]
    Load { path: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("A-line {index}: {source}")]
    ALine {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::Load { .. } => ErrorKind::Io,
            Error::Degenerate(_) => ErrorKind::Numerical,
            Error::ALine { source, .. } => source.kind(),
            _ => ErrorKind::InvalidParameter,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
