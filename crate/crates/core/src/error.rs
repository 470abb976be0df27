use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("exponents {q} do not sum to 2^{n}")]
    BadSum { n: u32, q: String },
    #[error("partition {0} is not admissible")]
    NotAdmissible(String),
    #[error("{count} admissible partitions for n={n} exceed the enumeration limit {limit}")]
    TooMany { n: u32, count: String, limit: u64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("values are not pairwise distinct")]
    Duplicate,
    #[error("chebyshev argument {0} lies outside [-1, 1]")]
    Domain(f64),
    #[error("only {got} distinct values after {steps} steps (needed {needed})")]
    Stalled { steps: u64, got: usize, needed: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by bad input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Image { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
