use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("not a tensor file: bad magic {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported tensor file version {0}")]
    BadVersion(u8),

    #[error("truncated tensor file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("tensor file has {0} trailing bytes after the payload")]
    TrailingBytes(usize),

    #[error("ground-truth tensor contains {0} missing (NaN) entries")]
    MissingInGroundTruth(usize),

    #[error("invalid value {value} at linear index {index}")]
    BadValue { index: usize, value: f64 },

    #[error(transparent)]
    Core(#[from] trc_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
