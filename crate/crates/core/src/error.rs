use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite coordinate ({x}, {y})")]
    NonFinite { x: f64, y: f64 },

    #[error("invalid rectangle ({x_lo}, {y_lo}, {x_hi}, {y_hi})")]
    InvalidRect {
        x_lo: f64,
        y_lo: f64,
        x_hi: f64,
        y_hi: f64,
    },

    #[error("invalid circle radius {0}")]
    InvalidCircle(f64),

    #[error("polygon {id} has {vertices} vertices, need at least 3")]
    DegeneratePolygon { id: String, vertices: usize },

    #[error("morton input ({ix}, {iy}) out of range for {bits} bits")]
    MortonRange { ix: u64, iy: u64, bits: u32 },

    #[error("invalid key strategy: {0}")]
    InvalidKeyStrategy(String),

    #[error("empty string has no key")]
    EmptyString,

    #[error("spline input invalid: {0}")]
    SplineInput(String),

    #[error("radix table needs at least two knots with distinct keys")]
    DegenerateRadix,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("k = {k} exceeds dataset size {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: no valid rows ({skipped} skipped)")]
    NoValidRows { path: PathBuf, skipped: usize },

    #[error("snapshot: bad magic")]
    BadMagic,

    #[error("snapshot: unsupported version {0}")]
    UnsupportedVersion(u32),

    #[error("snapshot: truncated")]
    Truncated,

    #[error("snapshot: checksum mismatch in partition block {block}")]
    Checksum { block: usize },

    #[error("snapshot: malformed ({0})")]
    Malformed(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
