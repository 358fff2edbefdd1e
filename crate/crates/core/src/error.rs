use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate normalization: r(p={p}, q={q}) = 0, the normalized matrix is undefined")]
    DegenerateNormalization { p: f64, q: f64 },

    #[error("matrix is not skew-symmetric: |m[{row},{col}] + m[{col},{row}]| = {defect:e}")]
    NotSkewSymmetric { row: usize, col: usize, defect: f64 },

    #[error("malformed walk: consecutive repeat of vertex {vertex} at step {step}")]
    MalformedWalk { vertex: usize, step: usize },

    #[error("enumeration bound exceeded: {0}")]
    EnumerationBoundExceeded(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
