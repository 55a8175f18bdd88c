use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum DomainError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{file}: row {row}, field `{field}`: {message}")]
    Field {
        file: PathBuf,
        row: usize,
        field: String,
        message: String,
    },
    #[error("{file}: expected {expected} rows (horizon_t), found {found}")]
    LengthMismatch {
        file: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{file}: header must be `{expected}`, found `{found}`")]
    Header {
        file: PathBuf,
        expected: String,
        found: String,
    },
    #[error("price ordering violated at t={t}: need sell ({sell}) <= mg ({mg}) <= buy ({buy})")]
    PriceOrdering { t: usize, sell: f64, mg: f64, buy: f64 },
    #[error("MG {mg}: series `{series}` at t={t} is {value}; powers must be finite and >= 0")]
    NegativePower {
        mg: usize,
        series: &'static str,
        t: usize,
        value: f64,
    },
    #[error("series `{series}` has {found} entries, expected {expected}")]
    SeriesLength {
        series: String,
        expected: usize,
        found: usize,
    },
    #[error("MG {mg}: invalid parameters: {reason}")]
    InvalidParams { mg: usize, reason: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}
