//! File formats, synthetic data and constraint generation, external
//! clustering metrics, and the JSON run report.

pub mod constraints;
pub mod csv;
pub mod metrics;
pub mod report;
pub mod synth;

pub use constraints::parse_constraints;
pub use csv::load_csv;
pub use metrics::external_metrics;
pub use report::Report;
pub use synth::{generate_constraints, generate_synthetic};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: row has {got} fields, expected {expected}")]
    RaggedRows {
        path: String,
        line: usize,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Validation(#[from] crate::model::ValidationError),
    #[error("cannot satisfy the requested constraint counts: {0}")]
    Unsatisfiable(String),
}
