//! Benchmark driver: compression rates, matvec and LU runs on the model
//! problems, with CSV and JSON reports.

mod config;
mod report;
mod run;

pub use config::{App, ArithChoice, Bench, BenchConfig, Format};
pub use report::{emit_report, write_report, BenchReport, Row, COLUMNS};
pub use run::{lu_rows, run, run_compress, run_lu, run_matvec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] hcompress::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
