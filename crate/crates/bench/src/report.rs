use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::Result;

/// Results for one (eps, storage mode, strategy) combination. Times are
/// medians in seconds; `rel_time` is relative to the FP64 row.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub bench: String,
    pub app: String,
    pub n: usize,
    pub eps: f64,
    pub codec: String,
    pub arith: Option<String>,
    pub dense_too: bool,
    pub bytes_uncompressed: usize,
    pub bytes_compressed: usize,
    pub bytes_dense: usize,
    pub bytes_lowrank: usize,
    pub rate: f64,
    pub t_assembly: Option<f64>,
    pub t_compress: Option<f64>,
    pub t_matvec: Option<f64>,
    pub t_lu: Option<f64>,
    pub rel_time: Option<f64>,
    pub matvec_error: Option<f64>,
    pub lu_residual: Option<f64>,
    pub factor_bytes: Option<usize>,
    pub factor_rate: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<Row>,
}

impl BenchReport {
    /// Row for a storage mode, eps and optional strategy.
    pub fn find(&self, codec: &str, eps: f64, arith: Option<&str>) -> Option<&Row> {
        self.rows
            .iter()
            .find(|r| r.codec == codec && r.eps == eps && r.arith.as_deref() == arith)
    }
}

/// CSV header in emission order.
pub const COLUMNS: [&str; 22] = [
    "bench",
    "app",
    "n",
    "eps",
    "codec",
    "arith",
    "dense_too",
    "bytes_uncompressed",
    "bytes_compressed",
    "bytes_dense",
    "bytes_lowrank",
    "rate",
    "t_assembly",
    "t_compress",
    "t_matvec",
    "t_lu",
    "rel_time",
    "matvec_error",
    "lu_residual",
    "factor_bytes",
    "factor_rate",
    "status",
];

fn real(x: f64) -> String {
    format!("{x:.5e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

fn text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line(r: &Row) -> String {
    [
        text(&r.bench),
        text(&r.app),
        r.n.to_string(),
        real(r.eps),
        text(&r.codec),
        text(r.arith.as_deref().unwrap_or("")),
        r.dense_too.to_string(),
        r.bytes_uncompressed.to_string(),
        r.bytes_compressed.to_string(),
        r.bytes_dense.to_string(),
        r.bytes_lowrank.to_string(),
        real(r.rate),
        opt_real(r.t_assembly),
        opt_real(r.t_compress),
        opt_real(r.t_matvec),
        opt_real(r.t_lu),
        opt_real(r.rel_time),
        opt_real(r.matvec_error),
        opt_real(r.lu_residual),
        r.factor_bytes.map(|b| b.to_string()).unwrap_or_default(),
        opt_real(r.factor_rate),
        text(&r.status),
    ]
    .join(",")
}

/// Writes the report. CSV floats carry six significant digits; JSON keeps
/// full precision.
pub fn write_report(report: &BenchReport, format: Format, mut w: impl Write) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "{}", COLUMNS.join(","))?;
            for r in &report.rows {
                writeln!(w, "{}", csv_line(r))?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_report(report: &BenchReport, format: Format, path: &Path) -> Result<()> {
    write_report(report, format, BufWriter::new(File::create(path)?))
}
