use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::runner::{Aggregate, CellOutcome, CvResults};
use crate::error::{Error, Result};

/// One CSV row: a fold of a grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldRow {
    pub method: String,
    pub strategy: String,
    pub dim: usize,
    pub fold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    pub r#fn: u64,
    pub tn: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Argument(format!("unknown report format {s:?}"))),
        }
    }
}

#[derive(Serialize)]
struct JsonCell {
    method: String,
    strategy: String,
    dim: usize,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    folds: Vec<FoldRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aggregate: Option<Aggregate>,
}

#[derive(Serialize)]
struct JsonReport {
    k: usize,
    seed: u64,
    cells: Vec<JsonCell>,
}

/// Fold rows of every completed cell, in grid then fold order.
pub fn fold_rows(results: &CvResults) -> Vec<FoldRow> {
    results
        .cells
        .iter()
        .flat_map(|c| {
            c.folds().iter().map(move |f| FoldRow {
                method: c.cell.family_name().to_owned(),
                strategy: c.cell.strategy_name().to_owned(),
                dim: c.cell.dim,
                fold: f.fold,
                precision: f.report.precision,
                recall: f.report.recall,
                f1: f.report.f1,
                tp: f.report.counts.tp,
                fp: f.report.counts.fp,
                r#fn: f.report.counts.r#fn,
                tn: f.report.counts.tn,
            })
        })
        .collect()
}

fn json_report(results: &CvResults) -> JsonReport {
    let rows = fold_rows(results);
    let mut rows = rows.into_iter().peekable();
    let cells = results
        .cells
        .iter()
        .map(|c| {
            let n = c.folds().len();
            let folds: Vec<FoldRow> = rows.by_ref().take(n).collect();
            let (status, reason) = match &c.outcome {
                CellOutcome::Completed(_) => ("completed", None),
                CellOutcome::Skipped(r) => ("skipped", Some(r.clone())),
            };
            JsonCell {
                method: c.cell.family_name().to_owned(),
                strategy: c.cell.strategy_name().to_owned(),
                dim: c.cell.dim,
                status,
                reason,
                folds,
                aggregate: c.aggregate(),
            }
        })
        .collect();
    JsonReport { k: results.k, seed: results.seed, cells }
}

/// Writes the per-fold CSV table or the JSON report with aggregates.
pub fn emit_report(results: &CvResults, path: &Path, format: ReportFormat) -> Result<()> {
    if results.fold_count() == 0 {
        return Err(Error::Argument("no completed folds to report".into()));
    }
    let io = |e: std::io::Error| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            for row in fold_rows(results) {
                w.serialize(row).map_err(|e| csv_error(path, e))?;
            }
            w.flush().map_err(io)?;
        }
        ReportFormat::Json => {
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, &json_report(results)).map_err(|e| Error::io(path, e.into()))?;
            writeln!(w).map_err(io)?;
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path.display().to_string(), line, format!("{other:?}")),
    }
}

pub fn read_csv_report(path: &Path) -> Result<Vec<FoldRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

/// Plain-text table of per-cell aggregates.
pub fn summary_table(results: &CvResults) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<9} {:>5} {:>5} {:>8} {:>8} {:>8} {:>9}",
        "method", "strategy", "dim", "folds", "mean_f1", "std_f1", "min_f1", "pooled_f1"
    );
    for c in &results.cells {
        let head = format!("{:<10} {:<9} {:>5}", c.cell.family_name(), c.cell.strategy_name(), c.cell.dim);
        match (&c.outcome, c.aggregate()) {
            (CellOutcome::Completed(_), Some(a)) => {
                let _ = writeln!(
                    out,
                    "{head} {:>5} {:>8.4} {:>8.4} {:>8.4} {:>9.4}",
                    a.folds, a.mean_f1, a.std_f1, a.min_f1, a.pooled.f1
                );
            }
            (CellOutcome::Completed(_), None) => {
                let _ = writeln!(out, "{head} no folds");
            }
            (CellOutcome::Skipped(reason), _) => {
                let _ = writeln!(out, "{head} skipped: {reason}");
            }
        }
    }
    out
}
