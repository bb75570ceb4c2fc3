//! CSV and JSON formats written and read by the command-line tools.
//!
//! Metrics CSV: a version line `# urngame-metrics v1`, then the columns in
//! [`METRIC_COLUMNS`] order. `index` is empty for scalar metrics; `stderr` and
//! `samples` are empty for exact rows.
//!
//! Kernel CSV: columns `from_x,from_y,to_x,to_y,probability`, one row per non-zero
//! entry in row-major state order. A JSON sidecar from [`kernel_header`] records
//! the variant, parameters and state ordering.
//!
//! Trial CSV: `trial_id,hitting_time,safe_time,censored`, with an empty
//! `hitting_time` when the safe set was never left.
//!
//! Printed-form audit CSV: one row per kernel entry where the transcribed printed
//! formulas and the derived kernel disagree, largest gap first per variant.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file back
//! gives the exact values that were written.

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{build_kernel, kernel_diff, printed_kernel, GameVariant, TransitionMatrix};
use crate::model::GameParams;
use crate::metrics::{Cell, Metric, MetricRow, Source};
use crate::sim::TrialResult;

pub const METRICS_VERSION_LINE: &str = "# urngame-metrics v1";
pub const METRIC_COLUMNS: [&str; 10] = ["source", "variant", "c", "s", "mu", "metric", "index", "value", "stderr", "samples"];
pub const KERNEL_COLUMNS: [&str; 5] = ["from_x", "from_y", "to_x", "to_y", "probability"];
pub const TRIAL_COLUMNS: [&str; 4] = ["trial_id", "hitting_time", "safe_time", "censored"];
pub const AUDIT_COLUMNS: [&str; 11] =
    ["variant", "c", "s", "mu", "from_x", "from_y", "to_x", "to_y", "printed", "derived", "abs_diff"];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::from(io),
        other => Error::schema(None, line, format!("{other:?}")),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_metrics<W: Write>(mut out: W, rows: &[MetricRow]) -> Result<()> {
    writeln!(out, "{METRICS_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRIC_COLUMNS).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.source.name().to_string(),
            r.cell.variant.name().to_string(),
            r.cell.c.to_string(),
            r.cell.s.to_string(),
            r.cell.mu.to_string(),
            r.metric.name().to_string(),
            opt(r.index),
            r.value.to_string(),
            opt(r.stderr),
            opt(r.samples),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(raw: &str, column: &str, line: u64) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::schema(Some(column), Some(line), format!("cannot parse '{raw}'")))
}

fn parse_optional<T: std::str::FromStr>(raw: &str, column: &str, line: u64) -> Result<Option<T>> {
    if raw.trim().is_empty() {
        Ok(None)
    } else {
        parse_field(raw, column, line).map(Some)
    }
}

/// Reads a metrics CSV, rejecting unknown versions, missing or extra columns and
/// unparsable fields with the offending column named.
pub fn read_metrics<R: Read>(mut input: R) -> Result<Vec<MetricRow>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let (first, body) = text.split_once('\n').unwrap_or((text.as_str(), ""));
    if first.trim_end() != METRICS_VERSION_LINE {
        return Err(Error::schema(None, Some(1), format!("expected version line '{METRICS_VERSION_LINE}'")));
    }
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    for col in METRIC_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::schema(Some(col), Some(2), "missing column"));
        }
    }
    if let Some(extra) = headers.iter().find(|h| !METRIC_COLUMNS.contains(h)) {
        return Err(Error::schema(Some(extra), Some(2), "unexpected column"));
    }
    let pos = |name: &str| headers.iter().position(|h| h == name).expect("checked above");
    let idx: Vec<usize> = METRIC_COLUMNS.iter().map(|c| pos(c)).collect();

    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        // The version line precedes the CSV body.
        let line = record.position().map_or(0, |p| p.line() + 1);
        let field = |i: usize| record.get(idx[i]).unwrap_or("");
        let value: f64 = parse_field(field(7), "value", line)?;
        rows.push(MetricRow {
            source: field(0).parse().map_err(|_| Error::schema(Some("source"), Some(line), format!("unknown source '{}'", field(0))))?,
            cell: Cell {
                variant: field(1)
                    .parse::<GameVariant>()
                    .map_err(|_| Error::schema(Some("variant"), Some(line), format!("unknown variant '{}'", field(1))))?,
                c: parse_field(field(2), "c", line)?,
                s: parse_field(field(3), "s", line)?,
                mu: parse_field(field(4), "mu", line)?,
            },
            metric: field(5)
                .parse::<Metric>()
                .map_err(|_| Error::schema(Some("metric"), Some(line), format!("unknown metric '{}'", field(5))))?,
            index: parse_optional(field(6), "index", line)?,
            value,
            stderr: parse_optional(field(8), "stderr", line)?,
            samples: parse_optional(field(9), "samples", line)?,
        });
        let last = rows.last().expect("just pushed");
        if last.source == Source::Mc && (last.stderr.is_none() || last.samples.is_none()) {
            let column = if last.stderr.is_none() { "stderr" } else { "samples" };
            return Err(Error::schema(Some(column), Some(line), "monte carlo rows need stderr and samples"));
        }
    }
    Ok(rows)
}

pub fn write_kernel_csv<W: Write>(out: W, kernel: &TransitionMatrix<f64>) -> Result<()> {
    let params = kernel.params();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(KERNEL_COLUMNS).map_err(csv_error)?;
    for (i, j, &p) in kernel.matrix().entries() {
        if p != 0.0 {
            let (from, to) = (params.state(i)?, params.state(j)?);
            w.write_record([
                from.x.to_string(),
                from.y.to_string(),
                to.x.to_string(),
                to.y.to_string(),
                p.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelHeader {
    pub format: &'static str,
    pub version: u32,
    pub variant: GameVariant,
    pub c: usize,
    pub s: usize,
    pub mu: f64,
    pub c_prime: usize,
    pub states: usize,
    pub ordering: &'static str,
    pub nonzeros: usize,
    pub max_row_sum_deviation: f64,
}

pub fn kernel_header(kernel: &TransitionMatrix<f64>) -> KernelHeader {
    let p = kernel.params();
    KernelHeader {
        format: "urngame-kernel",
        version: 1,
        variant: kernel.variant(),
        c: p.c(),
        s: p.s(),
        mu: *p.mu(),
        c_prime: p.c_prime(),
        states: p.dimension(),
        ordering: "index = x * (s + 1) + y",
        nonzeros: kernel.matrix().entries().filter(|(_, _, v)| **v != 0.0).count(),
        max_row_sum_deviation: kernel.max_row_sum_deviation(),
    }
}

pub fn write_kernel_header<W: Write>(mut out: W, kernel: &TransitionMatrix<f64>) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &kernel_header(kernel)).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_trials<W: Write>(out: W, trials: &[TrialResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_COLUMNS).map_err(csv_error)?;
    for (id, t) in trials.iter().enumerate() {
        w.write_record([
            id.to_string(),
            opt(t.hitting_time),
            t.total_safe_time.to_string(),
            t.censored.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every entry where the printed-form kernel and the derived kernel differ
/// by more than `tol`; returns the number of rows per variant.
pub fn write_printed_form_audit<W: Write>(
    out: W,
    params: &GameParams<f64>,
    variants: &[GameVariant],
    tol: f64,
) -> Result<Vec<usize>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AUDIT_COLUMNS).map_err(csv_error)?;
    let mut counts = Vec::with_capacity(variants.len());
    for &v in variants {
        let diffs = kernel_diff(&printed_kernel(v, params), &build_kernel(v, params), tol)?;
        for d in &diffs {
            w.write_record([
                v.name().to_string(),
                params.c().to_string(),
                params.s().to_string(),
                params.mu().to_string(),
                d.from.x.to_string(),
                d.from.y.to_string(),
                d.to.x.to_string(),
                d.to.y.to_string(),
                d.a.to_string(),
                d.b.to_string(),
                d.magnitude().to_string(),
            ])
            .map_err(csv_error)?;
        }
        counts.push(diffs.len());
    }
    w.flush()?;
    Ok(counts)
}
