//! Tabular and JSON rendering of calibration reports.
//!
//! Tables list one row per bin (threshold, bin, ECE, ESCE, ECD, count) with
//! values at four decimals, `N/A` for empty bins, and the weighted-sum row
//! last. JSON keeps full precision and carries a `schema_version`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binning::{BinSpec, CalibrationReport};
use crate::error::{Error, Result};
use crate::simulation::SuiteRun;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Markdown => "md",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!(
                "unknown format {other:?} (expected json, csv or markdown)"
            )),
        }
    }
}

#[derive(Serialize)]
struct JsonDocumentRef<'a> {
    schema_version: u32,
    report: &'a CalibrationReport,
}

#[derive(Deserialize)]
struct JsonDocument {
    schema_version: u32,
    report: CalibrationReport,
}

/// Four decimals; `-0.0000` is printed as `0.0000`.
pub fn fmt4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), fmt4)
}

fn fmt_edge(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

/// `"0.1 <= p < 0.2"`, with the last bin closed at 1.
pub fn threshold_label(spec: BinSpec, m: usize) -> String {
    let (lo, hi) = spec.bounds(m);
    let upper = if m + 1 == spec.num_bins() { "<=" } else { "<" };
    format!("{} <= p {upper} {}", fmt_edge(lo), fmt_edge(hi))
}

struct Row {
    threshold: String,
    bin: String,
    ece: String,
    esce: String,
    ecd: String,
    count: String,
}

fn rows(report: &CalibrationReport) -> Vec<Row> {
    let spec = report.spec();
    let mut out: Vec<Row> = report
        .bins
        .iter()
        .map(|b| Row {
            threshold: threshold_label(spec, b.index),
            bin: (b.index + 1).to_string(),
            ece: fmt_opt(b.ece_bin),
            esce: fmt_opt(b.esce_bin),
            ecd: fmt_opt(b.ecd_bin),
            count: b.count.to_string(),
        })
        .collect();
    out.push(Row {
        threshold: "Weighted Sum".into(),
        bin: String::new(),
        ece: fmt4(report.ece),
        esce: fmt4(report.esce),
        ecd: fmt4(report.ecd),
        count: report.n_total.to_string(),
    });
    out
}

pub fn render_report(report: &CalibrationReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let doc = JsonDocumentRef {
                schema_version: SCHEMA_VERSION,
                report,
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = ::csv::Writer::from_writer(Vec::new());
            let to_err = |e: ::csv::Error| Error::Csv {
                row: 0,
                reason: e.to_string(),
            };
            w.write_record(["threshold", "bin", "ece", "esce", "ecd", "count"])
                .map_err(to_err)?;
            for r in rows(report) {
                w.write_record([r.threshold, r.bin, r.ece, r.esce, r.ecd, r.count])
                    .map_err(to_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
        ReportFormat::Markdown => {
            let mut s = String::new();
            writeln!(
                s,
                "N = {}, Brier = {}, NLL = {}",
                report.n_total,
                fmt4(report.brier),
                fmt4(report.nll)
            )
            .unwrap();
            writeln!(s).unwrap();
            writeln!(s, "| Threshold | Bin | ECE | ESCE | ECD | Count |").unwrap();
            writeln!(s, "|---|---:|---:|---:|---:|---:|").unwrap();
            for r in rows(report) {
                writeln!(
                    s,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.threshold, r.bin, r.ece, r.esce, r.ecd, r.count
                )
                .unwrap();
            }
            Ok(s)
        }
    }
}

/// Parses a JSON report document produced by [`render_report`].
pub fn parse_report_json(text: &str) -> Result<CalibrationReport> {
    let doc: JsonDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidConfig(format!(
            "unsupported report schema_version {}",
            doc.schema_version
        )));
    }
    Ok(doc.report)
}

/// Side-by-side table of suite runs: per bin, ECE/ESCE/ECD for each sigma,
/// the weighted-sum row, then a monotonicity line for ECD and ECE.
pub fn render_suite_table(runs: &[SuiteRun]) -> String {
    let mut s = String::new();
    let Some(first) = runs.first() else {
        return s;
    };
    let spec = first.report.spec();
    write!(s, "| Threshold | Bin |").unwrap();
    for run in runs {
        let sigma = run.sigma;
        write!(s, " ECE (s={sigma}) | ESCE (s={sigma}) | ECD (s={sigma}) |").unwrap();
    }
    writeln!(s).unwrap();
    write!(s, "|---|---:|").unwrap();
    for _ in runs {
        write!(s, "---:|---:|---:|").unwrap();
    }
    writeln!(s).unwrap();
    for m in 0..spec.num_bins() {
        write!(s, "| {} | {} |", threshold_label(spec, m), m + 1).unwrap();
        for run in runs {
            let b = &run.report.bins[m];
            write!(
                s,
                " {} | {} | {} |",
                fmt_opt(b.ece_bin),
                fmt_opt(b.esce_bin),
                fmt_opt(b.ecd_bin)
            )
            .unwrap();
        }
        writeln!(s).unwrap();
    }
    write!(s, "| Weighted Sum | |").unwrap();
    for run in runs {
        let r = &run.report;
        write!(s, " {} | {} | {} |", fmt4(r.ece), fmt4(r.esce), fmt4(r.ecd)).unwrap();
    }
    writeln!(s).unwrap();
    writeln!(s).unwrap();
    let increasing = |f: fn(&CalibrationReport) -> f64| {
        runs.windows(2).all(|w| f(&w[1].report) > f(&w[0].report))
    };
    writeln!(
        s,
        "ECD increasing with sigma: {}",
        yes_no(increasing(|r| r.ecd))
    )
    .unwrap();
    writeln!(
        s,
        "ECE increasing with sigma: {}",
        yes_no(increasing(|r| r.ece))
    )
    .unwrap();
    s
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
