use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{Dataset, PredictionRecord};
use crate::simulation::SimulatedDataset;

fn row_error(row: u64, reason: impl Into<String>) -> Error {
    Error::Csv {
        row,
        reason: reason.into(),
    }
}

fn csv_error(err: ::csv::Error) -> Error {
    let row = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        ::csv::ErrorKind::Io(e) => Error::Io(e),
        ::csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => row_error(row, format!("expected {expected_len} fields, found {len}")),
        ::csv::ErrorKind::Utf8 { err, .. } => row_error(row, format!("invalid UTF-8: {err}")),
        other => row_error(row, format!("{other:?}")),
    }
}

/// Reads a prediction CSV with a header containing `prob` and `label`
/// columns (any other columns, such as a leading `id`, are ignored).
///
/// Row numbers in errors are 1-based file lines; the header is row 1.
pub fn load_csv<R: Read>(source: R) -> Result<Dataset> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| row_error(1, format!("missing column {name}")))
    };
    let prob_col = column("prob")?;
    let label_col = column("label")?;

    let mut records = Vec::new();
    for result in reader.records() {
        let record = result.map_err(csv_error)?;
        let row = record.position().map_or(0, |p| p.line());
        let prob: f64 = record[prob_col]
            .parse()
            .map_err(|_| row_error(row, format!("unparsable prob {:?}", &record[prob_col])))?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(row_error(row, "prob out of range"));
        }
        let label = match &record[label_col] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(row_error(
                    row,
                    format!("label must be 0 or 1, got {other:?}"),
                ))
            }
        };
        records.push(PredictionRecord::new(prob, label)?);
    }
    Ok(Dataset::new(records))
}

pub fn load_csv_path(path: impl AsRef<Path>) -> Result<Dataset> {
    load_csv(File::open(path)?)
}

/// Writes `id,prob,label` rows. Probabilities use shortest round-trip
/// formatting, so loading the file back reproduces every bit.
pub fn write_dataset_csv<W: Write>(sink: W, data: &Dataset) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(sink);
    w.write_record(["id", "prob", "label"]).map_err(csv_error)?;
    for (i, r) in data.iter().enumerate() {
        w.write_record([i.to_string(), r.prob().to_string(), r.label().to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Like [`write_dataset_csv`] for simulated data, optionally adding a
/// `true_prob` column.
pub fn write_simulated_csv<W: Write>(
    sink: W,
    sim: &SimulatedDataset,
    with_true_prob: bool,
) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(sink);
    let mut header = vec!["id", "prob", "label"];
    if with_true_prob {
        header.push("true_prob");
    }
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..sim.len() {
        let mut row = vec![
            i.to_string(),
            sim.estimated_probs[i].to_string(),
            sim.labels[i].to_string(),
        ];
        if with_true_prob {
            row.push(sim.true_probs[i].to_string());
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
