//! Labelled CSV ingestion and seeded train/validation/test splitting.
//!
//! The input dialect is RFC 4180 with a header row; the text column is named
//! `text` and the label column `class`, with values `suicide` (1) and
//! `non-suicide` (0). Other columns are ignored.

use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::num::{RngState, Stream};

pub const TEXT_COLUMN: &str = "text";
pub const LABEL_COLUMN: &str = "class";
pub const POSITIVE_LABEL: &str = "suicide";
pub const NEGATIVE_LABEL: &str = "non-suicide";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub text: String,
    /// 1 = suicide, 0 = non-suicide.
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedCsv {
    pub records: Vec<Record>,
    /// Rows whose text was empty after trimming.
    pub skipped_empty: usize,
}

pub fn parse_label(s: &str) -> Option<u8> {
    match s {
        POSITIVE_LABEL => Some(1),
        NEGATIVE_LABEL => Some(0),
        _ => None,
    }
}

pub fn label_name(label: u8) -> &'static str {
    if label == 1 {
        POSITIVE_LABEL
    } else {
        NEGATIVE_LABEL
    }
}

/// Reads every data row in file order. Rows with blank text are skipped and
/// counted; an unrecognised label aborts with the offending line number.
pub fn load_csv(path: &Path) -> Result<LoadedCsv> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

pub fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<LoadedCsv> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(Error::MissingColumn {
                path: path.to_path_buf(),
                column: name,
            })
    };
    let text_col = find(TEXT_COLUMN)?;
    let label_col = find(LABEL_COLUMN)?;

    let mut records = Vec::new();
    let mut skipped_empty = 0;
    for row in rdr.records() {
        let row = row.map_err(csv_err)?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let label_raw = row.get(label_col).unwrap_or("").trim();
        let label = parse_label(label_raw).ok_or_else(|| Error::UnknownLabel {
            path: path.to_path_buf(),
            row: line,
            label: label_raw.to_string(),
        })?;
        let text = row.get(text_col).unwrap_or("");
        if text.trim().is_empty() {
            skipped_empty += 1;
            continue;
        }
        records.push(Record {
            text: text.to_string(),
            label,
        });
    }
    if skipped_empty > 0 {
        log::warn!("{}: skipped {skipped_empty} rows with empty text", path.display());
    }
    Ok(LoadedCsv {
        records,
        skipped_empty,
    })
}

/// Writes records in the same dialect [`load_csv`] reads.
pub fn write_csv(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let io = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record([TEXT_COLUMN, LABEL_COLUMN]).map_err(io)?;
    for r in records {
        w.write_record([r.text.as_str(), label_name(r.label)]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<Record>,
    pub validation: Vec<Record>,
    pub test: Vec<Record>,
    pub seed: u64,
}

impl DatasetSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

/// Shuffles with the `Shuffle` stream of `seed`, then slices into
/// `round(n * r_train)`, `round(n * r_val)` and the remainder.
pub fn split(records: &[Record], ratios: (f64, f64, f64), seed: u64) -> Result<DatasetSplit> {
    let (rt, rv, rs) = ratios;
    if [rt, rv, rs].iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "split ratios must be positive, got {ratios:?}"
        )));
    }
    if (rt + rv + rs - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "split ratios must sum to 1, got {ratios:?} (sum {})",
            rt + rv + rs
        )));
    }
    let n = records.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 records to split, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut RngState::new(seed).stream(Stream::Shuffle));
    let n_train = ((n as f64 * rt).round() as usize).min(n);
    let n_val = ((n as f64 * rv).round() as usize).min(n - n_train);
    let pick = |range: &[usize]| range.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
    Ok(DatasetSplit {
        train: pick(&order[..n_train]),
        validation: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
        seed,
    })
}

/// `(positives, negatives)`.
pub fn class_balance(records: &[Record]) -> (usize, usize) {
    let pos = records.iter().filter(|r| r.label == 1).count();
    (pos, records.len() - pos)
}
