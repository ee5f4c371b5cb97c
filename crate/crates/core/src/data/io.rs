//! CSV files for the prepared (masked) dataset and its ground-truth sidecar.
//!
//! Masked dataset: header `label,v0..v29,m0..m29`, values in raw units,
//! mask columns 1 = observed. Sidecar: header `row_index,attr_index,true_value`.

use std::fmt::Write as _;

use ndarray::Array2;

use super::{MaskedMatrix, TruthCell, TruthSidecar};
use crate::error::{Error, Result};

pub fn write_masked_csv(data: &MaskedMatrix) -> String {
    let cols = data.cols();
    let mut out = String::from("label");
    for j in 0..cols {
        let _ = write!(out, ",v{j}");
    }
    for j in 0..cols {
        let _ = write!(out, ",m{j}");
    }
    out.push('\n');
    let values = data.values();
    let mask = data.mask();
    for i in 0..data.rows() {
        let _ = write!(out, "{}", data.labels()[i]);
        for j in 0..cols {
            let _ = write!(out, ",{}", values[[i, j]]);
        }
        for j in 0..cols {
            out.push_str(if mask[[i, j]] { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn read_masked_csv(text: &str) -> Result<MaskedMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Schema("empty masked dataset".into()))?;
    let width = header.split(',').count();
    if width < 3 || (width - 1) % 2 != 0 {
        return Err(Error::Schema(format!(
            "bad masked-dataset header ({width} columns)"
        )));
    }
    let cols = (width - 1) / 2;
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut mask = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(Error::Schema(format!(
                "line {line_no}: expected {width} columns, found {}",
                fields.len()
            )));
        }
        labels.push(match fields[0] {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(line_no, format!("label {other:?}"))),
        });
        for f in &fields[1..=cols] {
            values.push(
                f.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("value {f:?}")))?,
            );
        }
        for f in &fields[cols + 1..] {
            mask.push(match *f {
                "1" => true,
                "0" => false,
                other => return Err(parse_err(line_no, format!("mask flag {other:?}"))),
            });
        }
    }
    let n = labels.len();
    let values =
        Array2::from_shape_vec((n, cols), values).map_err(|e| Error::Schema(e.to_string()))?;
    let mask = Array2::from_shape_vec((n, cols), mask).map_err(|e| Error::Schema(e.to_string()))?;
    MaskedMatrix::new(values, mask, labels)
}

pub fn write_truth_csv(truth: &TruthSidecar) -> String {
    let mut out = String::from("row_index,attr_index,true_value\n");
    for c in &truth.cells {
        let _ = writeln!(out, "{},{},{}", c.row, c.attr, c.value);
    }
    out
}

pub fn read_truth_csv(text: &str) -> Result<TruthSidecar> {
    let mut cells = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::Schema(format!(
                "line {}: expected 3 columns",
                idx + 1
            )));
        }
        let bad = |what: &str| parse_err(idx + 1, format!("bad {what}"));
        cells.push(TruthCell {
            row: f[0].parse().map_err(|_| bad("row_index"))?,
            attr: f[1].parse().map_err(|_| bad("attr_index"))?,
            value: f[2].parse().map_err(|_| bad("true_value"))?,
        });
    }
    Ok(TruthSidecar { cells })
}
