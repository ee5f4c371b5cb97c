use std::path::Path;

use ndarray::Array2;

use super::{MaskedMatrix, N_ATTRS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// First line is a header row.
    pub header: bool,
    /// Treat raw zeros as missing; the distributed file encodes its few
    /// missing measurements as 0.
    pub zero_is_missing: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            header: false,
            zero_is_missing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WdbcData {
    pub ids: Vec<String>,
    /// Unscaled measurements.
    pub data: MaskedMatrix,
}

pub fn load_wdbc(path: &Path, opts: LoadOptions) -> Result<WdbcData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    parse_wdbc(&text, opts)
}

/// Parses `id,diagnosis,f1..f30` rows. Diagnosis `M` maps to label 1, `B` to 0.
pub fn parse_wdbc(text: &str, opts: LoadOptions) -> Result<WdbcData> {
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    let expected = N_ATTRS + 2;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if idx == 0 && opts.header {
            continue;
        }
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != expected {
            return Err(Error::Schema(format!(
                "line {line_no}: expected {expected} columns, found {}",
                fields.len()
            )));
        }
        let label = match fields[1] {
            "M" => 1,
            "B" => 0,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("diagnosis {other:?} is not M or B"),
                })
            }
        };
        for (j, f) in fields[2..].iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("attribute {j}: {f:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("attribute {j}: non-finite value"),
                });
            }
            flat.push(v);
        }
        ids.push(fields[0].to_string());
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Schema("no data rows".into()));
    }
    let values = Array2::from_shape_vec((labels.len(), N_ATTRS), flat)
        .map_err(|e| Error::Schema(e.to_string()))?;
    let mask = if opts.zero_is_missing {
        values.mapv(|v| v != 0.0)
    } else {
        Array2::from_elem(values.raw_dim(), true)
    };
    Ok(WdbcData {
        ids,
        data: MaskedMatrix::new(values, mask, labels)?,
    })
}
