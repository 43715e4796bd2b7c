//! Mapping layer for foreign trace files.
//!
//! External datasets rarely ship in the canonical `t,value` schema. A
//! [`ColumnMapSpec`] names the time and value columns (plus delimiter and
//! time unit) of a source file; [`adapt_csv`] rewrites it canonically so the
//! normal readers apply.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How to translate one foreign CSV layout into the canonical trace schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapSpec {
    pub time_column: String,
    pub value_column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    /// Multiplier turning source time units into seconds (e.g. 1e-3 for ms).
    #[serde(default = "default_scale")]
    pub time_scale: f64,
}

fn default_delimiter() -> char {
    ','
}

fn default_scale() -> f64 {
    1.0
}

impl ColumnMapSpec {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })
    }
}

/// Rewrites a foreign CSV into the canonical `t,value` schema. Returns the
/// number of data rows written. Timestamps are scaled to seconds but not
/// rebased; the trace reader rebases on ingest.
pub fn adapt_csv(input: &Path, spec: &ColumnMapSpec, output: &Path) -> Result<usize> {
    let file = std::fs::File::open(input).map_err(|e| Error::io(input.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let path_str = input.display().to_string();

    let mut out = String::from(super::csv::TRACE_HEADER);
    out.push('\n');
    let mut t_idx = None;
    let mut v_idx = None;
    let mut rows = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(&*path_str, e))?;
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(spec.delimiter).map(str::trim).collect();
        if idx == 0 {
            t_idx = fields.iter().position(|f| *f == spec.time_column);
            v_idx = fields.iter().position(|f| *f == spec.value_column);
            if t_idx.is_none() || v_idx.is_none() {
                return Err(Error::Parse {
                    path: path_str,
                    line: lineno,
                    message: format!(
                        "columns {:?}/{:?} not found in header",
                        spec.time_column, spec.value_column
                    ),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (ti, vi) = (t_idx.unwrap(), v_idx.unwrap());
        if fields.len() <= ti.max(vi) {
            return Err(Error::Parse {
                path: path_str.clone(),
                line: lineno,
                message: format!("row has {} fields", fields.len()),
            });
        }
        let t: f64 = fields[ti].parse().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("invalid time: {:?}", fields[ti]),
        })?;
        let v: f64 = fields[vi].parse().map_err(|_| Error::Parse {
            path: path_str.clone(),
            line: lineno,
            message: format!("invalid value: {:?}", fields[vi]),
        })?;
        out.push_str(&format!("{},{}\n", t * spec.time_scale, v));
        rows += 1;
    }

    let mut file =
        std::fs::File::create(output).map_err(|e| Error::io(output.display().to_string(), e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(output.display().to_string(), e))?;
    Ok(rows)
}
