//! CSV ingestion and emission for point clouds and embeddings.
//!
//! Floats are written with 17 significant digits so a save/load round trip
//! reproduces every f64 exactly. A header is written only when labels are
//! present; loading auto-detects a header row.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::report::format_float17;
use crate::error::{Error, Result};
use crate::PointCloud;

/// Writes the cloud as CSV (atomically: temp file + rename). Labels, when
/// present, become a final `label` column with a header row.
pub fn save_csv(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut out = String::new();
    if cloud.labels().is_some() {
        for c in 0..cloud.dim() {
            out.push_str(&format!("x{c},"));
        }
        out.push_str("label\n");
    }
    for i in 0..cloud.n_points() {
        for c in 0..cloud.dim() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format_float17(cloud.data()[(i, c)]));
        }
        if let Some(labels) = cloud.labels() {
            out.push(',');
            out.push_str(&labels[i].to_string());
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Writes a bare coordinate matrix (no header, no labels).
pub fn save_embedding_csv(coords: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..coords.nrows() {
        for c in 0..coords.ncols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format_float17(coords[(i, c)]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Writes a newline-delimited trace file atomically.
pub fn save_trace(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

/// Atomic write: same-directory temp file, then rename.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().map(|f| f.to_string_lossy()).unwrap_or_default()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().map(|f| f.to_string_lossy()).unwrap_or_default()
        ))
        .to_path_buf(),
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads a rectangular numeric CSV. `label_column` names (header) or
/// indexes (0-based, headerless) the column to extract as integer labels.
/// NaN and infinities are rejected with the offending line number.
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<PointCloud> {
    let text = fs::read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let first = match lines.next() {
        Some(l) => l,
        None => return Err(Error::Parse {
            line: 1,
            message: "file is empty".into(),
        }),
    };

    let first_fields: Vec<&str> = first.1.split(',').map(str::trim).collect();
    let has_header = first_fields
        .iter()
        .any(|f| f.parse::<f64>().is_err());

    let header: Option<Vec<String>> = if has_header {
        Some(first_fields.iter().map(|s| s.to_string()).collect())
    } else {
        None
    };

    let label_index: Option<usize> = match (label_column, &header) {
        (None, _) => None,
        (Some(name), Some(cols)) => Some(
            cols.iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    message: format!("label column '{name}' not found in header"),
                })?,
        ),
        (Some(name), None) => Some(name.parse::<usize>().map_err(|_| Error::Parse {
            line: 1,
            message: format!(
                "label column '{name}' must be a 0-based index for headerless files"
            ),
        })?),
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<i64> = Vec::new();
    let mut width: Option<usize> = None;

    let data_lines: Vec<(usize, &str)> = if has_header {
        lines.collect()
    } else {
        std::iter::once(first).chain(lines).collect()
    };

    for (line_idx, line) in data_lines {
        let line_no = line_idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("ragged row: {} fields, expected {w}", fields.len()),
                })
            }
            _ => {}
        }
        if let Some(li) = label_index {
            if li >= fields.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("label column {li} out of range"),
                });
            }
        }
        let mut row = Vec::with_capacity(fields.len());
        for (ci, field) in fields.iter().enumerate() {
            if Some(ci) == label_index {
                let label: i64 = field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && v.is_finite())
                    .map(|v| v as i64)
                    .or_else(|| field.parse::<i64>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: format!("label '{field}' is not an integer"),
                    })?;
                labels.push(label);
            } else {
                let value: f64 = field.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("cell '{field}' is not numeric"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("non-finite value '{field}'"),
                    });
                }
                row.push(value);
            }
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    PointCloud::from_rows(&rows, if label_index.is_some() { Some(labels) } else { None })
}
