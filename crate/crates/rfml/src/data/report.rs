//! Structured experiment reports.
//!
//! Reports serialize to JSON with a fixed key order and all floats printed
//! with 17 significant digits, so one report object always produces one byte
//! sequence. A flat companion CSV of the metric table is written next to the
//! JSON for plotting.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use super::csv::write_atomic;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: &str = "1";

/// Scores of one method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodMetrics {
    pub method: String,
    pub k: usize,
    pub d: usize,
    pub npr: Option<f64>,
    pub accuracy: Option<f64>,
}

/// Flow diagnostics echoed into a report.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSummary {
    pub target_c: f64,
    pub total_energy: f64,
    pub converged_fraction: f64,
    pub max_iterations: usize,
    pub flow_skipped: bool,
}

/// Dimension-estimation outcome (counts per local dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSummary {
    pub chosen_d: usize,
    pub ratio: f64,
    pub not_reducible: bool,
    pub histogram: BTreeMap<usize, usize>,
}

/// Binned scalar-curvature distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSummary {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Everything one experiment run wants to persist.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    /// Fully-resolved configuration echo.
    pub config: BTreeMap<String, String>,
    pub metrics: Vec<MethodMetrics>,
    pub flow: Option<FlowSummary>,
    pub dimension: Option<DimensionSummary>,
    pub curvature: Option<HistogramSummary>,
    /// Wall-clock seconds per stage; left empty unless explicitly requested,
    /// so default reports stay byte-reproducible across runs.
    pub timings: BTreeMap<String, f64>,
}

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn format_float17(x: f64) -> String {
    format!("{x:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn opt_float(v: &Option<f64>) -> String {
    match v {
        Some(x) => format_float17(*x),
        None => "null".to_string(),
    }
}

fn render(report: &ExperimentReport) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!("  \"schema_version\": \"{SCHEMA_VERSION}\",\n"));

    s.push_str("  \"config\": {");
    let mut first = true;
    for (k, v) in &report.config {
        if !first {
            s.push(',');
        }
        first = false;
        s.push_str(&format!("\n    \"{}\": \"{}\"", escape(k), escape(v)));
    }
    if !report.config.is_empty() {
        s.push_str("\n  ");
    }
    s.push_str("},\n");

    s.push_str("  \"metrics\": [");
    for (i, m) in report.metrics.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!(
            "\n    {{\"method\": \"{}\", \"k\": {}, \"d\": {}, \"npr\": {}, \"accuracy\": {}}}",
            escape(&m.method),
            m.k,
            m.d,
            opt_float(&m.npr),
            opt_float(&m.accuracy)
        ));
    }
    if !report.metrics.is_empty() {
        s.push_str("\n  ");
    }
    s.push_str("],\n");

    match &report.flow {
        Some(f) => s.push_str(&format!(
            "  \"flow\": {{\"target_c\": {}, \"total_energy\": {}, \"converged_fraction\": {}, \"max_iterations\": {}, \"flow_skipped\": {}}},\n",
            format_float17(f.target_c),
            format_float17(f.total_energy),
            format_float17(f.converged_fraction),
            f.max_iterations,
            f.flow_skipped
        )),
        None => s.push_str("  \"flow\": null,\n"),
    }

    match &report.dimension {
        Some(d) => {
            s.push_str(&format!(
                "  \"dimension\": {{\"chosen_d\": {}, \"ratio\": {}, \"not_reducible\": {}, \"histogram\": {{",
                d.chosen_d,
                format_float17(d.ratio),
                d.not_reducible
            ));
            let mut first = true;
            for (dim, count) in &d.histogram {
                if !first {
                    s.push_str(", ");
                }
                first = false;
                s.push_str(&format!("\"{dim}\": {count}"));
            }
            s.push_str("}},\n");
        }
        None => s.push_str("  \"dimension\": null,\n"),
    }

    match &report.curvature {
        Some(c) => {
            s.push_str("  \"curvature\": {\"bin_edges\": [");
            for (i, e) in c.bin_edges.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&format_float17(*e));
            }
            s.push_str("], \"counts\": [");
            for (i, n) in c.counts.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&n.to_string());
            }
            s.push_str("]},\n");
        }
        None => s.push_str("  \"curvature\": null,\n"),
    }

    s.push_str("  \"timings\": {");
    let mut first = true;
    for (k, v) in &report.timings {
        if !first {
            s.push(',');
        }
        first = false;
        s.push_str(&format!("\n    \"{}\": {}", escape(k), format_float17(*v)));
    }
    if !report.timings.is_empty() {
        s.push_str("\n  ");
    }
    s.push_str("}\n}\n");
    s
}

/// Companion CSV path: `.csv` next to the report (with a `metrics.csv`
/// suffix when the report itself ends in `.csv`).
pub fn companion_csv_path(path: &Path) -> PathBuf {
    let with_csv = path.with_extension("csv");
    if with_csv == path {
        path.with_extension("metrics.csv")
    } else {
        with_csv
    }
}

/// Writes the canonical JSON plus the flat metric CSV (one row per
/// method/metric pair), both atomically.
pub fn save_report(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_atomic(path, render(report).as_bytes())?;

    let mut csv = String::from("method,k,d,metric,value\n");
    for m in &report.metrics {
        if let Some(npr) = m.npr {
            csv.push_str(&format!(
                "{},{},{},npr,{}\n",
                m.method,
                m.k,
                m.d,
                format_float17(npr)
            ));
        }
        if let Some(acc) = m.accuracy {
            csv.push_str(&format!(
                "{},{},{},accuracy,{}\n",
                m.method,
                m.k,
                m.d,
                format_float17(acc)
            ));
        }
    }
    write_atomic(&companion_csv_path(path), csv.as_bytes())?;
    Ok(())
}

fn bad(field: &str) -> Error {
    Error::Parse {
        line: 0,
        message: format!("report field '{field}' missing or mistyped"),
    }
}

/// Parses a report written by [`save_report`].
pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| bad("root"))?;

    let schema = obj
        .get("schema_version")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("schema_version"))?;
    if schema != SCHEMA_VERSION {
        return Err(Error::Parse {
            line: 0,
            message: format!("unsupported schema version '{schema}'"),
        });
    }

    let mut config = BTreeMap::new();
    for (k, v) in obj
        .get("config")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("config"))?
    {
        config.insert(k.clone(), v.as_str().ok_or_else(|| bad("config value"))?.to_string());
    }

    let mut metrics = Vec::new();
    for m in obj
        .get("metrics")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("metrics"))?
    {
        let mo = m.as_object().ok_or_else(|| bad("metrics entry"))?;
        metrics.push(MethodMetrics {
            method: mo
                .get("method")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("method"))?
                .to_string(),
            k: mo.get("k").and_then(Value::as_u64).ok_or_else(|| bad("k"))? as usize,
            d: mo.get("d").and_then(Value::as_u64).ok_or_else(|| bad("d"))? as usize,
            npr: mo.get("npr").and_then(Value::as_f64),
            accuracy: mo.get("accuracy").and_then(Value::as_f64),
        });
    }

    let flow = match obj.get("flow") {
        Some(Value::Object(f)) => Some(FlowSummary {
            target_c: f.get("target_c").and_then(Value::as_f64).ok_or_else(|| bad("target_c"))?,
            total_energy: f
                .get("total_energy")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("total_energy"))?,
            converged_fraction: f
                .get("converged_fraction")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("converged_fraction"))?,
            max_iterations: f
                .get("max_iterations")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("max_iterations"))? as usize,
            flow_skipped: f
                .get("flow_skipped")
                .and_then(Value::as_bool)
                .ok_or_else(|| bad("flow_skipped"))?,
        }),
        _ => None,
    };

    let dimension = match obj.get("dimension") {
        Some(Value::Object(d)) => {
            let mut histogram = BTreeMap::new();
            for (k, v) in d
                .get("histogram")
                .and_then(Value::as_object)
                .ok_or_else(|| bad("histogram"))?
            {
                histogram.insert(
                    k.parse::<usize>().map_err(|_| bad("histogram key"))?,
                    v.as_u64().ok_or_else(|| bad("histogram count"))? as usize,
                );
            }
            Some(DimensionSummary {
                chosen_d: d
                    .get("chosen_d")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| bad("chosen_d"))? as usize,
                ratio: d.get("ratio").and_then(Value::as_f64).ok_or_else(|| bad("ratio"))?,
                not_reducible: d
                    .get("not_reducible")
                    .and_then(Value::as_bool)
                    .ok_or_else(|| bad("not_reducible"))?,
                histogram,
            })
        }
        _ => None,
    };

    let curvature = match obj.get("curvature") {
        Some(Value::Object(c)) => Some(HistogramSummary {
            bin_edges: c
                .get("bin_edges")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("bin_edges"))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| bad("bin edge")))
                .collect::<Result<_>>()?,
            counts: c
                .get("counts")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("counts"))?
                .iter()
                .map(|v| v.as_u64().map(|u| u as usize).ok_or_else(|| bad("count")))
                .collect::<Result<_>>()?,
        }),
        _ => None,
    };

    let mut timings = BTreeMap::new();
    if let Some(Value::Object(t)) = obj.get("timings") {
        for (k, v) in t {
            timings.insert(k.clone(), v.as_f64().ok_or_else(|| bad("timing value"))?);
        }
    }

    Ok(ExperimentReport {
        config,
        metrics,
        flow,
        dimension,
        curvature,
        timings,
    })
}
