//! Trace tables in CSV and JSON. Floats are written with 17 significant
//! digits, so a written table reads back bit for bit.

use crate::error::CliError;
use altmin::engine::IterateTrace;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

pub const CSV_HEADER: &str = "k,H_full,H_half,gap_full,gap_half";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub h_full: f64,
    pub h_half: Option<f64>,
    pub gap_full: Option<f64>,
    pub gap_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceTable {
    pub h_star: Option<f64>,
    pub rows: Vec<TraceRow>,
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

impl TraceTable {
    pub fn from_trace(trace: &IterateTrace) -> Self {
        let gap = |h: f64| trace.h_star.map(|s| h - s);
        TraceTable {
            h_star: trace.h_star,
            rows: trace
                .entries
                .iter()
                .map(|e| TraceRow {
                    k: e.k,
                    h_full: e.h_full,
                    h_half: e.h_half,
                    gap_full: gap(e.h_full),
                    gap_half: e.h_half.and_then(gap),
                })
                .collect(),
        }
    }

    /// `H*` is not a column; it is recoverable from any row with a gap.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(96 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.k,
                number(r.h_full),
                optional(r.h_half),
                optional(r.gap_full),
                optional(r.gap_half)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == CSV_HEADER => {}
            other => {
                return Err(CliError::Data(format!(
                    "bad trace header {other:?}, expected {CSV_HEADER:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let line_no = i + 2;
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != 5 {
                return Err(CliError::Data(format!(
                    "line {line_no}: expected 5 fields, got {}",
                    fields.len()
                )));
            }
            let bad = |what: &str| CliError::Data(format!("line {line_no}: cannot parse {what}"));
            let opt = |s: &str, what: &str| -> Result<Option<f64>, CliError> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(what))
                }
            };
            rows.push(TraceRow {
                k: fields[0].parse().map_err(|_| bad("k"))?,
                h_full: fields[1].parse().map_err(|_| bad("H_full"))?,
                h_half: opt(fields[2], "H_half")?,
                gap_full: opt(fields[3], "gap_full")?,
                gap_half: opt(fields[4], "gap_half")?,
            });
        }
        let h_star = rows.iter().find_map(|r| r.gap_full.map(|g| r.h_full - g));
        Ok(TraceTable { h_star, rows })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Data(format!("bad trace JSON: {e}")))
    }

    /// JSON for `.json` paths, CSV otherwise.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = if is_json(path) {
            self.to_json()
        } else {
            self.to_csv()
        };
        write_file(path, &text)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if is_json(path) {
            Self::from_json(&text)
        } else {
            Self::from_csv(&text)
        }
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
