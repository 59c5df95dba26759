//! Rendering of run artifacts as CSV or JSON with a config echo.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Everything a run produces: a table for CSV, a JSON document of results and wall times.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub results: Vec<Value>,
    pub wall_ms: Vec<(String, f64)>,
}

impl Artifact {
    pub fn new(columns: &[&'static str]) -> Self {
        Artifact {
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn result<T: Serialize>(&mut self, v: &T) {
        self.results.push(serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn wall(&mut self, label: impl Into<String>, ms: f64) {
        self.wall_ms.push((label.into(), ms));
    }

    /// CSV with a leading provenance block and a trailing wall-time block.
    pub fn to_csv(&self, config: &Value) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# zerovar {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# config: {config}");
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        for (label, ms) in &self.wall_ms {
            let _ = writeln!(s, "# wall_ms {label}: {ms}");
        }
        s
    }

    /// JSON document with the config echo, results and wall times.
    pub fn to_json(&self, config: &Value) -> String {
        let wall: serde_json::Map<String, Value> = self.wall_ms.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let doc = json!({
            "tool": "zerovar",
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "results": self.results,
            "wall_time_ms": wall,
        });
        let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format, config: &Value) -> String {
        match format {
            Format::Csv => self.to_csv(config),
            Format::Json => self.to_json(config),
        }
    }
}

/// Extracts the config echo from a previous output file, or reads a bare config.
pub fn config_from_text(text: &str) -> Option<Value> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: Value = serde_json::from_str(trimmed).ok()?;
        return Some(match v.get("config") {
            Some(c) if v.get("tool").is_some() => c.clone(),
            _ => v,
        });
    }
    text.lines().find_map(|l| l.strip_prefix("# config: ")).and_then(|c| serde_json::from_str(c).ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_the_config() {
        let mut a = Artifact::new(&["x", "label"]);
        a.row(vec![Cell::Num(0.1), Cell::from("a,b")]);
        a.wall("total", 1.5);
        let cfg = json!({"command": "variance", "T": 2.0});
        let csv = a.to_csv(&cfg);
        assert!(csv.contains("\n0.1,\"a,b\"\n"));
        assert!(csv.trim_end().ends_with("# wall_ms total: 1.5"));
        assert_eq!(config_from_text(&csv).unwrap(), cfg);
        assert_eq!(config_from_text(&a.to_json(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn floats_use_shortest_round_trip() {
        assert_eq!(Cell::Num(0.1 + 0.2).render(), "0.30000000000000004");
        assert_eq!(Cell::Num(1e-20).render(), "1e-20");
        assert_eq!(Cell::Num(2.0).render(), "2.0");
    }
}
