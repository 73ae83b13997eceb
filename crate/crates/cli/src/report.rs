//! Report assembly and serialization: canonical CSV, the JSON mirror and
//! simple SVG plots. All numeric formatting is fixed so reruns with the
//! same configuration are byte-identical (the wall-clock line excepted).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// One table cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => format!("{:.12e}", normalize_zero(*v)),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    pub fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::UInt(v) => (*v).into(),
            Cell::Float(v) => serde_json::Number::from_f64(normalize_zero(*v))
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
        }
    }
}

// empty f64 sums fold from -0.0; keep the sign out of reports
fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// A finished experiment: fixed columns, data rows, summary and verdict.
#[derive(Debug)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, String)>,
    pub pass: bool,
}

impl Report {
    /// Canonical CSV: config echo and summary as `#` comment lines, the
    /// wall-clock line last (excluded from determinism comparisons).
    pub fn to_csv(&self, config: &ExperimentConfig, wall_ms: u128) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# bqflab {} schema={SCHEMA_VERSION}", config.command.name());
        for (k, v) in config.echo() {
            let _ = writeln!(out, "# config {k}={v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary {k}={v}");
        }
        let _ = writeln!(out, "# pass {}", self.pass);
        let _ = writeln!(out, "# wall_clock_ms {wall_ms}");
        out
    }

    /// JSON mirror of the CSV (schema version, config echo, rows keyed by
    /// column name, summary, verdict, wall clock).
    pub fn to_json(&self, config: &ExperimentConfig, wall_ms: u128) -> String {
        let mut root = serde_json::Map::new();
        root.insert("schema_version".into(), SCHEMA_VERSION.into());
        root.insert("command".into(), config.command.name().into());
        let mut cfg = serde_json::Map::new();
        for (k, v) in config.echo() {
            cfg.insert(k, v.into());
        }
        root.insert("config".into(), cfg.into());
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert((*col).into(), cell.json());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), rows.into());
        let mut summary = serde_json::Map::new();
        for (k, v) in &self.summary {
            summary.insert(k.clone(), v.clone().into());
        }
        root.insert("summary".into(), summary.into());
        root.insert("pass".into(), self.pass.into());
        root.insert("wall_clock_ms".into(), (wall_ms as u64).into());
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("serializable report")
    }

    /// Values of one named column as f64 (for plotting).
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(
            self.rows
                .iter()
                .map(|row| match &row[idx] {
                    Cell::Int(v) => *v as f64,
                    Cell::UInt(v) => *v as f64,
                    Cell::Float(v) => *v,
                    Cell::Bool(b) => *b as u8 as f64,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

/// Minimal static scatter plot. Presentation-only; asserts nothing.
pub fn write_scatter_svg(
    path: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    points: &[(f64, f64)],
) -> std::io::Result<()> {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const MARGIN: f64 = 55.0;
    let finite: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    if !finite.is_empty() {
        x0 = finite.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = finite.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        y1 = finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if x0 == x1 {
            x1 = x0 + 1.0;
        }
        if y0 == y1 {
            y1 = y0 + 1.0;
        }
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">{title}</text>",
        W / 2.0
    );
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">{}</text>",
            sx(fx),
            H - MARGIN + 16.0,
            fmt_coord(fx)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">{}</text>",
            MARGIN - 6.0,
            sy(fy) + 3.0,
            fmt_coord(fy)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">{xlabel}</text>",
        W / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{ylabel}</text>",
        H / 2.0,
        H / 2.0
    );
    for (x, y) in &finite {
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"steelblue\" fill-opacity=\"0.7\"/>",
            sx(*x),
            sy(*y)
        );
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg)
}

/// Output file paths for one run.
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
}

pub fn output_paths(config: &ExperimentConfig) -> OutputPaths {
    let base = config.out_dir.join(config.command.name());
    OutputPaths {
        csv: base.with_extension("csv"),
        json: base.with_extension("json"),
        svg: base.with_extension("svg"),
    }
}
