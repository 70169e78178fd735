//! Result files. CSV carries `#` provenance lines, a header row and one row per
//! sample; JSON holds the same fields and numbers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

pub fn software() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Column-labelled numeric output of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
    /// Scalar by-products such as fitted lengths, written as provenance.
    pub notes: Vec<(&'static str, f64)>,
    pub warnings: Vec<String>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub software: String,
    pub experiment: String,
    pub seed: u64,
    pub grid: Option<String>,
    pub config: BTreeMap<String, String>,
    pub notes: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultRecord {
    pub fn new(
        experiment: &str,
        seed: u64,
        grid: Option<String>,
        config: Vec<(String, String)>,
        table: Table,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            software: software(),
            experiment: experiment.to_string(),
            seed,
            grid,
            config: config.into_iter().collect(),
            notes: table.notes.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            warnings: table.warnings,
            columns: table.columns.iter().map(|c| c.to_string()).collect(),
            rows: table.rows,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# schema_version: {}", self.schema_version);
        let _ = writeln!(s, "# software: {}", self.software);
        let _ = writeln!(s, "# experiment: {}", self.experiment);
        let _ = writeln!(s, "# seed: {}", self.seed);
        if let Some(grid) = &self.grid {
            let _ = writeln!(s, "# grid: {grid}");
        }
        for (k, v) in &self.config {
            let _ = writeln!(s, "# config: {k}={v}");
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "# note: {k}={}", number(*v));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "# warning: {w}");
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| number(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Non-finite numbers become `null`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serialises");
        s.push('\n');
        s
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".into()
    }
}
