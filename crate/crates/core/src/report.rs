//! Tabular sweep reports and their CSV serialization.

use crate::numerics::fnv1a;

/// A parameter-sweep record: named numeric columns, one row per parameter
/// value, plus reproducibility metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Config fingerprint, stable across runs of the same experiment.
    pub config_hash: u64,
    pub code_version: String,
    /// Wall time of the run in seconds; excluded from determinism checks.
    pub wall_time_s: f64,
}

impl SweepReport {
    pub fn new(columns: &[&str], config: &str) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            config_hash: fnv1a(config.as_bytes()),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "column count must be constant");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// CSV with a one-line header and 12 significant digits per float.
    /// Metadata lines are `#`-prefixed; the wall-time line is the only
    /// non-reproducible one.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# config={:016x}\n", self.config_hash));
        out.push_str(&format!("# version={}\n", self.code_version));
        out.push_str(&format!("# wall_time_s={:.3}\n", self.wall_time_s));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format_sig(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 12 significant digits.
pub fn format_sig(v: f64) -> String {
    format!("{v:.11e}")
}
