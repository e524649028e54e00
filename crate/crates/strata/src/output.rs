//! Tidy CSV tables and JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use strata_core::dynamics::{DiagnosticRow, Snapshot};
use strata_core::model::Grid1D;

use crate::error::{CliError, CliResult};

/// Fixed 17-significant-digit float formatting.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// A header plus rows of pre-formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_text(path, &self.render())
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Validation(format!("serializing {}: {e}", path.display())))?;
    s.push('\n');
    write_text(path, &s)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `t,x,<fields>` for every snapshot, every `stride`-th cell.
pub fn fields_table(
    grid: &Grid1D,
    names: &[String],
    snapshots: &[Snapshot],
    stride: usize,
) -> String {
    let mut s = String::from("t,x");
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    let xs = grid.centers();
    for snap in snapshots {
        let t = num(snap.t);
        for c in (0..xs.len()).step_by(stride) {
            let _ = write!(s, "{t},{}", num(xs[c]));
            for f in &snap.fields {
                let _ = write!(s, ",{}", num(f[c]));
            }
            s.push('\n');
        }
    }
    s
}

pub fn diagnostics_table(rows: &[DiagnosticRow], symmetry: bool) -> Table {
    let k = rows.first().map_or(0, |r| r.position.len());
    let mut header: Vec<String> = vec!["t".into(), "H".into(), "K".into()];
    header.extend((1..=k).map(|j| format!("Z{j}")));
    header.extend((1..=k).map(|j| format!("S{j}")));
    header.extend(
        [
            "Pi",
            "maxgrad",
            "gradient_growth",
            "grid_ratio",
            "hyperbolic",
        ]
        .map(String::from),
    );
    if symmetry {
        header.push("symmetry_residual".into());
    }
    let mut t = Table::new(header);
    for r in rows {
        let mut row = vec![num(r.t), num(r.energy), num(r.impulse)];
        row.extend(r.position.iter().map(|v| num(*v)));
        row.extend(r.shear.iter().map(|v| num(*v)));
        row.push(opt(r.momentum));
        row.push(num(r.max_gradient));
        row.push(num(r.gradient_growth));
        row.push(opt(r.grid_ratio));
        row.push(if r.hyperbolic { "1" } else { "0" }.into());
        if symmetry {
            row.push(opt(r.symmetry_residual));
        }
        t.push(row);
    }
    t
}
