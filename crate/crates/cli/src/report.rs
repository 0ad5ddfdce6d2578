use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fundsol_core::solution::{Budgets, Resolved as ResolvedNumerics};
use fundsol_core::symbol::SymbolFile;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Resolved, RunConfig, VariantFlag};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub config: RunConfig,
    pub symbol: Option<SymbolFile>,
    pub variant: VariantFlag,
    pub budget_scale: f64,
    pub seed: u64,
    pub budgets: Budgets,
    /// Parameters derived at run time (sphere level, window, cutoff).
    pub numerics: Option<ResolvedNumerics>,
}

impl Provenance {
    pub fn new(command: &str, r: &Resolved) -> Self {
        Self {
            tool: "fundsol".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: fundsol_core::VERSION.into(),
            command: command.into(),
            config_path: r.config_path.as_ref().map(|p| p.display().to_string()),
            config: r.config.clone(),
            symbol: r.symbol_file.clone(),
            variant: r.variant,
            budget_scale: r.budget_scale,
            seed: r.seed,
            budgets: r.budgets.clone(),
            numerics: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, headers: &[&str]) -> Self {
        Self {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row<S: ToString>(&mut self, cells: &[S]) {
        self.rows.push(cells.iter().map(|c| c.to_string()).collect());
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let pad = w - c.chars().count();
                // numbers right-aligned, text left-aligned
                let digits = c.trim_start_matches(['-', '+']);
                if !digits.is_empty() && digits.starts_with(|ch: char| ch.is_ascii_digit()) {
                    s.push_str(&" ".repeat(pad));
                    s.push_str(c);
                } else {
                    s.push_str(c);
                    s.push_str(&" ".repeat(pad));
                }
            }
            s.trim_end().to_string()
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{}", line(&self.headers));
        let total: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        let _ = writeln!(out, "{}", "-".repeat(total));
        for r in &self.rows {
            let _ = writeln!(out, "{}", line(r));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub status: Status,
    pub tables: Vec<Table>,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(out, "fundsol {} (core {}): {}", p.version, p.core_version, p.command);
        if let Some(path) = &p.config_path {
            let _ = writeln!(out, "config   {path}");
        }
        if let Some(sym) = &p.symbol {
            let _ = writeln!(out, "symbol   {} (n = {}, k = {})", sym.name.as_deref().unwrap_or("-"), sym.n, sym.k);
        }
        let _ = writeln!(
            out,
            "variant  {}   budget scale {}   seed {}",
            serde_json::to_value(p.variant).unwrap().as_str().unwrap(),
            p.budget_scale,
            p.seed
        );
        if let Some(num) = &p.numerics {
            let _ = writeln!(
                out,
                "numerics level {}  points {}  eps {:.6e}  rho {:.6e}  estimator {}",
                num.level,
                num.sphere_points,
                num.eps,
                num.rho,
                num.estimator.tag()
            );
        }
        for t in &self.tables {
            out.push('\n');
            out.push_str(&t.render());
        }
        let _ = writeln!(out, "\nstatus: {}", serde_json::to_value(self.status).unwrap().as_str().unwrap());
        out
    }
}

/// A finished command: the report, auxiliary CSV files and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<(String, String)>,
    pub exit_code: i32,
    pub out: Option<PathBuf>,
}

impl Outcome {
    /// Writes `report.json`, `report.txt` and the CSV files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut written = Vec::new();
        let entries = [
            ("report.json".to_string(), self.report.to_json()),
            ("report.txt".to_string(), self.report.to_text()),
        ];
        for (name, content) in entries.iter().chain(&self.files) {
            let path = dir.join(name);
            fs::write(&path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn complex(re: f64, im: f64) -> String {
    if im == 0.0 {
        format!("{re:.10e}")
    } else {
        format!("{re:.10e}{}{:.10e}i", if im < 0.0 { "-" } else { "+" }, im.abs())
    }
}

/// Short form for small exact values such as `-3`, `i`, `1+2i`.
pub fn short_complex(re: f64, im: f64) -> String {
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re}"),
        (true, false) if im == 1.0 => "i".into(),
        (true, false) => format!("{im}i"),
        _ => format!("{re}{}{}i", if im < 0.0 { "-" } else { "+" }, im.abs()),
    }
}
