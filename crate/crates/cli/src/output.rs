//! CSV tables and their `.meta` companions.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::ExperimentSpec;
use crate::error::CliError;

/// Directory for outputs written without an explicit path.
pub const OUTPUT_DIR_ENV: &str = "IRS_SOP_OUTPUT_DIR";

/// An in-memory table with a fixed header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    /// RFC 4180 text.
    pub fn to_csv(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let bytes = self.to_csv().map_err(|source| CliError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
    }
}

/// Shortest round-trip decimal, scientific for very small or large
/// magnitudes; non-finite values become empty cells.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

/// `explicit`, else `default_name` inside `$IRS_SOP_OUTPUT_DIR` or the
/// working directory.
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(default_name),
        _ => PathBuf::from(default_name),
    }
}

pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta")
}

/// `.meta` text: provenance comments, the resolved configuration in config
/// file syntax, then command-specific notes as comments.
pub fn meta_text(command: &str, spec: &ExperimentSpec, notes: &[(String, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# irs-sop {}", irs_sop::VERSION);
    let _ = writeln!(s, "# command = {command}");
    if spec.trials_defaulted {
        let _ = writeln!(
            s,
            "# trials = {} is the built-in default, not a value fixed by the model",
            spec.trials
        );
    }
    s.push_str(&spec.to_config_text());
    for (k, v) in notes {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

pub fn write_meta(csv: &Path, text: &str) -> Result<PathBuf, CliError> {
    let path = meta_path(csv);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
