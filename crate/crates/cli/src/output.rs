//! CSV and JSON writers with a reproducible metadata header.
//!
//! CSV files open with `#` lines: the tool and command, the seed, one
//! `# config: key = value` line per resolved key, and any per-row
//! failures. `sed -n 's/^# config: //p' file.csv` recovers a config that
//! reproduces the file byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Command, RunConfig};
use crate::error::CliError;

/// Shortest round-trip decimal, in scientific notation outside [1e-4, 1e15).
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// A number or an empty cell.
pub fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn header(command: Command, config: &RunConfig, failures: &[String]) -> String {
    let mut s = format!("# hotcbs {} {}\n", env!("CARGO_PKG_VERSION"), command.name());
    match config.seed {
        Some(seed) => writeln!(s, "# seed: {seed}").unwrap(),
        None => s.push_str("# seed: none\n"),
    }
    for line in config.to_toml().lines() {
        writeln!(s, "# config: {line}").unwrap();
    }
    for f in failures {
        writeln!(s, "# failed: {f}").unwrap();
    }
    s
}

pub struct Output<'a> {
    pub dir: &'a Path,
    pub command: Command,
    pub config: &'a RunConfig,
}

impl Output<'_> {
    /// Writes `name` with the metadata header, `columns` and `rows`.
    pub fn csv(
        &self,
        name: &str,
        columns: &[&str],
        rows: &[Vec<String>],
        failures: &[String],
    ) -> Result<PathBuf, CliError> {
        let mut s = header(self.command, self.config, failures);
        s.push_str(&columns.join(","));
        s.push('\n');
        for row in rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        self.write(name, s)
    }

    /// Writes `body` under a metadata header (for preformatted tables).
    pub fn csv_raw(&self, name: &str, body: &str, failures: &[String]) -> Result<PathBuf, CliError> {
        let mut s = header(self.command, self.config, failures);
        s.push_str(body);
        self.write(name, s)
    }

    /// Writes `{tool, version, command, seed, config, result}` as JSON.
    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Document<'a, T> {
            tool: &'static str,
            version: &'static str,
            command: &'static str,
            seed: Option<u64>,
            config: &'a RunConfig,
            result: &'a T,
        }
        let doc = Document {
            tool: "hotcbs",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command.name(),
            seed: self.config.seed,
            config: self.config,
            result,
        };
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Numerical(format!("json: {e}")))?;
        s.push('\n');
        self.write(name, s)
    }

    fn write(&self, name: &str, contents: String) -> Result<PathBuf, CliError> {
        fs::create_dir_all(self.dir)?;
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        Ok(path)
    }
}
