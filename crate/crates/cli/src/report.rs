//! Output writers: CSV data files (6 significant digits) and the JSON run
//! manifest (full precision).

use crate::error::Result;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Six-significant-digit rendering used in every CSV data file.
pub fn sig6(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.5e}")
    } else {
        format!("{v}")
    }
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Run manifest accumulated while a command executes.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    #[serde(skip)]
    started: Instant,
    #[serde(skip)]
    out_dir: PathBuf,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value, out_dir: &Path) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            files: Vec::new(),
            warnings: Vec::new(),
            wall_seconds: 0.0,
            details: serde_json::Value::Null,
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
        }
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn add_file(&mut self, name: &str) {
        self.files.push(name.to_string());
    }

    pub fn warn(&mut self, message: String) {
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn set_details(&mut self, details: serde_json::Value) {
        self.details = details;
    }

    /// Writes `manifest.json` into the output directory.
    pub fn finish(mut self) -> Result<()> {
        self.wall_seconds = self.started.elapsed().as_secs_f64();
        self.files.push("manifest.json".into());
        let path = self.out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self)?)?;
        Ok(())
    }
}

pub fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}
