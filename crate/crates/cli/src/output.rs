//! Artifact collection, provenance summary and atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Outputs of one command, held in memory until everything has succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
    results: Vec<(String, String)>,
    inputs: Vec<(String, String)>,
}

impl Artifacts {
    pub fn file(&mut self, name: &str, content: String) {
        self.files.push((name.to_string(), content));
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }

    /// Record an input file by name and content hash.
    pub fn input(&mut self, path: &Path, bytes: &[u8]) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let entry = (name, sha256_hex(bytes));
        if !self.inputs.contains(&entry) {
            self.inputs.push(entry);
        }
    }

    pub fn results(&self) -> &[(String, String)] {
        &self.results
    }

    /// `summary.txt`: command, version, seed, parameters, input and
    /// artifact hashes, results. Deliberately free of timestamps and
    /// absolute paths so that reruns are byte-identical.
    pub fn summary(&self, command: &str, seed: u64, cfg: &Config) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command = {command}");
        let _ = writeln!(s, "tool = pwtool {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "seed = {seed}");
        for (k, v) in cfg.entries() {
            if k == "out" || k == "seed" {
                continue;
            }
            let shown = if Path::new(v).components().count() > 1 {
                Path::new(v)
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            } else {
                v.clone()
            };
            let _ = writeln!(s, "param.{k} = {shown}");
        }
        for (name, hash) in &self.inputs {
            let _ = writeln!(s, "input.{name} = sha256:{hash}");
        }
        for (name, content) in &self.files {
            let _ = writeln!(s, "artifact.{name} = sha256:{}", sha256_hex(content.as_bytes()));
        }
        for (k, v) in &self.results {
            let _ = writeln!(s, "result.{k} = {v}");
        }
        s
    }

    /// Write every artifact plus `summary.txt` through temp files and renames.
    pub fn write(mut self, dir: &Path, command: &str, seed: u64, cfg: &Config) -> Result<Vec<PathBuf>, CliError> {
        let summary = self.summary(command, seed, cfg);
        self.files.push(("summary.txt".to_string(), summary));
        fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, content) in &self.files {
            let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
            if let Err(e) = fs::write(&tmp, content) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(e.into());
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, dst) in staged {
            fs::rename(&tmp, &dst)?;
            written.push(dst);
        }
        Ok(written)
    }
}

/// Prefix CSV text with a provenance comment line.
pub fn with_provenance(command: &str, seed: u64, csv: String) -> String {
    format!("# pwtool {command} seed={seed}\n{csv}")
}
