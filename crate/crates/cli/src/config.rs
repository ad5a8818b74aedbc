//! Flat `key = value` configs with an `include <path>` directive.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

/// Keys whose values are file paths, resolved against the including file.
const PATH_KEYS: &[&str] = &[
    "sequence", "system", "problem", "signal", "weights", "data", "manifest", "nodes",
];

const MAX_INCLUDE_DEPTH: usize = 16;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Every file read while loading, in order.
    pub sources: Vec<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        cfg.read_file(path, 0)?;
        Ok(cfg)
    }

    fn read_file(&mut self, path: &Path, depth: usize) -> Result<(), CliError> {
        if depth > MAX_INCLUDE_DEPTH {
            return Err(CliError::Config(format!(
                "include depth exceeded at {}",
                path.display()
            )));
        }
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.sources.push(path.to_path_buf());
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("include ") {
                self.read_file(&base.join(rest.trim()), depth + 1)?;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{}:{}: expected key = value", path.display(), k + 1)))?;
            self.set(key.trim(), value.trim(), &base)?;
        }
        Ok(())
    }

    /// Command-line `key=value` overrides; paths relative to the working directory.
    pub fn apply_override(&mut self, item: &str) -> Result<(), CliError> {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override {item:?} is not key=value")))?;
        self.set(key.trim(), value.trim(), Path::new(""))
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), CliError> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return Err(CliError::Config(format!("malformed key {key:?}")));
        }
        let value = if is_path_key(key) && !value.is_empty() {
            base.join(value).to_string_lossy().into_owned()
        } else {
            value.to_string()
        };
        self.values.insert(key.to_string(), value);
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &String)> {
        self.values.iter()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("missing required key {key:?}")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("cannot parse {key} = {v:?}"))),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    /// Comma-separated list of floats.
    pub fn float_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("cannot parse {key} = {v:?}")))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    /// Reject keys outside `allowed` (misspellings would otherwise be ignored).
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        for key in self.values.keys() {
            if key == "out"
                || allowed.contains(&key.as_str())
                || key.starts_with("member.") && allowed.contains(&"member.*")
            {
                continue;
            }
            return Err(CliError::Config(format!("unknown key {key:?} for this command")));
        }
        Ok(())
    }

    /// Merge the keys of a manifest file without overriding existing ones.
    pub fn merge_defaults(&mut self, path: &Path) -> Result<(), CliError> {
        let mut other = Config::default();
        other.read_file(path, 0)?;
        for (k, v) in other.values {
            self.values.entry(k).or_insert(v);
        }
        self.sources.extend(other.sources);
        Ok(())
    }
}

fn is_path_key(key: &str) -> bool {
    PATH_KEYS.contains(&key) || key.starts_with("member.")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn include_and_override() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/base.cfg"), "p = 2\nsequence = seq.txt\n").unwrap();
        fs::write(dir.path().join("main.cfg"), "# run\ninclude sub/base.cfg\np = 3\n").unwrap();
        let mut cfg = Config::load(&dir.path().join("main.cfg")).unwrap();
        assert_eq!(cfg.get("p"), Some("3"));
        assert_eq!(Path::new(cfg.get("sequence").unwrap()), dir.path().join("sub/seq.txt"));
        cfg.apply_override("p=4").unwrap();
        assert_eq!(cfg.parse::<f64>("p").unwrap(), Some(4.0));
        assert_eq!(cfg.sources.len(), 2);
        assert!(cfg.check_keys(&["p"]).is_err());
        assert!(cfg.check_keys(&["p", "sequence"]).is_ok());
    }

    #[test]
    fn malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.cfg"), "p 2\n").unwrap();
        assert!(matches!(
            Config::load(&dir.path().join("a.cfg")),
            Err(CliError::Config(_))
        ));
        fs::write(dir.path().join("b.cfg"), "include b.cfg\n").unwrap();
        assert!(Config::load(&dir.path().join("b.cfg")).is_err());
    }
}
