//! Collect-then-write output handling. Reports are rendered in memory first
//! and hit the disk only once every analysis has succeeded; a failed write
//! removes whatever this run already created, so an output directory never
//! holds a partial set.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

pub struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    /// File names staged so far, in insertion order.
    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write(self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.dir)
            .with_context(|| format!("create output directory {}", self.dir.display()))?;
        let mut written: Vec<PathBuf> = Vec::new();
        for (name, contents) in &self.files {
            let path = self.dir.join(name);
            match fs::write(&path, contents) {
                Ok(()) => written.push(path),
                Err(err) => {
                    for w in &written {
                        let _ = fs::remove_file(w);
                    }
                    return Err(err).with_context(|| format!("write {}", path.display()));
                }
            }
        }
        Ok(())
    }
}

/// Formats an optional value, leaving the CSV cell empty for `None`.
pub fn opt_cell<T: std::fmt::Display>(value: Option<T>) -> String {
    value.map_or_else(String::new, |v| v.to_string())
}
