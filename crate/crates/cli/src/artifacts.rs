use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use steer_core::protocol::sha256_hex;

/// One timestamped output directory with a digest-linked manifest.
pub struct RunDir {
    path: PathBuf,
    command: String,
    started: DateTime<Utc>,
    files: Vec<(String, String)>,
    entries: Vec<(String, String)>,
}

impl RunDir {
    pub fn create(base: &Path, command: &str) -> Result<Self> {
        let started = Utc::now();
        let stamp = started.format("%Y%m%dT%H%M%S");
        let mut path = base.join(format!("{command}-{stamp}"));
        let mut k = 1;
        while path.exists() {
            k += 1;
            path = base.join(format!("{command}-{stamp}-{k}"));
        }
        std::fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(RunDir {
            path,
            command: command.to_string(),
            started,
            files: Vec::new(),
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path.join(name);
        std::fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        self.files.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    /// Extra `key = value` line in the manifest header.
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn finish(self) -> Result<PathBuf> {
        let mut m = String::new();
        let _ = writeln!(m, "command = {}", self.command);
        let _ = writeln!(m, "start = {}", self.started.to_rfc3339());
        let _ = writeln!(m, "end = {}", Utc::now().to_rfc3339());
        for (k, v) in &self.entries {
            let _ = writeln!(m, "{k} = {v}");
        }
        let _ = writeln!(m, "[files]");
        for (name, digest) in &self.files {
            let _ = writeln!(m, "{name} sha256:{digest}");
        }
        let p = self.path.join("manifest.txt");
        std::fs::write(&p, m).with_context(|| format!("writing {}", p.display()))?;
        Ok(self.path)
    }
}
