use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::json;

/// Tracks files written under one output directory and records them in
/// `manifest.json`.
pub struct OutDir {
    root: PathBuf,
    files: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.record(path.clone());
        Ok(path)
    }

    pub fn record(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    pub fn finish(self, command: &str) -> Result<()> {
        let mut entries = Vec::new();
        for path in &self.files {
            let bytes = fs::metadata(path).with_context(|| format!("reading {}", path.display()))?.len();
            let name = path.strip_prefix(&self.root).unwrap_or(path);
            entries.push(json!({ "path": name.display().to_string(), "bytes": bytes }));
        }
        let manifest = json!({ "command": command, "files": entries });
        let path = self.root.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        for f in &self.files {
            println!("wrote {}", f.display());
        }
        Ok(())
    }
}
