use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use tdagate_core::data_io::write_atomic;

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a [String],
    seed: Option<u64>,
    inputs: &'a [FileEntry],
    outputs: &'a [FileEntry],
}

/// Output directory that remembers what it wrote, so a failed run can be
/// cleaned up and a successful one can list its files in a manifest.
pub struct Outputs {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<FileEntry>,
    inputs: Vec<FileEntry>,
    seed: Option<u64>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
            inputs: Vec::new(),
            seed: None,
        })
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    /// Records the hash of an input file, or of every file below an input
    /// directory.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let mut files = Vec::new();
        collect_files(path, &mut files)?;
        for f in files {
            let bytes = fs::read(&f).with_context(|| format!("reading {}", f.display()))?;
            self.inputs.push(FileEntry {
                path: f.display().to_string(),
                sha256: hex(&Sha256::digest(&bytes)),
            });
        }
        Ok(())
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(FileEntry {
            path: name.to_string(),
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Registers a file produced by a library call that writes directly.
    pub fn record(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path).with_context(|| format!("reading back {}", path.display()))?;
        self.written.push(FileEntry {
            path: name.to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        });
        Ok(path)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn finish(mut self, command: &[String]) -> Result<PathBuf> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.seed,
            inputs: &self.inputs,
            outputs: &self.written,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        write_atomic(&path, text.as_bytes())?;
        self.written.clear();
        Ok(path)
    }

    /// Removes everything written so far, and the directory if this run
    /// created it.
    pub fn discard(self) {
        for f in &self.written {
            let _ = fs::remove_file(self.dir.join(&f.path));
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        entries.sort();
        for e in entries {
            collect_files(&e, out)?;
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
