use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use cwave_core::Error;

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Hash of the configuration with the output directory blanked, so the same experiment written
/// to two places carries the same hash.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, Error> {
    let mut c = cfg.clone();
    c.output_dir = PathBuf::new();
    let bytes = serde_json::to_vec(&c).map_err(|e| Error::Io(e.to_string()))?;
    Ok(sha256_hex(&bytes))
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

/// Collects the files of one run under a single directory, all tagged with the manifest hash.
#[derive(Debug)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub hash: String,
    pub files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn new(dir: PathBuf, hash: String) -> Self {
        Self { dir, hash, files: Vec::new() }
    }

    /// Same hash, files under `dir/sub`, listed with the `sub/` prefix.
    pub fn child(&self, sub: &str) -> Self {
        Self { dir: self.dir.join(sub), hash: self.hash.clone(), files: Vec::new() }
    }

    pub fn adopt(&mut self, sub: &str, child: Artifacts) {
        for f in child.files {
            self.files.push(FileEntry { name: format!("{sub}/{}", f.name), sha256: f.sha256 });
        }
    }

    pub fn hash(&self) -> Option<&str> {
        Some(&self.hash)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Error> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Runs one of the core CSV writers into memory, then writes the result atomically.
    pub fn csv<F>(&mut self, name: &str, fill: F) -> Result<(), Error>
    where
        F: FnOnce(&mut Vec<u8>, Option<&str>) -> Result<(), Error>,
    {
        let mut buf = Vec::new();
        fill(&mut buf, Some(&self.hash))?;
        self.write(name, &buf)
    }

    /// Header plus rows of already formatted fields.
    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Error> {
        self.csv(name, |buf, hash| {
            if let Some(h) = hash {
                writeln!(buf, "# manifest_sha256={h}")?;
            }
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
            Ok(())
        })
    }

    pub fn svg(&mut self, name: &str, body: String) -> Result<(), Error> {
        let tagged = body.replacen("<svg ", &format!("<!-- manifest_sha256={} -->\n<svg ", self.hash), 1);
        self.write(name, tagged.as_bytes())
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), Error> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub manifest_sha256: &'a str,
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: &'static str,
    pub status: &'a str,
    pub exit_code: i32,
    pub config: &'a ExperimentConfig,
    pub files: &'a [FileEntry],
}
