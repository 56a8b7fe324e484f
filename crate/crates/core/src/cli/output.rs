//! File output helpers: CSV writing, a run manifest with content hashes,
//! and cleanup of partial outputs on failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cli::config::hex_string;
use crate::error::{Error, Result};

/// Tracks the files a command writes so that a failing command leaves no
/// partial outputs, and so the manifest can record content hashes.
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Removes everything written so far (called on command failure).
    pub fn remove_partial(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }

    /// Writes `manifest.toml`: command, seed, config snapshot and a sha256
    /// per produced file.
    pub fn write_manifest(&mut self, command: &str, seed: Option<u64>, config_toml: &str) -> Result<()> {
        let mut body = String::new();
        body.push_str("[run]\n");
        body.push_str(&format!("command = {:?}\n", command));
        body.push_str(&format!("version = {:?}\n", env!("CARGO_PKG_VERSION")));
        if let Some(seed) = seed {
            body.push_str(&format!("seed = {seed}\n"));
        }
        body.push_str("\n[config]\nsnapshot = '''\n");
        body.push_str(config_toml);
        body.push_str("'''\n\n[hashes]\n");
        let mut entries: Vec<(String, String)> = Vec::new();
        for p in &self.written {
            let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            entries.push((name, hex_string(&Sha256::digest(&bytes))));
        }
        entries.sort();
        for (name, hash) in entries {
            body.push_str(&format!("{:?} = {:?}\n", name, hash));
        }
        let path = self.path("manifest.toml");
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}

/// Serializes rows of f64 values under a one-line header using the shortest
/// round-trip float formatting (bit-exact across reruns).
pub fn csv_table(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            write_float(&mut out, v);
        }
        out.push('\n');
    }
    out
}

fn write_float(out: &mut String, v: f64) {
    use std::fmt::Write as _;
    let _ = write!(out, "{v}");
}

/// Parses a numeric CSV, skipping `#`-prefixed metadata lines; returns the
/// header fields and rows. Reports the 1-based line number on bad input.
pub fn parse_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if header.is_none() {
            header = Some(line.split(',').map(|s| s.trim().to_string()).collect());
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    let header = header.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "empty file".into(),
    })?;
    Ok((header, rows))
}

/// Reads the `# key = value` metadata lines of a CSV file.
pub fn parse_csv_metadata(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                out.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
    }
    Ok(out)
}

/// Append-only writer for CSV files with metadata comment lines.
pub struct CsvBuilder {
    buf: String,
}

impl CsvBuilder {
    pub fn new() -> Self {
        Self { buf: String::new() }
    }

    pub fn metadata(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.buf.push_str(&format!("# {key} = {value}\n"));
        self
    }

    pub fn header(&mut self, fields: &[&str]) -> &mut Self {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
        self
    }

    pub fn row(&mut self, values: &[f64]) -> &mut Self {
        let mut first = true;
        for &v in values {
            if !first {
                self.buf.push(',');
            }
            first = false;
            write_float(&mut self.buf, v);
        }
        self.buf.push('\n');
        self
    }

    pub fn finish(&self) -> &str {
        &self.buf
    }
}

impl Default for CsvBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Writes a string through to a file, for callers outside `OutputSet`.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes()).map_err(|e| Error::io(path, e))
}
