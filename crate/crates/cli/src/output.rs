use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::{CliError, Result};

/// Run details kept apart from the report so that the report bytes depend
/// only on the configuration.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub generated_unix: u64,
}

impl Metadata {
    /// `SOURCE_DATE_EPOCH` overrides the clock.
    pub fn now() -> Self {
        let generated_unix = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0));
        Self { tool: "tractorforms".into(), version: env!("CARGO_PKG_VERSION").into(), generated_unix }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T> {
    pub schema: String,
    pub report: T,
    pub metadata: Metadata,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(schema: &str, report: T) -> Self {
        Self { schema: schema.to_string(), report, metadata: Metadata::now() }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map(|s| s + "\n").map_err(|e| CliError::Io(e.to_string()))
    }
}

/// An output file opened before any work starts, so an unwritable path is
/// reported immediately.
pub struct OutFile {
    path: PathBuf,
    file: File,
}

impl OutFile {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(Self { path: path.to_path_buf(), file })
    }

    pub fn create_opt(path: Option<&PathBuf>) -> Result<Option<Self>> {
        path.map(|p| Self::create(p)).transpose()
    }

    pub fn write(mut self, contents: &str) -> Result<()> {
        self.file
            .write_all(contents.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", self.path.display())))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Mesh and promoted-table cache, `TRACTORFORMS_CACHE` or a directory under
/// the system temp dir.
pub fn cache_dir() -> PathBuf {
    match std::env::var_os("TRACTORFORMS_CACHE") {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => std::env::temp_dir().join("tractorforms-cache"),
    }
}
