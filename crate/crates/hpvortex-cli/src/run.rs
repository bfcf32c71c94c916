//! Run directories, CSV/JSON artifacts and manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// One pass/fail line, optionally tied to an acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: Option<String>,
    pub name: String,
    pub measured: f64,
    pub target: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(criterion: Option<&str>, name: &str, measured: f64, target: &str, pass: bool) -> Self {
        Self { criterion: criterion.map(str::to_string), name: name.into(), measured, target: target.into(), pass, note: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub started: String,
    pub finished: String,
    pub versions: Vec<(String, String)>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct RunDir {
    pub path: PathBuf,
    subcommand: String,
    hash: String,
    started: String,
    files: Vec<String>,
}

/// A CSV table with an optional `# key,value` footer.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), footer: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn foot(&mut self, key: &str, value: impl ToString) {
        self.footer.push((key.into(), value.to_string()));
    }
}

impl RunDir {
    /// Creates `out/<subcommand>-<hash>` and archives the canonical config there.
    pub fn create(out: &Path, subcommand: &str, cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let text = cfg.canonical();
        let hash = sha256_hex(format!("{subcommand}\n{text}").as_bytes());
        let path = out.join(format!("{subcommand}-{}", &hash[..16]));
        fs::create_dir_all(&path)?;
        let mut dir = Self { path, subcommand: subcommand.into(), hash, started: now(), files: Vec::new() };
        dir.write_bytes("config.toml", text.as_bytes())?;
        Ok(dir)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.path.join(name), bytes)?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.into());
        }
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.header)?;
        for r in &table.rows {
            w.write_record(r)?;
        }
        let mut bytes = w.into_inner().map_err(|e| CliError::Report(e.to_string()))?;
        for (k, v) in &table.footer {
            bytes.extend_from_slice(format!("# {k},{v}\n").as_bytes());
        }
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes `summary.json` and the manifest covering every file written.
    pub fn finish(mut self, checks: &[Check]) -> Result<PathBuf, CliError> {
        self.write_json("summary.json", &checks)?;
        let mut files = Vec::new();
        for name in &self.files {
            let bytes = fs::read(self.path.join(name))?;
            files.push(FileEntry { name: name.clone(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 });
        }
        let manifest = RunManifest {
            subcommand: self.subcommand.clone(),
            config_hash: self.hash.clone(),
            started: self.started.clone(),
            finished: now(),
            versions: vec![
                ("hpvortex".into(), hpvortex_version().into()),
                ("hpvortex-cli".into(), env!("CARGO_PKG_VERSION").into()),
            ],
            files,
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(self.path.join("manifest.json"), text)?;
        Ok(self.path)
    }
}

fn hpvortex_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}
