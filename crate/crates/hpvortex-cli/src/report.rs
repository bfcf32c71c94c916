//! Human-readable summaries of run directories.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::run::{sha256_hex, Check, RunManifest};

pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub checks: Vec<Check>,
    pub corrupted: Vec<String>,
}

fn load(dir: &Path) -> Result<RunSummary, CliError> {
    let text = fs::read_to_string(dir.join("manifest.json"))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Report(format!("corrupt manifest in {}: {e}", dir.display())))?;
    let mut corrupted = Vec::new();
    for f in &manifest.files {
        match fs::read(dir.join(&f.name)) {
            Ok(b) if sha256_hex(&b) == f.sha256 => {}
            _ => corrupted.push(f.name.clone()),
        }
    }
    let checks: Vec<Check> = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)
        .map_err(|e| CliError::Report(format!("corrupt summary in {}: {e}", dir.display())))?;
    Ok(RunSummary { dir: dir.to_path_buf(), manifest, checks, corrupted })
}

/// Loads `path` itself if it holds a manifest, else every child run directory.
pub fn collect(path: &Path) -> Result<Vec<RunSummary>, CliError> {
    if path.join("manifest.json").is_file() {
        return Ok(vec![load(path)?]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("manifest.json").is_file())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(CliError::Report(format!("no run manifests under {}", path.display())));
    }
    dirs.iter().map(|d| load(d)).collect()
}

/// Text table grouped by subcommand; the flag is true when every check passed.
pub fn render(runs: &[RunSummary]) -> (String, bool) {
    let mut out = String::new();
    let mut ok = true;
    let mut order: Vec<&str> = runs.iter().map(|r| r.manifest.subcommand.as_str()).collect();
    order.sort();
    order.dedup();
    for sub in order {
        out += &format!("== {sub} ==\n");
        for r in runs.iter().filter(|r| r.manifest.subcommand == sub) {
            out += &format!("run {} (config {})\n", r.dir.display(), &r.manifest.config_hash[..16]);
            if !r.corrupted.is_empty() {
                ok = false;
                out += &format!("  checksum mismatch: {}\n", r.corrupted.join(", "));
            }
            out += &format!("  {:<9} {:<60} {:>14} {:<22} {}\n", "criterion", "check", "measured", "target", "verdict");
            for c in &r.checks {
                ok &= c.pass;
                let verdict = match (&c.note, c.pass) {
                    (Some(n), _) => n.clone(),
                    (None, true) => "PASS".into(),
                    (None, false) => "FAIL".into(),
                };
                out += &format!(
                    "  {:<9} {:<60} {:>14.6e} {:<22} {}\n",
                    c.criterion.as_deref().unwrap_or("-"),
                    c.name,
                    c.measured,
                    c.target,
                    verdict
                );
            }
        }
    }
    (out, ok)
}
