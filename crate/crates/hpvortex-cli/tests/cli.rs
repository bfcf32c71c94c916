use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"
seed = 3
[grid]
l = 8.0
n = 65
[corrector]
alphas = [1e2, 1e3, 1e4, 1e5]
data_n = 121
per_width = 8
widths = 30.0
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpvortex"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("cfg.toml");
    fs::write(&p, text).unwrap();
    p
}

fn only_run(dir: &Path) -> PathBuf {
    let mut runs: Vec<PathBuf> = fs::read_dir(dir.join("runs")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(runs.len(), 1);
    runs.pop().unwrap()
}

fn manifest_files(run: &Path) -> Vec<(String, String)> {
    let m: serde_json_like::Manifest = serde_json_like::parse(&fs::read_to_string(run.join("manifest.json")).unwrap());
    m.files
}

/// Minimal manifest reader so the test does not depend on the binary's types.
mod serde_json_like {
    pub struct Manifest {
        pub files: Vec<(String, String)>,
    }

    pub fn parse(text: &str) -> Manifest {
        let mut files = Vec::new();
        let mut name = None;
        for line in text.lines() {
            let t = line.trim().trim_end_matches(',');
            if let Some(v) = t.strip_prefix("\"name\": ") {
                name = Some(v.trim_matches('"').to_string());
            } else if let Some(v) = t.strip_prefix("\"sha256\": ") {
                files.push((name.take().unwrap(), v.trim_matches('"').to_string()));
            }
        }
        Manifest { files }
    }
}

#[test]
fn validate_fast_modules_pass_and_write_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    for module in ["fields", "greens", "spectra", "blayer"] {
        let out = run(tmp.path(), &["--config", cfg.to_str().unwrap(), "validate", module]);
        assert_eq!(out.status.code(), Some(0), "{module}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let greens = fs::read_dir(tmp.path().join("runs")).unwrap().map(|e| e.unwrap().path()).find(|p| p.to_str().unwrap().contains("validate-greens")).unwrap();
    let csv = fs::read_to_string(greens.join("greens.csv")).unwrap();
    assert!(csv.starts_with("test_id,r1,r2,r3,grid_n\n"));
    assert_eq!(csv.lines().count(), 51);
    assert!(greens.join("suite.json").is_file());
}

#[test]
fn missing_required_key_is_reported_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\nl = 8.0\nwidth = 3\n[alpha]\nvalue = \"big\"\n");
    let out = run(tmp.path(), &["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["grid.n", "grid.width", "alpha.value"] {
        assert!(err.contains(key), "{err}");
    }
}

#[test]
fn rerun_gives_identical_checksums() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let args = ["--config", cfg.to_str().unwrap(), "corrector"];
    assert_eq!(run(tmp.path(), &args).status.code(), Some(0));
    let first = manifest_files(&only_run(tmp.path()));
    let out = Command::new(env!("CARGO_BIN_EXE_hpvortex"))
        .current_dir(tmp.path())
        .env("HPVORTEX_WORKERS", "1")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let second = manifest_files(&only_run(tmp.path()));
    assert_eq!(first, second);
    assert!(first.iter().any(|(n, _)| n == "corrector.csv"));
}

#[test]
fn corrector_csv_has_schema_and_footer() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = run(tmp.path(), &["--config", cfg.to_str().unwrap(), "corrector", "--alphas", "1e2,1e3,1e4,1e5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(only_run(tmp.path()).join("corrector.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,norm_J,norm_gradJ,norm_grad2J,norm_xi_gradJ,max_div"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    assert!(text.contains("# slope_J,"));
}

#[test]
fn spectrum_and_report_group_by_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let c = cfg.to_str().unwrap();
    assert_eq!(run(tmp.path(), &["--config", c, "spectrum"]).status.code(), Some(0));
    assert_eq!(run(tmp.path(), &["--config", c, "corrector"]).status.code(), Some(0));
    let rep = run(tmp.path(), &["report", "runs"]);
    assert_eq!(rep.status.code(), Some(0));
    let text = String::from_utf8_lossy(&rep.stdout);
    let a = text.find("== corrector ==").unwrap();
    let b = text.find("== spectrum ==").unwrap();
    assert!(a < b);
    assert!(text.contains("PASS"));
}

#[test]
fn report_on_empty_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["report", "."]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corrupt_manifest_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("r");
    fs::create_dir(&run_dir).unwrap();
    fs::write(run_dir.join("manifest.json"), "{not json").unwrap();
    let out = run(tmp.path(), &["report", "r"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt manifest"));
}

#[test]
fn failed_check_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    // a disc this small cannot contain the largest-alpha eigenvalue
    let cfg = write_config(tmp.path(), "[grid]\nl = 8.0\nn = 65\n[disc]\neps = 1e-7\n");
    let out = run(tmp.path(), &["--config", cfg.to_str().unwrap(), "sweep-alpha"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn help_lists_config_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["simulate", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("simulate.horizon") && text.contains("grid.n"));
}

#[test]
fn validate_all_on_defaults_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["validate", "all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let suite = fs::read_to_string(only_run(tmp.path()).join("suite.json")).unwrap();
    assert!(!suite.contains("\"pass\": false"));
}
