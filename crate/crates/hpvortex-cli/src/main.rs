mod commands;
mod config;
mod error;
mod report;
mod run;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use config::{schema_help, ExperimentConfig};
use error::CliError;
use run::{Check, RunDir};

/// Numerical laboratory for half-plane vortex instability.
#[derive(Parser)]
#[command(name = "hpvortex", version)]
struct Cli {
    /// TOML configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parent directory for run directories.
    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,
    /// Seed for randomized checks; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectrum of the linearized Euler operator around the half-plane vortex.
    Spectrum,
    /// Eigenvalue of M_alpha nearest lambda_E over a list of alphas.
    SweepAlpha,
    /// Eigenvalue and remainder norms of the mirrored pair over vortex heights.
    #[command(name = "sweep-R")]
    SweepR,
    /// Riesz projection of the linearized Euler operator onto a disc.
    Project,
    /// Scaling of the boundary-layer corrector with alpha.
    Corrector {
        /// Comma-separated alphas, overriding `corrector.alphas`.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
    /// Base and perturbed nonlinear runs and their separation rate.
    Simulate,
    /// Property suite for one module or all of them.
    Validate {
        #[arg(value_parser = ["fields", "greens", "operators", "spectra", "blayer", "simulate", "all"])]
        module: String,
    },
    /// Pass/fail summary of a run directory or a directory of runs.
    Report { dir: PathBuf },
}

fn command() -> clap::Command {
    let fragments: [(&str, &[&str]); 7] = [
        ("spectrum", &["profile", "geometry.r0", "geometry.r", "grid", "solver", "seed"]),
        ("sweep-alpha", &["profile", "geometry.r0", "geometry.r", "grid", "alpha.list", "disc.eps", "solver"]),
        ("sweep-R", &["profile", "geometry", "grid.h", "grid.mask_pad", "solver"]),
        ("project", &["profile", "geometry.r0", "geometry.r", "grid", "disc", "solver"]),
        ("corrector", &["corrector"]),
        ("simulate", &["profile", "geometry.r0", "geometry.r", "grid", "alpha.value", "simulate", "solver"]),
        ("validate", &["seed", "profile", "geometry", "grid", "alpha.value", "corrector", "solver"]),
    ];
    let mut cmd = Cli::command();
    for (name, keys) in fragments {
        let text = format!("Configuration keys:\n{}", schema_help(keys));
        cmd = cmd.mut_subcommand(name, |s| s.after_help(text));
    }
    cmd
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::parse(&std::fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    if let Cmd::Report { dir } = &cli.cmd {
        let runs = report::collect(dir)?;
        let (text, ok) = report::render(&runs);
        print!("{text}");
        return Ok(ok);
    }
    let cfg = load_config(cli)?;
    let name = match &cli.cmd {
        Cmd::Spectrum => "spectrum".to_string(),
        Cmd::SweepAlpha => "sweep-alpha".into(),
        Cmd::SweepR => "sweep-R".into(),
        Cmd::Project => "project".into(),
        Cmd::Corrector { .. } => "corrector".into(),
        Cmd::Simulate => "simulate".into(),
        Cmd::Validate { module } => format!("validate-{module}"),
        Cmd::Report { .. } => unreachable!(),
    };
    let mut dir = RunDir::create(&cli.out, &name, &cfg)?;
    let checks: Vec<Check> = match &cli.cmd {
        Cmd::Spectrum => commands::spectrum(&cfg, &mut dir)?,
        Cmd::SweepAlpha => commands::sweep_alpha_cmd(&cfg, &mut dir)?,
        Cmd::SweepR => commands::sweep_r_cmd(&cfg, &mut dir)?,
        Cmd::Project => commands::project(&cfg, &mut dir)?,
        Cmd::Corrector { alphas } => commands::corrector(&cfg, alphas.clone(), &mut dir)?,
        Cmd::Simulate => commands::simulate(&cfg, &mut dir)?,
        Cmd::Validate { module } => validate::validate(&cfg, module, &mut dir)?,
        Cmd::Report { .. } => unreachable!(),
    };
    let ok = checks.iter().all(|c| c.pass);
    for c in &checks {
        let verdict = c.note.clone().unwrap_or_else(|| if c.pass { "PASS".into() } else { "FAIL".into() });
        println!("[{}] {}: {:e} (target {}) {verdict}", c.criterion.as_deref().unwrap_or("-"), c.name, c.measured, c.target);
    }
    let path = dir.finish(&checks)?;
    println!("run directory: {}", path.display());
    Ok(ok)
}

fn main() -> ExitCode {
    let matches = command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(n) = std::env::var("HPVORTEX_WORKERS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
