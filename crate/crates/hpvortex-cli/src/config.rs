//! Experiment configuration, its key schema and validation.

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;
use hpvortex::baseflow::{make_profile, ProfileFamily};
use hpvortex::Profile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub profile: ProfileConfig,
    pub geometry: GeometryConfig,
    pub grid: GridConfig,
    pub alpha: AlphaConfig,
    pub disc: DiscConfig,
    pub solver: SolverConfig,
    pub corrector: CorrectorConfig,
    pub simulate: SimulateConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub family: String,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeometryConfig {
    pub r0: f64,
    pub r: f64,
    pub r_list: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub l: f64,
    pub n: usize,
    pub h: f64,
    pub mask_radius: f64,
    pub mask_pad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlphaConfig {
    pub value: f64,
    pub list: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscConfig {
    pub center: Option<[f64; 2]>,
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub residual_tol: f64,
    pub dense_limit: usize,
    pub contour_nodes: usize,
    pub eps_frac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectorConfig {
    pub alphas: Vec<f64>,
    pub data_l: f64,
    pub data_n: usize,
    pub per_width: usize,
    pub widths: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub horizon: f64,
    pub eps_rel: f64,
    pub log_every: usize,
    pub dt: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            profile: ProfileConfig::default(),
            geometry: GeometryConfig::default(),
            grid: GridConfig::default(),
            alpha: AlphaConfig::default(),
            disc: DiscConfig::default(),
            solver: SolverConfig::default(),
            corrector: CorrectorConfig::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { family: "gaussian-bump".into(), a: 1.0, b: 0.0 }
    }
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { r0: 2.0, r: 4.0, r_list: vec![4.0, 6.0, 8.0, 12.0] }
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { l: 8.0, n: 129, h: 0.125, mask_radius: 2.5, mask_pad: 0.25 }
    }
}

impl Default for AlphaConfig {
    fn default() -> Self {
        Self { value: 100.0, list: vec![1e2, 1e3, 1e4, 1e5] }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { residual_tol: 1e-8, dense_limit: 20000, contour_nodes: 32, eps_frac: 0.05 }
    }
}

impl Default for CorrectorConfig {
    fn default() -> Self {
        Self { alphas: vec![1e2, 1e3, 1e4, 1e5], data_l: 6.0, data_n: 241, per_width: 16, widths: 40.0 }
    }
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { horizon: 3.0, eps_rel: 1e-6, log_every: 4, dt: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Str,
    FloatList,
    FloatPair,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Float => "number",
            Kind::Int => "non-negative integer",
            Kind::Str => "string",
            Kind::FloatList => "array of numbers",
            Kind::FloatPair => "array of two numbers",
        }
    }

    fn accepts(self, v: &Value) -> bool {
        let num = |v: &Value| matches!(v, Value::Float(_) | Value::Integer(_));
        match self {
            Kind::Float => num(v),
            Kind::Int => matches!(v, Value::Integer(i) if *i >= 0),
            Kind::Str => matches!(v, Value::String(_)),
            Kind::FloatList => matches!(v, Value::Array(a) if a.iter().all(num)),
            Kind::FloatPair => matches!(v, Value::Array(a) if a.len() == 2 && a.iter().all(num)),
        }
    }
}

/// Every accepted key with its type and description.
pub const SCHEMA: &[(&str, Kind, &str)] = &[
    ("seed", Kind::Int, "seed for randomized checks"),
    ("profile.family", Kind::Str, "gaussian-bump | polynomial-bump | nonmonotone-ring"),
    ("profile.a", Kind::Float, "profile width"),
    ("profile.b", Kind::Float, "ring strength (nonmonotone-ring)"),
    ("geometry.r0", Kind::Float, "truncation radius R0"),
    ("geometry.r", Kind::Float, "vortex height R"),
    ("geometry.r_list", Kind::FloatList, "heights for sweep-R"),
    ("grid.l", Kind::Float, "box half-width (required)"),
    ("grid.n", Kind::Int, "nodes across the box, odd (required)"),
    ("grid.h", Kind::Float, "spacing of the mirrored boxes in sweep-R"),
    ("grid.mask_radius", Kind::Float, "radius of the disc restriction around the vortex"),
    ("grid.mask_pad", Kind::Float, "mask discs in sweep-R have radius r0 + mask_pad"),
    ("alpha.value", Kind::Float, "viscosity parameter for spectrum, project and simulate"),
    ("alpha.list", Kind::FloatList, "alphas for sweep-alpha"),
    ("disc.center", Kind::FloatPair, "contour center [re, im]; defaults to the right-most eigenvalue"),
    ("disc.eps", Kind::Float, "contour radius; defaults to solver.eps_frac times the center modulus"),
    ("solver.residual_tol", Kind::Float, "eigenpair residual tolerance"),
    ("solver.dense_limit", Kind::Int, "largest dense operator"),
    ("solver.contour_nodes", Kind::Int, "initial trapezoid nodes for projections"),
    ("solver.eps_frac", Kind::Float, "contour radius relative to the eigenvalue modulus"),
    ("corrector.alphas", Kind::FloatList, "alphas for the corrector scaling fit"),
    ("corrector.data_l", Kind::Float, "half-width of the wall line"),
    ("corrector.data_n", Kind::Int, "wall samples, odd"),
    ("corrector.per_width", Kind::Int, "layer-grid points per layer width"),
    ("corrector.widths", Kind::Float, "layer widths resolved"),
    ("simulate.horizon", Kind::Float, "final self-similar time"),
    ("simulate.eps_rel", Kind::Float, "perturbation amplitude relative to the base vorticity"),
    ("simulate.log_every", Kind::Int, "steps between log entries"),
    ("simulate.dt", Kind::Float, "time step; defaults to 3/4 of the stability bound"),
];

pub const REQUIRED: &[&str] = &["grid.l", "grid.n"];

/// Schema lines for the given key prefixes, for `--help`.
pub fn schema_help(prefixes: &[&str]) -> String {
    SCHEMA
        .iter()
        .filter(|(k, _, _)| prefixes.iter().any(|p| k.starts_with(p)))
        .map(|(k, kind, d)| format!("  {k} ({}): {d}", kind.name()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn walk(prefix: &str, table: &Table, errors: &mut Vec<String>) {
    for (k, v) in table {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (SCHEMA.iter().find(|(p, _, _)| *p == path), v) {
            (Some((_, kind, _)), v) => {
                if !kind.accepts(v) {
                    errors.push(format!("`{path}`: expected {}, found {}", kind.name(), v.type_str()));
                }
            }
            (None, Value::Table(t)) if SCHEMA.iter().any(|(p, _, _)| p.starts_with(&format!("{path}."))) => {
                walk(&path, t, errors)
            }
            (None, _) => errors.push(format!("`{path}`: unknown key")),
        }
    }
}

fn lookup<'a>(table: &'a Table, path: &str) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

impl ExperimentConfig {
    /// Parses and validates a configuration file, reporting every offending key.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: Table = toml::from_str(text).map_err(|e| CliError::Schema(vec![format!("parse error: {e}")]))?;
        let mut errors = Vec::new();
        walk("", &table, &mut errors);
        for key in REQUIRED {
            if lookup(&table, key).is_none() {
                errors.push(format!("`{key}`: missing required key"));
            }
        }
        if errors.is_empty() {
            let cfg: Self = Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Schema(vec![e.to_string()]))?;
            cfg.check(&mut errors);
            if errors.is_empty() {
                return Ok(cfg);
            }
        }
        Err(CliError::Schema(errors))
    }

    fn check(&self, errors: &mut Vec<String>) {
        if self.grid.n % 2 == 0 || self.grid.n < 17 {
            errors.push(format!("`grid.n`: must be odd and at least 17, got {}", self.grid.n));
        }
        if self.corrector.data_n % 2 == 0 || self.corrector.data_n < 7 {
            errors.push(format!("`corrector.data_n`: must be odd and at least 7, got {}", self.corrector.data_n));
        }
        for (key, v) in [("grid.l", self.grid.l), ("grid.h", self.grid.h), ("grid.mask_radius", self.grid.mask_radius), ("profile.a", self.profile.a)] {
            if !(v > 0.0) {
                errors.push(format!("`{key}`: must be positive, got {v}"));
            }
        }
        if self.profile().is_err() {
            errors.push(format!("`profile.family`: unknown or invalid profile `{}`", self.profile.family));
        }
    }

    /// Canonical text used for hashing and archiving.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn profile(&self) -> hpvortex::Result<Profile> {
        let p = &self.profile;
        let family = match p.family.as_str() {
            "gaussian-bump" => ProfileFamily::GaussianBump { a: p.a },
            "polynomial-bump" => ProfileFamily::PolynomialBump { a: p.a },
            "nonmonotone-ring" => ProfileFamily::NonMonotoneRing { a: p.a, b: p.b },
            other => return Err(hpvortex::Error::BadProfileParameter(format!("unknown family {other}"))),
        };
        make_profile(family)
    }
}
