//! The one-shot property suite behind `validate`.

use std::sync::Arc;

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hpvortex::baseflow::{single_vortex, truncate};
use hpvortex::blayer::{corrector_scaling, BoundaryData};
use hpvortex::fields::io::{read_binary, write_binary};
use hpvortex::fields::reflect::{odd_extend, restrict_half};
use hpvortex::fields::{make_grid, DomainKind, ScalarField, WeightKind};
use hpvortex::greens::{biot_savart_half, biot_savart_whole, check_bs_inequalities, PoissonSolver, SolverKind};
use hpvortex::operators::{assemble_transport, harmonic_bound, DomainRestriction};
use hpvortex::simulate::{jacobian_check, Simulator};
use hpvortex::spectra::spectral_projection;
use hpvortex::{Field, Grid, C64};

use crate::commands::problem;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::run::{num, Check, RunDir, Table};

pub const MODULES: [&str; 6] = ["fields", "greens", "operators", "spectra", "blayer", "simulate"];

/// Gaussian bump minus its mirror image, so the wall trace vanishes.
fn gaussian_bump(g: Grid, rng: &mut ChaCha8Rng) -> Field {
    let l = g.half_width();
    let c = (rng.random_range(-0.4 * l..0.4 * l), rng.random_range(0.2 * l..0.5 * l));
    let s = rng.random_range(0.3..0.9);
    let a = rng.random_range(-2.0..2.0);
    let b = move |x: f64, y: f64| (-((x - c.0).powi(2) + (y - c.1).powi(2)) / (s * s)).exp();
    ScalarField::from_fn(g, |x, y| a * (b(x, y) - b(x, -y)))
}

/// Mean-zero field odd in `xi_2`: a Gaussian-damped polynomial plus reflected bump pairs.
fn odd_field(g: Grid, rng: &mut ChaCha8Rng) -> Field {
    let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    let bumps: Vec<(f64, f64, f64, f64)> = (0..2)
        .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.5..3.0), rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0)))
        .collect();
    ScalarField::from_fn(g, |x, y| {
        let poly = y * (c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * y * y + c[5] * x * y);
        let mut v = poly * (-3.0 * (x * x + y * y) / 16.0).exp();
        for &(bx, by, s, a) in &bumps {
            let b = |yy: f64| (-((x - bx).powi(2) + (yy - by).powi(2)) / (s * s)).exp();
            v += a * (b(y) - b(-y));
        }
        v
    })
}

fn half_grid(cfg: &ExperimentConfig) -> Result<Grid, CliError> {
    Ok(make_grid(DomainKind::Half, cfg.grid.l, cfg.grid.n)?)
}

fn fields(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let g = half_grid(cfg)?;
    let f = odd_field(g, rng);
    let back = restrict_half(&odd_extend(&f, 1e-8)?)?;
    let d = back.sub(&f)?.max_abs();
    let mut buf = Vec::new();
    write_binary(&f, &mut buf)?;
    let r: Field = read_binary(buf.as_slice())?;
    let exact = r.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(vec![
        Check::new(None, "odd extension then restriction is the identity", d, "= 0", d == 0.0),
        Check::new(None, "binary round trip is bit-exact", 0.0, "bit-exact", exact),
    ])
}

fn greens(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng, dir: &mut RunDir) -> Result<Vec<Check>, CliError> {
    let g = half_grid(cfg)?;
    let solver = PoissonSolver::new(g, SolverKind::SineTransform)?;
    let mut t = Table::new(&["test_id", "r1", "r2", "r3", "grid_n"]);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let r = check_bs_inequalities(&gaussian_bump(g, rng), &solver)?;
        worst = worst.max(r.r2);
        t.row(vec![k.to_string(), num(r.r1), num(r.r2), num(r.r3), g.n().to_string()]);
    }
    dir.write_csv("greens.csv", &t)?;
    let whole = PoissonSolver::new(g.to_whole(), SolverKind::SineTransform)?;
    let direct = PoissonSolver::new(g, SolverKind::DirectSparse)?;
    let mut gap = 0.0_f64;
    for _ in 0..10 {
        let w = gaussian_bump(g, rng);
        let (vh, _) = biot_savart_half(&w, &direct)?;
        let (vw, _) = biot_savart_whole(&odd_extend(&w, 0.0)?, &whole)?;
        let d1 = vh.v1.sub(&restrict_half(&vw.v1)?)?.max_abs();
        let d2 = vh.v2.sub(&restrict_half(&vw.v2)?)?.max_abs();
        gap = gap.max(d1).max(d2);
    }
    Ok(vec![
        Check::new(Some("1"), "max ||grad K|| / ||omega|| over 50 bumps", worst, "<= 1.05", worst <= 1.05),
        Check::new(Some("2"), "image method vs odd extension, max node gap", gap, "<= 1e-6", gap <= 1e-6),
    ])
}

fn frobenius_ratio(cfg: &ExperimentConfig, n: usize) -> Result<f64, CliError> {
    let p = truncate(&cfg.profile()?, cfg.geometry.r0)?;
    let g = make_grid(DomainKind::Half, cfg.grid.l, n)?;
    let base = single_vortex(&p, (0.0, cfg.geometry.r), g);
    let r = Arc::new(DomainRestriction::full_interior(g)?);
    let t = assemble_transport(&base.u, &r)?;
    Ok(t.symmetric_part_norm() / t.frobenius())
}

fn operators(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let g = half_grid(cfg)?;
    let w = WeightKind::gaussian();
    let mut worst = f64::INFINITY;
    let mut all = true;
    for _ in 0..100 {
        let b = harmonic_bound(&odd_field(g, rng), &w)?;
        worst = worst.min(b.form / b.rhs());
        all &= b.holds(0.05);
    }
    let q = frobenius_ratio(cfg, 41)? / frobenius_ratio(cfg, 81)?;
    Ok(vec![
        Check::new(Some("3"), "min form / (D/8 + X/128 + 3N/16) over 100 odd fields", worst, ">= 0.95", all),
        Check::new(Some("4"), "||A + A^T|| / ||A|| ratio under halving h", q, "[1.5, 2.5]", (1.5..=2.5).contains(&q)),
    ])
}

fn spectra(rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let n = 20;
    let d: Vec<C64> = (0..n).map(|k| C64::new(k as f64 * 0.5 - 3.0, (k % 5) as f64 * 0.7)).collect();
    let q = Mat::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let qi = q.partial_piv_lu().inverse();
    let dm = Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { C64::new(0.0, 0.0) });
    let a = &q * dm * qi;
    let one = spectral_projection(&a, d[7], 0.2, 32)?;
    let none = spectral_projection(&a, C64::new(20.0, 20.0), 0.5, 32)?;
    Ok(vec![
        Check::new(Some("7"), "rank inside a disc around one eigenvalue", one.rank as f64, "= 1", one.rank == 1),
        Check::new(Some("7"), "rank inside an empty disc", none.rank as f64, "= 0", none.rank == 0),
        Check::new(Some("7"), "idempotency defect", one.idempotency, "<= 1e-6", one.idempotency <= 1e-6),
        Check::new(Some("7"), "change under node doubling", one.change, "< 1e-8", one.change < 1e-8),
    ])
}

fn blayer(cfg: &ExperimentConfig) -> Result<Vec<Check>, CliError> {
    let c = &cfg.corrector;
    let h = BoundaryData::from_fn(c.data_l, c.data_n, |x| (-x * x).exp())?;
    let r = corrector_scaling(&h, &c.alphas, c.per_width, c.widths)?;
    let targets = [-0.25, 0.25, 0.75];
    let mut out: Vec<Check> = (0..3)
        .map(|k| Check::new(Some("9"), &format!("slope of ||grad^{k} J||"), r.slopes[k], &format!("{} +/- 0.05", targets[k]), (r.slopes[k] - targets[k]).abs() <= 0.05))
        .collect();
    out.push(Check::new(Some("9"), "exact wall data", 0.0, "= 0", r.wall_exact()));
    out.push(Check::new(Some("9"), "divergence within differencing scale", 0.0, "<= 10 scale", r.divergence_ok(10.0)));
    Ok(out)
}

fn simulate(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Check>, CliError> {
    let hp = problem(cfg)?;
    let sim = Simulator::new(&hp, cfg.alpha.value)?;
    let base: Vec<f64> = hp.restriction.gather(&hp.base.omega).iter().map(|w| cfg.alpha.value * w).collect();
    let eq = sim.rhs_omega(&base).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let dirs: Vec<Vec<f64>> = (0..10).map(|_| (0..sim.dof()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let step = 1e-4;
    let j = jacobian_check(&sim, &dirs, step);
    let coarse = jacobian_check(&sim, &dirs, 10.0 * step);
    let first_order = j.errors.iter().zip(&coarse.errors).all(|(f, c)| (5.0..=20.0).contains(&(c / f)));
    Ok(vec![
        Check::new(Some("11"), "rhs at alpha Omega_E", eq, "<= 1e-12", eq <= 1e-12),
        Check::new(Some("11"), "Jacobian vs alpha M_alpha, 10 random directions", j.max_error(), "<= 1e-6 + O(step)", j.max_error() <= 1e-6 + 10.0 * step),
        Check::new(Some("11"), "Jacobian defect first order in the step", 0.0, "ratio in [5, 20]", first_order),
    ])
}

/// Runs the checks of `module` (or all modules) and writes `suite.json`.
pub fn validate(cfg: &ExperimentConfig, module: &str, dir: &mut RunDir) -> Result<Vec<Check>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mods: Vec<&str> = if module == "all" { MODULES.to_vec() } else { vec![module] };
    let mut checks = Vec::new();
    for m in mods {
        let mut c = match m {
            "fields" => fields(cfg, &mut rng)?,
            "greens" => greens(cfg, &mut rng, dir)?,
            "operators" => operators(cfg, &mut rng)?,
            "spectra" => spectra(&mut rng)?,
            "blayer" => blayer(cfg)?,
            "simulate" => simulate(cfg, &mut rng)?,
            other => return Err(CliError::Schema(vec![format!("unknown module `{other}`")])),
        };
        for x in &mut c {
            x.name = format!("{m}: {}", x.name);
        }
        checks.extend(c);
    }
    dir.write_json("suite.json", &checks)?;
    Ok(checks)
}
