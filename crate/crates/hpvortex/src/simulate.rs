//! Nonlinear vorticity dynamics in self-similar variables around `alpha Omega_E`.
//!
//! The state is the deviation `delta = omega - alpha Omega_E` on the restriction
//! nodes, with `omega` vanishing on the wall (perfect slip). Its evolution is
//! `d delta / d tau = alpha M_alpha delta - div(K[delta] delta)`.

use std::f64::consts::PI;

use faer::Mat;

use crate::error::{Error, Result};
use crate::fields::WeightKind;
use crate::greens::velocity_from_streamfunction;
use crate::operators::assemble_m_alpha;
use crate::spectra::sweep::{linear_fit, HalfPlaneProblem, LinearFit};
use crate::spectra::{cmat, inverse_iteration, left_eigenvector, residual};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub alpha: f64,
    /// Fixed step; `None` takes three quarters of the stability bound at the initial state.
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Perturbation amplitude relative to `||alpha Omega_E||`.
    pub eps_rel: f64,
    /// Steps between log entries.
    pub log_every: usize,
    /// Stop once the pair distance exceeds this fraction of `||alpha Omega_E||`.
    pub stop_fraction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { alpha: 100.0, dt: None, horizon: 3.0, eps_rel: 1e-6, log_every: 4, stop_fraction: 0.2 }
    }
}

/// Eigenpair of `M_alpha` with its left eigenvector.
#[derive(Clone, Debug)]
pub struct Mode {
    pub lambda: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    pub residual: f64,
}

/// Right-most eigenvalue of `M_alpha`, ties broken toward positive imaginary part.
pub fn leading_mode(m: &Mat<f64>) -> Result<Mode> {
    let values = m.eigenvalues().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    let lambda = values
        .iter()
        .copied()
        .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()))
        .ok_or_else(|| Error::NoIsolatedEigenvalue("empty spectrum".into()))?;
    let mc = cmat(m);
    let right = inverse_iteration(&mc, lambda, 3);
    let left = left_eigenvector(&mc, lambda);
    let res = residual(&mc, lambda, &right);
    Ok(Mode { lambda, right, left, residual: res })
}

pub struct Simulator<'a> {
    pub problem: &'a HalfPlaneProblem,
    pub alpha: f64,
    /// `alpha M_alpha` on the restriction.
    pub linear: Mat<f64>,
    pub m_alpha: Mat<f64>,
    base_speed: f64,
    base_norm: f64,
}

/// Output of one right-hand side evaluation.
pub struct Rhs {
    pub value: Vec<f64>,
    pub max_speed: f64,
    pub wall_v2: f64,
}

impl<'a> Simulator<'a> {
    pub fn new(problem: &'a HalfPlaneProblem, alpha: f64) -> Result<Self> {
        let (m, _) = assemble_m_alpha(&problem.lambda_e, alpha, WeightKind::gaussian())?;
        let m_alpha = m.to_dense();
        let linear = Mat::from_fn(m_alpha.nrows(), m_alpha.ncols(), |i, j| alpha * m_alpha[(i, j)]);
        let base = &problem.base;
        let base_speed = alpha * base.u.max_speed();
        let base_norm = alpha * base.omega.l2();
        Ok(Self { problem, alpha, linear, m_alpha, base_speed, base_norm })
    }

    pub fn dof(&self) -> usize {
        self.problem.restriction.dof()
    }

    /// `||alpha Omega_E||` in unweighted discrete L2.
    pub fn base_norm(&self) -> f64 {
        self.base_norm
    }

    pub fn h(&self) -> f64 {
        self.problem.restriction.grid().h()
    }

    /// Unweighted discrete L2 norm of a restriction vector.
    pub fn norm(&self, v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt() * self.h()
    }

    pub fn weighted_norm(&self, v: &[f64]) -> f64 {
        let r = &self.problem.restriction;
        let w = WeightKind::<f64>::gaussian();
        let s: f64 = v
            .iter()
            .zip(r.nodes())
            .map(|(x, &k)| {
                let (a, b) = r.grid().xy(k);
                (x * w.weight(a, b)).powi(2)
            })
            .sum();
        s.sqrt() * self.h()
    }

    /// `-div_h(K[delta] delta)` on the restriction, with the speed of `K[delta]` and its wall normal component.
    pub fn nonlinear(&self, delta: &[f64]) -> Rhs {
        let r = &self.problem.restriction;
        let g = *r.grid();
        let field = r.scatter(delta);
        let psi = self.problem.solver.solve_values(&field);
        let v = velocity_from_streamfunction(&psi);
        let inv2h = 1.0 / (2.0 * g.h());
        let value = r
            .nodes()
            .iter()
            .map(|&k| {
                let (i, j) = g.ij(k);
                let f1 = |i: usize| v.v1.at(i, j) * field.at(i, j);
                let f2 = |j: usize| v.v2.at(i, j) * field.at(i, j);
                -((f1(i + 1) - f1(i - 1)) + (f2(j + 1) - f2(j - 1))) * inv2h
            })
            .collect();
        let j0 = g.wall_row();
        let wall_v2 = (0..g.nx()).fold(0.0_f64, |m, i| m.max(v.v2.at(i, j0).abs()));
        Rhs { value, max_speed: v.max_speed(), wall_v2 }
    }

    pub fn rhs(&self, delta: &[f64]) -> Rhs {
        let mut out = self.nonlinear(delta);
        let lin = &self.linear * Mat::from_fn(delta.len(), 1, |i, _| delta[i]);
        for (i, v) in out.value.iter_mut().enumerate() {
            *v += lin[(i, 0)];
        }
        out
    }

    /// Right-hand side for the full vorticity `omega` on the restriction.
    pub fn rhs_omega(&self, omega: &[f64]) -> Vec<f64> {
        let base = self.problem.restriction.gather(&self.problem.base.omega);
        let delta: Vec<f64> = omega.iter().zip(&base).map(|(w, b)| w - self.alpha * b).collect();
        self.rhs(&delta).value
    }

    /// `0.5 min(h / |v|, h^2 / 4, 2 h / L)` for the advecting speed `extra` on top of the base flow.
    pub fn stability_limit(&self, extra: f64) -> f64 {
        let h = self.h();
        let l = self.problem.restriction.grid().half_width();
        let speed = self.base_speed + extra;
        0.5 * (h / speed).min(h * h / 4.0).min(2.0 * h / l)
    }

    /// One classical Runge-Kutta step.
    pub fn step(&self, delta: &[f64], dt: f64) -> Result<(Vec<f64>, Rhs)> {
        let k1 = self.rhs(delta);
        let limit = self.stability_limit(k1.max_speed);
        if dt > limit {
            return Err(Error::CflViolated { dt, limit });
        }
        let axpy = |a: f64, k: &[f64]| -> Vec<f64> { delta.iter().zip(k).map(|(x, y)| x + a * y).collect() };
        let k2 = self.rhs(&axpy(0.5 * dt, &k1.value));
        let k3 = self.rhs(&axpy(0.5 * dt, &k2.value));
        let k4 = self.rhs(&axpy(dt, &k3.value));
        let next = (0..delta.len())
            .map(|i| delta[i] + dt / 6.0 * (k1.value[i] + 2.0 * k2.value[i] + 2.0 * k3.value[i] + k4.value[i]))
            .collect();
        Ok((next, k1))
    }

    /// Integrates from `delta0`, logging every `cfg.log_every` steps.
    pub fn run(&self, delta0: Vec<f64>, dt: f64, cfg: &SimConfig, probe: Option<&[C64]>) -> Result<TrajectoryLog> {
        let steps = (cfg.horizon / dt).ceil() as usize;
        let mut log = TrajectoryLog::default();
        let mut delta = delta0;
        let blow = 1e6 * self.base_norm.max(self.norm(&delta));
        for s in 0..=steps {
            let tau = s as f64 * dt;
            let record = s % cfg.log_every.max(1) == 0 || s == steps;
            let done = s == steps;
            if record || done {
                let wall = self.nonlinear(&delta).wall_v2;
                log.push(tau, &delta, self, probe, wall);
                if log.norm.last().copied().unwrap_or(0.0) > cfg.stop_fraction * self.base_norm {
                    break;
                }
            }
            if done {
                break;
            }
            delta = self.step(&delta, dt)?.0;
            let n = self.norm(&delta);
            if !n.is_finite() || n > blow {
                return Err(Error::BlowUp(tau + dt));
            }
        }
        log.last = delta;
        Ok(log)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryLog {
    pub tau: Vec<f64>,
    /// `||omega - alpha Omega_E||`, unweighted and weighted.
    pub norm: Vec<f64>,
    pub norm_weighted: Vec<f64>,
    /// Projection onto a probe vector, when one is given.
    pub probe: Vec<C64>,
    pub wall_v2: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub last: Vec<f64>,
}

impl TrajectoryLog {
    fn push(&mut self, tau: f64, delta: &[f64], sim: &Simulator, probe: Option<&[C64]>, wall: f64) {
        self.tau.push(tau);
        self.norm.push(sim.norm(delta));
        self.norm_weighted.push(sim.weighted_norm(delta));
        if let Some(y) = probe {
            self.probe.push(y.iter().zip(delta).map(|(a, b)| a * b).sum());
        }
        self.wall_v2.push(wall);
        self.snapshots.push(delta.to_vec());
    }
}

/// Both runs of a pair and the fits to their separation.
#[derive(Clone, Debug)]
pub struct PairRun {
    pub alpha: f64,
    pub dt: f64,
    pub eps_p: f64,
    pub base_norm: f64,
    pub mode: Mode,
    pub base: TrajectoryLog,
    pub perturbed: TrajectoryLog,
    pub pair_dist: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub rate: f64,
    pub rate_fit: LinearFit,
    pub frequency: f64,
    pub frequency_fit: LinearFit,
    pub window: (f64, f64),
    pub points: usize,
    /// `alpha Re lambda_alpha` and `alpha Im lambda_alpha`.
    pub target_rate: f64,
    pub target_frequency: f64,
}

impl PairRun {
    /// Largest deviation of the base run from `alpha Omega_E`.
    pub fn equilibrium_drift(&self) -> f64 {
        self.base.norm.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn max_wall_v2(&self) -> f64 {
        self.base.wall_v2.iter().chain(&self.perturbed.wall_v2).fold(0.0, |m, &v| m.max(v))
    }

    /// First time `pair_dist` reaches `level`, interpolated in `log pair_dist`.
    pub fn crossing_time(&self, level: f64) -> Option<f64> {
        let d = &self.pair_dist;
        let t = &self.perturbed.tau;
        (1..d.len()).find(|&k| d[k] >= level && d[k - 1] < level).map(|k| {
            let (a, b) = (d[k - 1].ln(), d[k].ln());
            t[k - 1] + (t[k] - t[k - 1]) * (level.ln() - a) / (b - a)
        })
    }

    /// Log-linear fit of `pair_dist` and linear fit of the unwrapped probe phase on
    /// the window `[10 eps_p, 0.1 ||alpha Omega_E||]`.
    pub fn fit(&self) -> Result<GrowthFit> {
        let lo = 10.0 * self.eps_p;
        let hi = 0.1 * self.base_norm;
        let idx: Vec<usize> = (0..self.pair_dist.len()).filter(|&k| self.pair_dist[k] >= lo && self.pair_dist[k] <= hi).collect();
        if idx.len() < 8 {
            return Err(Error::WindowTooShort(format!("{} logged points in [{lo:e}, {hi:e}]", idx.len())));
        }
        let t: Vec<f64> = idx.iter().map(|&k| self.perturbed.tau[k]).collect();
        let ln: Vec<f64> = idx.iter().map(|&k| self.pair_dist[k].ln()).collect();
        if ln[ln.len() - 1] - ln[0] < 10f64.ln() {
            return Err(Error::WindowTooShort("less than tenfold growth inside the window".into()));
        }
        let rate_fit = linear_fit(&t, &ln);
        let mut phase = Vec::with_capacity(idx.len());
        let mut prev: Option<f64> = None;
        for &k in &idx {
            let mut p = self.perturbed.probe.get(k).map(|z| z.arg()).unwrap_or(0.0);
            if let Some(q) = prev {
                p += 2.0 * PI * ((q - p) / (2.0 * PI)).round();
            }
            phase.push(p);
            prev = Some(p);
        }
        let frequency_fit = linear_fit(&t, &phase);
        Ok(GrowthFit {
            rate: rate_fit.slope,
            rate_fit,
            frequency: frequency_fit.slope,
            frequency_fit,
            window: (t[0], t[t.len() - 1]),
            points: idx.len(),
            target_rate: self.alpha * self.mode.lambda.re,
            target_frequency: self.alpha * self.mode.lambda.im,
        })
    }
}

/// Runs `alpha Omega_E` and `alpha Omega_E + eps_p Re(phi_alpha)` side by side.
pub fn run_pair(problem: &HalfPlaneProblem, cfg: &SimConfig) -> Result<PairRun> {
    let sim = Simulator::new(problem, cfg.alpha)?;
    let mode = leading_mode(&sim.m_alpha)?;
    if mode.residual > 1e-8 {
        return Err(Error::IterativeNoConvergence(format!("eigenpair residual {:e}", mode.residual)));
    }
    if cfg.eps_rel > 1e-4 {
        return Err(Error::InvalidArgument(format!("perturbation amplitude {} above 1e-4", cfg.eps_rel)));
    }
    run_pair_with(&sim, mode, cfg)
}

/// As [`run_pair`] with a precomputed simulator and mode.
pub fn run_pair_with(sim: &Simulator, mode: Mode, cfg: &SimConfig) -> Result<PairRun> {
    let eps_p = cfg.eps_rel * sim.base_norm();
    let re: Vec<f64> = mode.right.iter().map(|z| z.re).collect();
    let scale = eps_p / sim.norm(&re);
    let delta0: Vec<f64> = re.iter().map(|v| v * scale).collect();
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => 0.75 * sim.stability_limit(sim.rhs(&delta0).max_speed),
    };
    let zero = vec![0.0; sim.dof()];
    let (base, perturbed) = rayon::join(
        || sim.run(zero, dt, cfg, None),
        || sim.run(delta0, dt, cfg, Some(&mode.left)),
    );
    let (base, perturbed) = (base?, perturbed?);
    let pair_dist = perturbed
        .snapshots
        .iter()
        .zip(&base.snapshots)
        .map(|(a, b)| sim.norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>()))
        .collect();
    Ok(PairRun { alpha: sim.alpha, dt, eps_p, base_norm: sim.base_norm(), mode, base, perturbed, pair_dist })
}

/// Finite-difference Jacobian of the right-hand side at the equilibrium against `alpha M_alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianCheck {
    pub step: f64,
    /// Relative error per direction.
    pub errors: Vec<f64>,
}

impl JacobianCheck {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().fold(0.0, |m, &v| m.max(v))
    }
}

pub fn jacobian_check(sim: &Simulator, directions: &[Vec<f64>], step: f64) -> JacobianCheck {
    let r0 = sim.rhs(&vec![0.0; sim.dof()]).value;
    let errors = directions
        .iter()
        .map(|d| {
            let n = sim.norm(d);
            let x: Vec<f64> = d.iter().map(|v| v * step / n).collect();
            let r = sim.rhs(&x).value;
            let lin = &sim.linear * Mat::from_fn(d.len(), 1, |i, _| d[i] / n);
            let diff: Vec<f64> = (0..d.len()).map(|i| (r[i] - r0[i]) / step - lin[(i, 0)]).collect();
            let scale: Vec<f64> = (0..d.len()).map(|i| lin[(i, 0)]).collect();
            sim.norm(&diff) / sim.norm(&scale)
        })
        .collect();
    JacobianCheck { step, errors }
}
