use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use super::linalg::cmat;
use super::neumann::remainder_norm;
use super::{eig_real, is_isolated, left_eigenvector, residual, Disc, SpectrumResult, Target};
use crate::baseflow::{build_mirrored, default_box, RadialProfile};
use crate::error::{Error, Result};
use crate::fields::{DomainKind, Grid2D, WeightKind};
use crate::greens::{PoissonSolver, SolverKind};
use crate::operators::{assemble_lambda_e, assemble_lambda_er, assemble_m_alpha, DomainRestriction, LambdaER, OperatorMatrix};
use crate::{Base, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    LinearFit { slope, intercept: my - slope * mx, r2 }
}

/// Slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).slope
}

fn pick(spectrum: &SpectrumResult, target: Target) -> Result<C64> {
    let values = &spectrum.eigenvalues;
    let best = match target {
        Target::MaxReal => values.iter().copied().max_by(|a, b| {
            a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap())
        }),
        Target::Nearest(z) => values.iter().copied().min_by(|a, b| (a - z).norm().partial_cmp(&(b - z).norm()).unwrap()),
    };
    best.ok_or_else(|| Error::NoIsolatedEigenvalue("empty spectrum".into()))
}

fn nearest(values: &[C64], z: C64) -> C64 {
    values.iter().copied().min_by(|a, b| (a - z).norm().partial_cmp(&(b - z).norm()).unwrap()).unwrap()
}

/// Eigenvalue of `a` nearest `z`, with its residual from inverse iteration.
fn eigen_near(a: &Mat<f64>, z: C64) -> Result<(C64, f64, SpectrumResult)> {
    let values = a.eigenvalues().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    let lambda = nearest(&values, z);
    let ac = cmat(a);
    let v = super::inverse_iteration(&ac, lambda, 3);
    let res = residual(&ac, lambda, &v);
    Ok((lambda, res, SpectrumResult { pairs: Vec::new(), filter: None, eigenvalues: values }))
}

#[derive(Clone, Debug)]
pub struct RSweepConfig {
    pub r0: f64,
    pub h: f64,
    pub rs: Vec<f64>,
    /// Mask discs have radius `r0 + mask_pad`.
    pub mask_pad: f64,
    pub target: Target,
    /// Contour radius as a fraction of `|lambda_inf|`.
    pub eps_frac: f64,
    pub contour_nodes: usize,
    pub residual_tol: f64,
}

impl Default for RSweepConfig {
    fn default() -> Self {
        Self {
            r0: 2.0,
            h: 0.125,
            rs: vec![4.0, 6.0, 8.0, 12.0],
            mask_pad: 0.25,
            target: Target::MaxReal,
            eps_frac: 0.05,
            contour_nodes: 8,
            residual_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RRecord {
    pub r: f64,
    pub gap: f64,
    pub lambda_inf: C64,
    pub lambda_r: C64,
    pub residual: f64,
    pub dist: f64,
    /// `max ||U_R(lambda)||` over the contour nodes.
    pub u_r_norm: f64,
    pub remainder_norm: f64,
    pub isolated: bool,
    /// Log-log slope of `dist` against `gap` over the records so far.
    pub fitted_slope: f64,
    pub dof: usize,
}

#[derive(Clone, Debug)]
pub struct RSweep {
    pub records: Vec<RRecord>,
    pub slope_u_r: f64,
    pub slope_lambda: f64,
    pub slope_remainder: f64,
}

/// Mirrored operator at one separation.
pub fn mirrored_problem(profile: &RadialProfile<f64>, r0: f64, r: f64, h: f64, mask_pad: f64) -> Result<LambdaER> {
    let grid = default_box(r, r0, h)?;
    let flow = build_mirrored(profile, r0, r, grid)?;
    let rad = r0 + mask_pad;
    let restriction = Arc::new(DomainRestriction::discs(grid, &[((0.0, r), rad), ((0.0, -r), rad)])?);
    let solver = PoissonSolver::new(grid, SolverKind::SineTransform)?;
    assemble_lambda_er(&flow, &restriction, &solver)
}

/// Record for one `R`: `lambda_inf` from the upper block, `lambda_R` from the odd subspace.
pub fn r_record(er: &LambdaER, r0: f64, cfg: &RSweepConfig) -> Result<RRecord> {
    let plus = er.plus_block();
    let ps = eig_real(&plus, Some(Disc::new(C64::new(0.0, 0.0), 0.0)))?;
    let lambda_inf = pick(&ps, cfg.target)?;
    let eps = cfg.eps_frac * lambda_inf.norm();
    let isolated = is_isolated(&ps.eigenvalues, lambda_inf, eps, cfg.residual_tol);
    let odd = er.odd_reduction()?;
    let (lambda_r, res, _) = eigen_near(&odd, lambda_inf)?;
    let mut u_r_norm: f64 = 0.0;
    for k in 0..cfg.contour_nodes {
        let z = lambda_inf + C64::from_polar(eps, 2.0 * PI * k as f64 / cfg.contour_nodes as f64);
        u_r_norm = u_r_norm.max(remainder_norm(er, z)?);
    }
    let rem = er.remainder.to_dense();
    let remainder_norm = rem.singular_values().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?[0];
    Ok(RRecord {
        r: er.r,
        gap: er.r - r0,
        lambda_inf,
        lambda_r,
        residual: res,
        dist: (lambda_r - lambda_inf).norm(),
        u_r_norm,
        remainder_norm,
        isolated,
        fitted_slope: f64::NAN,
        dof: er.full.dof(),
    })
}

pub fn sweep_r(profile: &RadialProfile<f64>, cfg: &RSweepConfig) -> Result<RSweep> {
    let mut rs = cfg.rs.clone();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut records: Vec<RRecord> = Vec::new();
    for &r in &rs {
        let er = mirrored_problem(profile, cfg.r0, r, cfg.h, cfg.mask_pad)?;
        let mut rec = r_record(&er, cfg.r0, cfg)?;
        if !rec.isolated {
            return Err(Error::NoIsolatedEigenvalue(format!("lambda_inf = {} at R = {r} is not isolated", rec.lambda_inf)));
        }
        records.push(rec.clone());
        if records.len() >= 2 {
            let g: Vec<f64> = records.iter().map(|x| x.gap).collect();
            let d: Vec<f64> = records.iter().map(|x| x.dist).collect();
            rec.fitted_slope = loglog_slope(&g, &d);
            records.last_mut().unwrap().fitted_slope = rec.fitted_slope;
        }
    }
    let g: Vec<f64> = records.iter().map(|x| x.gap).collect();
    let col = |f: fn(&RRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    Ok(RSweep {
        slope_u_r: loglog_slope(&g, &col(|x| x.u_r_norm)),
        slope_lambda: loglog_slope(&g, &col(|x| x.dist)),
        slope_remainder: loglog_slope(&g, &col(|x| x.remainder_norm)),
        records,
    })
}

/// Half-plane problem around the upper lobe of a mirrored flow.
pub struct HalfPlaneProblem {
    pub base: Base,
    pub restriction: Arc<DomainRestriction>,
    pub solver: PoissonSolver<f64>,
    pub lambda_e: OperatorMatrix,
    pub r: f64,
}

/// Vortex at `(0, r)` on the half box of half-width `l` with `n` nodes across,
/// restricted to the disc of radius `mask_radius` around the vortex.
pub fn half_plane_problem(
    profile: &RadialProfile<f64>,
    r0: f64,
    r: f64,
    l: f64,
    n: usize,
    mask_radius: f64,
) -> Result<HalfPlaneProblem> {
    let whole = Grid2D::new(DomainKind::Whole, l, n)?;
    let flow = build_mirrored(profile, r0, r, whole)?;
    let base = flow.to_half_plane()?;
    let grid = *base.grid();
    let restriction = Arc::new(DomainRestriction::discs(grid, &[((0.0, r), mask_radius)])?);
    let solver = PoissonSolver::new(grid, SolverKind::SineTransform)?;
    let lambda_e = assemble_lambda_e(&base, &restriction, &solver)?;
    Ok(HalfPlaneProblem { base, restriction, solver, lambda_e, r })
}

#[derive(Clone, Debug)]
pub struct AlphaSweepConfig {
    pub alphas: Vec<f64>,
    /// Disc radius; defaults to `max(0.05 |lambda_E|, 3 residual)`.
    pub eps: Option<f64>,
    pub target: Target,
    pub weight: WeightKind<f64>,
    pub residual_tol: f64,
}

impl Default for AlphaSweepConfig {
    fn default() -> Self {
        Self {
            alphas: vec![1e2, 1e3, 1e4, 1e5],
            eps: None,
            target: Target::MaxReal,
            weight: WeightKind::gaussian(),
            residual_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlphaRecord {
    pub alpha: f64,
    pub lambda: C64,
    pub residual: f64,
    pub dist: f64,
    pub in_disc: bool,
    /// First-order prediction `lambda_E + <y, H x> / (alpha <y, x>)`.
    pub predicted: C64,
}

#[derive(Clone, Debug)]
pub struct AlphaSweep {
    pub lambda_e: C64,
    pub residual_e: f64,
    pub eps: f64,
    pub isolated: bool,
    pub records: Vec<AlphaRecord>,
    /// `|lambda_alpha - lambda_E|` decreases over the three largest `alpha`.
    pub monotone_tail: bool,
    /// `|shift - predicted shift| / |predicted shift|` at the largest `alpha`.
    pub rayleigh_mismatch: f64,
}

pub fn sweep_alpha(lambda_e_op: &OperatorMatrix, cfg: &AlphaSweepConfig) -> Result<AlphaSweep> {
    let a = lambda_e_op.to_dense();
    let values = a.eigenvalues().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    let spectrum = SpectrumResult { pairs: Vec::new(), filter: None, eigenvalues: values };
    let lambda_e = pick(&spectrum, cfg.target)?;
    let ac = cmat(&a);
    let x = super::inverse_iteration(&ac, lambda_e, 3);
    let residual_e = residual(&ac, lambda_e, &x);
    let eps = cfg.eps.unwrap_or((0.05 * lambda_e.norm()).max(3.0 * residual_e));
    let isolated = is_isolated(&spectrum.eigenvalues, lambda_e, eps, cfg.residual_tol);
    if !isolated {
        return Err(Error::NoIsolatedEigenvalue(format!("lambda_E = {lambda_e} is not isolated at eps = {eps:e}")));
    }
    let y = left_eigenvector(&ac, lambda_e);
    let mut alphas = cfg.alphas.clone();
    alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut records = Vec::new();
    let mut shift_unit = None;
    for &alpha in &alphas {
        let (m, h) = assemble_m_alpha(lambda_e_op, alpha, cfg.weight)?;
        let shift = *shift_unit.get_or_insert_with(|| {
            let hx = h.apply(&x);
            let num: C64 = y.iter().zip(&hx).map(|(a, b)| a * b).sum();
            let den: C64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
            num / den
        });
        let (lambda, res, _) = eigen_near(&m.to_dense(), lambda_e)?;
        let dist = (lambda - lambda_e).norm();
        records.push(AlphaRecord { alpha, lambda, residual: res, dist, in_disc: dist < eps, predicted: lambda_e + shift / alpha });
    }
    let k = records.len();
    let monotone_tail = k >= 3 && records[k - 3].dist > records[k - 2].dist && records[k - 2].dist > records[k - 1].dist;
    let last = records.last().ok_or_else(|| Error::InvalidArgument("empty alpha list".into()))?;
    let pred = last.predicted - lambda_e;
    let rayleigh_mismatch = ((last.lambda - lambda_e) - pred).norm() / pred.norm();
    Ok(AlphaSweep { lambda_e, residual_e, eps, isolated, records, monotone_tail, rayleigh_mismatch })
}
