//! Eigenvalues, resolvents, contour projections and the two convergence sweeps.

mod linalg;
pub mod neumann;
pub mod projection;
pub mod resolvent;
pub mod sweep;

pub use linalg::{cmat, col, inverse_iteration, matvec, vnorm};
pub use neumann::{neumann_resolvent_er, remainder_norm, NeumannResult};
pub use projection::{spectral_projection, ProjectionResult};
pub use resolvent::{resolvent_apply, Resolvent};
pub use sweep::{
    linear_fit, loglog_slope, sweep_alpha, sweep_r, AlphaRecord, AlphaSweep, AlphaSweepConfig, LinearFit, RRecord, RSweep,
    RSweepConfig,
};

use faer::Mat;

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;
use crate::C64;

/// Closed disc in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Disc {
    pub center: C64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn contains(&self, z: C64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda: C64,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<C64>,
    /// `||A v - lambda v|| / ||v||`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub pairs: Vec<EigenPair>,
    pub filter: Option<Disc>,
    /// Every computed eigenvalue, filtered or not.
    pub eigenvalues: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigOptions {
    pub dense_limit: usize,
    pub residual_tol: f64,
    /// Use shift-invert Arnoldi around the filter center above the dense limit.
    pub shift_invert: bool,
    /// Number of eigenvalues wanted from the iterative path.
    pub k: usize,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { dense_limit: 20_000, residual_tol: 1e-8, shift_invert: false, k: 6 }
    }
}

/// How to pick one eigenvalue from a spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Target {
    MaxReal,
    Nearest(C64),
}

impl SpectrumResult {
    /// All pairs satisfy the residual bound.
    pub fn verified(&self, tol: f64) -> bool {
        self.pairs.iter().all(|p| p.residual <= tol)
    }

    /// Pick one pair inside `disc`: minimal residual, then maximal real part.
    pub fn select_in(&self, disc: &Disc) -> Option<&EigenPair> {
        self.pairs.iter().filter(|p| disc.contains(p.lambda)).min_by(|a, b| {
            a.residual
                .partial_cmp(&b.residual)
                .unwrap()
                .then(b.lambda.re.partial_cmp(&a.lambda.re).unwrap())
        })
    }

    pub fn select(&self, target: Target) -> Option<&EigenPair> {
        match target {
            Target::MaxReal => self.pairs.iter().max_by(|a, b| {
                a.lambda.re.partial_cmp(&b.lambda.re).unwrap().then(a.lambda.im.partial_cmp(&b.lambda.im).unwrap())
            }),
            Target::Nearest(z) => self
                .pairs
                .iter()
                .min_by(|a, b| (a.lambda - z).norm().partial_cmp(&(b.lambda - z).norm()).unwrap()),
        }
    }

    /// Distance from `lambda` to the nearest other computed eigenvalue.
    pub fn gap(&self, lambda: C64) -> f64 {
        gap_in(&self.eigenvalues, lambda)
    }
}

pub(crate) fn gap_in(eigs: &[C64], lambda: C64) -> f64 {
    let mut skipped = false;
    let mut best = f64::INFINITY;
    for &z in eigs {
        let d = (z - lambda).norm();
        if !skipped && d < 1e-12 * (1.0 + lambda.norm()) {
            skipped = true;
            continue;
        }
        best = best.min(d);
    }
    best
}

/// Whether `lambda` is isolated: nearest other eigenvalue at least `4 tol` and `2 eps` away.
pub fn is_isolated(eigs: &[C64], lambda: C64, eps: f64, tol: f64) -> bool {
    let g = gap_in(eigs, lambda);
    g >= 4.0 * tol && g >= 2.0 * eps
}

pub fn eig(op: &OperatorMatrix, filter: Option<Disc>, opts: &EigOptions) -> Result<SpectrumResult> {
    let n = op.dof();
    if n > opts.dense_limit {
        if !opts.shift_invert {
            return Err(Error::DenseLimitExceeded { dof: n, limit: opts.dense_limit });
        }
        let disc = filter.ok_or_else(|| Error::InvalidArgument("shift-invert needs a filter disc".into()))?;
        return linalg::shift_invert(&op.to_complex(), disc, opts);
    }
    if op.is_real() {
        eig_real(&op.to_dense(), filter)
    } else {
        eig_complex(&op.to_complex(), filter)
    }
}

/// Dense eigenpairs of a real matrix.
pub fn eig_real(a: &Mat<f64>, filter: Option<Disc>) -> Result<SpectrumResult> {
    let ac = cmat(a);
    if filter.is_none() {
        let e = a.eigen().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
        return Ok(from_eigen(&ac, e.S().column_vector().iter().copied().collect(), e.U()));
    }
    let values = a.eigenvalues().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    Ok(filtered(&ac, values, filter))
}

/// Dense eigenpairs of a complex matrix.
pub fn eig_complex(a: &Mat<C64>, filter: Option<Disc>) -> Result<SpectrumResult> {
    if filter.is_none() {
        let e = a.eigen().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
        return Ok(from_eigen(a, e.S().column_vector().iter().copied().collect(), e.U()));
    }
    let values = a.eigenvalues().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    Ok(filtered(a, values, filter))
}

fn from_eigen(a: &Mat<C64>, values: Vec<C64>, u: faer::MatRef<'_, C64>) -> SpectrumResult {
    let pairs = values
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let mut v: Vec<C64> = (0..u.nrows()).map(|i| u[(i, k)]).collect();
            let s = vnorm(&v);
            v.iter_mut().for_each(|z| *z /= s);
            let residual = residual(a, lambda, &v);
            EigenPair { lambda, vector: v, residual }
        })
        .collect();
    SpectrumResult { pairs, filter: None, eigenvalues: values }
}

fn filtered(a: &Mat<C64>, values: Vec<C64>, filter: Option<Disc>) -> SpectrumResult {
    let disc = filter.expect("filter");
    let pairs = values
        .iter()
        .filter(|&&z| disc.contains(z))
        .map(|&lambda| {
            let v = inverse_iteration(a, lambda, 3);
            let residual = residual(a, lambda, &v);
            EigenPair { lambda, vector: v, residual }
        })
        .collect();
    SpectrumResult { pairs, filter, eigenvalues: values }
}

/// `||A v - lambda v|| / ||v||`.
pub fn residual(a: &Mat<C64>, lambda: C64, v: &[C64]) -> f64 {
    let av = matvec(a, v);
    let r: Vec<C64> = av.iter().zip(v).map(|(x, y)| x - lambda * y).collect();
    vnorm(&r) / vnorm(v)
}

/// Left eigenvector `y` with `y^T A = lambda y^T`, unit norm.
pub fn left_eigenvector(a: &Mat<C64>, lambda: C64) -> Vec<C64> {
    let at = a.transpose().to_owned();
    inverse_iteration(&at, lambda, 3)
}
