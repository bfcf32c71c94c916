use std::f64::consts::PI;

use faer::Mat;
use rayon::prelude::*;

use super::resolvent::Resolvent;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug)]
pub struct ProjectionResult {
    /// Quadrature nodes used for the returned projector.
    pub nodes: usize,
    pub rank: usize,
    pub trace: C64,
    /// `||P^2 - P||_F`.
    pub idempotency: f64,
    /// `||P_N - P_{N/2}||_F` at the final doubling.
    pub change: f64,
    pub converged: bool,
    /// Rank of the projector with half the nodes.
    pub rank_half: usize,
    /// `||(lambda_k - A) X_k - I||_F / sqrt(n)` per node.
    pub node_residuals: Vec<f64>,
    pub projector: Mat<C64>,
}

pub const RANK_THRESHOLD: f64 = 1e-6;
pub const CHANGE_TOL: f64 = 1e-8;
const MAX_NODES: usize = 1024;

fn node(center: C64, radius: f64, k: usize, n: usize) -> C64 {
    center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64)
}

/// Trapezoid sum `(1/N) sum (lambda_k - c)(lambda_k - A)^{-1}` over the given node indices.
fn partial_sum(a: &Mat<C64>, center: C64, radius: f64, n: usize, ks: Vec<usize>) -> (Mat<C64>, Vec<f64>) {
    let dim = a.nrows();
    let eye = Mat::<C64>::identity(dim, dim);
    let parts: Vec<(Mat<C64>, f64)> = ks
        .into_par_iter()
        .map(|k| {
            let z = node(center, radius, k, n);
            let r = Resolvent::new(a, z);
            let x = r.inverse();
            let mut lhs = -(a * &x);
            lhs += &x * faer::Scale(z);
            let res = (lhs - &eye).norm_l2() / (dim as f64).sqrt();
            (x * faer::Scale(z - center), res)
        })
        .collect();
    let mut acc = Mat::<C64>::zeros(dim, dim);
    let mut res = Vec::new();
    for (m, r) in parts {
        acc += m;
        res.push(r);
    }
    (acc, res)
}

pub fn numerical_rank(p: &Mat<C64>) -> Result<usize> {
    let s = p.singular_values().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    let top = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&v| v > RANK_THRESHOLD * top.max(1.0)).count())
}

/// Riesz projection onto the eigenvalues inside the circle `|z - center| = radius`.
pub fn spectral_projection(a: &Mat<C64>, center: C64, radius: f64, n: usize) -> Result<ProjectionResult> {
    if !(radius > 0.0) || n < 4 {
        return Err(Error::InvalidArgument("projection needs a positive radius and at least 4 nodes".into()));
    }
    let ev = a.eigenvalues().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    let scale = 1.0 + center.norm() + radius;
    let distance = ev.iter().map(|z| ((z - center).norm() - radius).abs()).fold(f64::INFINITY, f64::min);
    if distance < 1e-8 * scale {
        return Err(Error::CircleHitsSpectrum { distance });
    }
    let mut nodes = n;
    let (mut sum, mut node_residuals) = partial_sum(a, center, radius, nodes, (0..nodes).collect());
    let mut p = &sum * faer::Scale(C64::new(1.0 / nodes as f64, 0.0));
    loop {
        // the odd nodes of the doubled rule
        let (extra, res) = partial_sum(a, center, radius, 2 * nodes, (0..nodes).map(|k| 2 * k + 1).collect());
        sum += extra;
        node_residuals.extend(res);
        let p2 = &sum * faer::Scale(C64::new(1.0 / (2 * nodes) as f64, 0.0));
        let change = (&p2 - &p).norm_l2();
        let rank_half = numerical_rank(&p)?;
        p = p2;
        nodes *= 2;
        if change < CHANGE_TOL || nodes >= MAX_NODES {
            let rank = numerical_rank(&p)?;
            let idempotency = (&p * &p - &p).norm_l2();
            let trace = (0..p.nrows()).map(|i| p[(i, i)]).sum();
            return Ok(ProjectionResult {
                nodes,
                rank,
                trace,
                idempotency,
                change,
                converged: change < CHANGE_TOL && rank == rank_half,
                rank_half,
                node_residuals,
                projector: p,
            });
        }
    }
}
