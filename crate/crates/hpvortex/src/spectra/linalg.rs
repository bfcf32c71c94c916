use faer::linalg::solvers::Solve;
use faer::Mat;

use super::{residual, Disc, EigOptions, EigenPair, SpectrumResult};
use crate::error::{Error, Result};
use crate::C64;

pub fn cmat(a: &Mat<f64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

pub fn col(x: &[C64]) -> Mat<C64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

pub fn matvec(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    let y = a * col(x);
    (0..y.nrows()).map(|i| y[(i, 0)]).collect()
}

pub fn vnorm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn start_vector(n: usize) -> Vec<C64> {
    (0..n).map(|i| C64::new(1.0 + ((i * 7919) % 13) as f64 / 13.0, ((i * 104729) % 17) as f64 / 17.0)).collect()
}

/// Eigenvector for a known eigenvalue by shifted inverse iteration.
pub fn inverse_iteration(a: &Mat<C64>, lambda: C64, iters: usize) -> Vec<C64> {
    let n = a.nrows();
    let shift = lambda + C64::new(1e-10, 1e-10) * (1.0 + lambda.norm());
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    let lu = m.partial_piv_lu();
    let mut v = start_vector(n);
    for _ in 0..iters.max(1) {
        let y = lu.solve(col(&v));
        v = (0..n).map(|i| y[(i, 0)]).collect();
        let s = vnorm(&v);
        if !(s.is_finite() && s > 0.0) {
            break;
        }
        v.iter_mut().for_each(|z| *z /= s);
    }
    v
}

/// Arnoldi on `(A - sigma)^{-1}` for the `k` eigenvalues nearest the disc center.
pub fn shift_invert(a: &Mat<C64>, disc: Disc, opts: &EigOptions) -> Result<SpectrumResult> {
    let n = a.nrows();
    let sigma = disc.center;
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= sigma;
    }
    let lu = m.partial_piv_lu();
    let kdim = (4 * opts.k + 20).min(n);
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(kdim + 1);
    let mut hm = Mat::<C64>::zeros(kdim + 1, kdim);
    let mut v = start_vector(n);
    let s = vnorm(&v);
    v.iter_mut().for_each(|z| *z /= s);
    q.push(v);
    let mut dim = kdim;
    for j in 0..kdim {
        let y = lu.solve(col(&q[j]));
        let mut w: Vec<C64> = (0..n).map(|i| y[(i, 0)]).collect();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let c: C64 = qi.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                hm[(i, j)] += c;
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nw = vnorm(&w);
        hm[(j + 1, j)] = C64::new(nw, 0.0);
        if nw < 1e-14 {
            dim = j + 1;
            break;
        }
        w.iter_mut().for_each(|z| *z /= nw);
        q.push(w);
    }
    let hs = Mat::from_fn(dim, dim, |i, j| hm[(i, j)]);
    let e = hs.eigen().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    let mut pairs = Vec::new();
    for k in 0..dim {
        let theta = e.S()[k];
        if theta.norm() < 1e-300 {
            continue;
        }
        let lambda = sigma + C64::new(1.0, 0.0) / theta;
        let mut v = vec![C64::new(0.0, 0.0); n];
        for (i, qi) in q.iter().take(dim).enumerate() {
            let c = e.U()[(i, k)];
            v.iter_mut().zip(qi).for_each(|(x, y)| *x += c * y);
        }
        let s = vnorm(&v);
        v.iter_mut().for_each(|z| *z /= s);
        let residual = residual(a, lambda, &v);
        pairs.push(EigenPair { lambda, vector: v, residual });
    }
    pairs.sort_by(|a, b| (a.lambda - sigma).norm().partial_cmp(&(b.lambda - sigma).norm()).unwrap());
    pairs.truncate(opts.k);
    if pairs.iter().any(|p| p.residual > opts.residual_tol) {
        return Err(Error::IterativeNoConvergence(format!(
            "shift-invert residuals above {:e} after a {dim}-dimensional Krylov space",
            opts.residual_tol
        )));
    }
    let eigenvalues = pairs.iter().map(|p| p.lambda).collect();
    pairs.retain(|p| disc.contains(p.lambda));
    Ok(SpectrumResult { pairs, filter: Some(disc), eigenvalues })
}
