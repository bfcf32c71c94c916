use faer::Mat;

use super::linalg::{cmat, vnorm};
use super::resolvent::Resolvent;
use crate::error::{Error, Result};
use crate::operators::LambdaER;
use crate::C64;

#[derive(Clone, Debug)]
pub struct NeumannResult {
    pub omega: Vec<C64>,
    /// Lobe-local approximation `(lambda - plus - minus)^{-1} g`.
    pub approx: Vec<C64>,
    /// `||U_R^k g||` for `k = 0, 1, ...`.
    pub term_norms: Vec<f64>,
    /// `||U_R^{k+2} g|| / ||U_R^k g||`, square-rooted.
    pub two_step_ratios: Vec<f64>,
    pub u_r_norm: f64,
    /// Tail estimate of the spectral radius of `U_R`.
    pub spectral_radius: f64,
    /// `max/min - 1` of the tail two-step ratios.
    pub geometric_spread: f64,
}

struct BlockSolver<'a> {
    upper: &'a [usize],
    lower: &'a [usize],
    ru: Resolvent<'a>,
    rl: Resolvent<'a>,
}

impl BlockSolver<'_> {
    fn solve(&self, g: &[C64]) -> Result<Vec<C64>> {
        let gu: Vec<C64> = self.upper.iter().map(|&d| g[d]).collect();
        let gl: Vec<C64> = self.lower.iter().map(|&d| g[d]).collect();
        let xu = self.ru.solve(&gu)?;
        let xl = self.rl.solve(&gl)?;
        let mut x = vec![C64::new(0.0, 0.0); g.len()];
        for (a, &d) in self.upper.iter().enumerate() {
            x[d] = xu[a];
        }
        for (a, &d) in self.lower.iter().enumerate() {
            x[d] = xl[a];
        }
        Ok(x)
    }
}

fn nonzero_rows(m: &Mat<f64>) -> Vec<usize> {
    (0..m.nrows()).filter(|&i| (0..m.ncols()).any(|j| m[(i, j)] != 0.0)).collect()
}

fn coupling_norm(rem: &Mat<f64>, block_inv: &Mat<C64>) -> Result<f64> {
    let rows = nonzero_rows(rem);
    if rows.is_empty() {
        return Ok(0.0);
    }
    let r = Mat::from_fn(rows.len(), rem.ncols(), |i, j| C64::new(rem[(rows[i], j)], 0.0));
    let p = r * block_inv;
    let s = p.singular_values().map_err(|e| Error::IterativeNoConvergence(format!("{e:?}")))?;
    Ok(s[0])
}

/// Operator 2-norm of `U_R(lambda) = remainder (lambda - plus - minus)^{-1}`.
pub fn remainder_norm(er: &LambdaER, lambda: C64) -> Result<f64> {
    let au = cmat(&er.plus_block());
    let al = cmat(&er.minus_block());
    let bu = Resolvent::new(&au, lambda).inverse();
    let bl = Resolvent::new(&al, lambda).inverse();
    let rul = er.remainder.block(&er.upper, &er.lower);
    let rlu = er.remainder.block(&er.lower, &er.upper);
    Ok(coupling_norm(&rul, &bl)?.max(coupling_norm(&rlu, &bu)?))
}

/// Terms kept after the sum has converged, so the decay rate is read past the transient.
const DIAGNOSTIC_TERMS: usize = 24;

/// `(lambda - Lambda_ER)^{-1} g` from lobe-local solves and the series `sum U_R^k g`.
pub fn neumann_resolvent_er(er: &LambdaER, lambda: C64, g: &[C64], kmax: usize) -> Result<NeumannResult> {
    let n = er.full.dof();
    if g.len() != n {
        return Err(Error::ShapeMismatch(format!("rhs has {} entries, operator {n}", g.len())));
    }
    let u_r_norm = remainder_norm(er, lambda)?;
    if u_r_norm >= 1.0 {
        return Err(Error::SeriesDiverges(u_r_norm));
    }
    let au = cmat(&er.plus_block());
    let al = cmat(&er.minus_block());
    let solver = BlockSolver {
        upper: &er.upper,
        lower: &er.lower,
        ru: Resolvent::new(&au, lambda),
        rl: Resolvent::new(&al, lambda),
    };
    let rem = er.remainder.to_dense();
    let apply_rem = |x: &[C64]| -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            if x[j] == C64::new(0.0, 0.0) {
                continue;
            }
            let c = rem.col(j);
            for i in 0..n {
                if c[i] != 0.0 {
                    y[i] += x[j] * c[i];
                }
            }
        }
        y
    };
    let mut term = g.to_vec();
    let mut sum = g.to_vec();
    let mut term_norms = vec![vnorm(g)];
    let mut converged = false;
    for k in 0..kmax {
        if converged && k >= DIAGNOSTIC_TERMS {
            break;
        }
        term = apply_rem(&solver.solve(&term)?);
        let t = vnorm(&term);
        if t == 0.0 {
            break;
        }
        term_norms.push(t);
        if !converged {
            sum.iter_mut().zip(&term).for_each(|(s, x)| *s += x);
            converged = t <= 1e-16 * vnorm(&sum);
        }
    }
    let approx = solver.solve(g)?;
    let omega = solver.solve(&sum)?;
    let two_step_ratios: Vec<f64> = term_norms
        .windows(3)
        .filter(|w| w[0] > 0.0 && w[2] > 0.0)
        .map(|w| (w[2] / w[0]).sqrt())
        .collect();
    let tail = &two_step_ratios[two_step_ratios.len() / 2..];
    let (spectral_radius, geometric_spread) = if tail.is_empty() {
        (0.0, 0.0)
    } else {
        let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = tail.iter().copied().fold(0.0, f64::max);
        (*tail.last().unwrap(), hi / lo - 1.0)
    };
    Ok(NeumannResult { omega, approx, term_norms, two_step_ratios, u_r_norm, spectral_radius, geometric_spread })
}
