use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::Mat;

use super::linalg::{col, matvec, vnorm};
use crate::error::{Error, Result};
use crate::C64;

/// Factorization of `lambda I - A` reused across right-hand sides.
pub struct Resolvent<'a> {
    a: &'a Mat<C64>,
    lambda: C64,
    lu: PartialPivLu<C64>,
}

pub const BACKWARD_TOL: f64 = 1e-10;

impl<'a> Resolvent<'a> {
    pub fn new(a: &'a Mat<C64>, lambda: C64) -> Self {
        let n = a.nrows();
        let mut m = -a.clone();
        for i in 0..n {
            m[(i, i)] += lambda;
        }
        Self { a, lambda, lu: m.partial_piv_lu() }
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    /// `||(lambda - A) x - g|| / ||g||`.
    pub fn backward_error(&self, x: &[C64], g: &[C64]) -> f64 {
        let ax = matvec(self.a, x);
        let r: Vec<C64> = (0..g.len()).map(|i| self.lambda * x[i] - ax[i] - g[i]).collect();
        let ng = vnorm(g);
        if ng == 0.0 {
            vnorm(&r)
        } else {
            vnorm(&r) / ng
        }
    }

    fn raw(&self, g: &[C64]) -> Vec<C64> {
        let y = self.lu.solve(col(g));
        (0..g.len()).map(|i| y[(i, 0)]).collect()
    }

    /// Solve with one step of iterative refinement; fails with `NearSingular`.
    pub fn solve(&self, g: &[C64]) -> Result<Vec<C64>> {
        let mut x = self.raw(g);
        let mut be = self.backward_error(&x, g);
        if be > BACKWARD_TOL && be.is_finite() {
            let ax = matvec(self.a, &x);
            let r: Vec<C64> = (0..g.len()).map(|i| g[i] - (self.lambda * x[i] - ax[i])).collect();
            let dx = self.raw(&r);
            x.iter_mut().zip(dx).for_each(|(a, b)| *a += b);
            be = self.backward_error(&x, g);
        }
        if !(be <= BACKWARD_TOL) {
            let distance = match self.a.eigenvalues() {
                Ok(ev) => ev.iter().map(|z| (z - self.lambda).norm()).fold(f64::INFINITY, f64::min),
                Err(_) => f64::NAN,
            };
            return Err(Error::NearSingular { distance });
        }
        Ok(x)
    }

    /// `(lambda I - A)^{-1}` as a dense matrix.
    pub fn inverse(&self) -> Mat<C64> {
        let n = self.a.nrows();
        self.lu.solve(Mat::<C64>::identity(n, n))
    }
}

/// Solve `(lambda I - A) omega = g`.
pub fn resolvent_apply(a: &Mat<C64>, lambda: C64, g: &[C64]) -> Result<Vec<C64>> {
    if g.len() != a.nrows() {
        return Err(Error::ShapeMismatch(format!("rhs has {} entries, operator {}", g.len(), a.nrows())));
    }
    Resolvent::new(a, lambda).solve(g)
}
