use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::dst::Dst2;
use crate::error::{Error, Result};
use crate::fields::calculus::neg_laplacian_interior;
use crate::fields::{DomainKind, Grid2D, ScalarField};
use crate::scalar::{FieldValue, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    DirectSparse,
    SineTransform,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::DirectSparse => "direct-sparse",
            SolverKind::SineTransform => "sine-transform",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoissonSolveReport<T> {
    /// `||Delta_h psi + omega|| / ||omega||` over interior nodes.
    pub residual: T,
    pub kind: SolverKind,
    pub iterations: Option<usize>,
    pub converged: bool,
    /// Whether the data keeps a quarter box width away from the artificial edges.
    pub edge_clearance_ok: bool,
}

enum Backend<T: Real> {
    Direct(Llt<usize, T>),
    Sine { dst: Dst2<T>, inv_eig: Vec<T> },
}

/// Factorized `-Delta_h` with homogeneous Dirichlet data on every box edge.
/// Immutable after construction and shareable across threads.
pub struct PoissonSolver<T: Real> {
    grid: Grid2D<T>,
    backend: Backend<T>,
    pub tol: T,
}

impl<T: Real> std::fmt::Debug for PoissonSolver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver").field("grid", &self.grid).field("kind", &self.kind()).finish()
    }
}

impl<T: Real> PoissonSolver<T> {
    pub fn new(grid: Grid2D<T>, kind: SolverKind) -> Result<Self> {
        let mx = grid.nx() - 2;
        let my = grid.ny() - 2;
        let h = grid.h();
        let backend = match kind {
            SolverKind::SineTransform => {
                let pi = T::PI();
                let lam = |k: usize, m: usize| {
                    T::lit(2.0) - T::lit(2.0) * (pi * T::of_usize(k) / T::of_usize(m + 1)).cos()
                };
                let norm = T::lit(4.0) / (T::of_usize(mx + 1) * T::of_usize(my + 1));
                let mut inv_eig = Vec::with_capacity(mx * my);
                for l in 1..=my {
                    for k in 1..=mx {
                        inv_eig.push(norm * h * h / (lam(k, mx) + lam(l, my)));
                    }
                }
                Backend::Sine { dst: Dst2::new(mx, my), inv_eig }
            }
            SolverKind::DirectSparse => {
                let n = mx * my;
                let mut t = Vec::with_capacity(5 * n);
                let four = T::lit(4.0);
                let m1 = -T::one();
                for j in 0..my {
                    for i in 0..mx {
                        let k = j * mx + i;
                        t.push(Triplet::new(k, k, four));
                        if i > 0 {
                            t.push(Triplet::new(k, k - 1, m1));
                        }
                        if i + 1 < mx {
                            t.push(Triplet::new(k, k + 1, m1));
                        }
                        if j > 0 {
                            t.push(Triplet::new(k, k - mx, m1));
                        }
                        if j + 1 < my {
                            t.push(Triplet::new(k, k + mx, m1));
                        }
                    }
                }
                let a = SparseColMat::<usize, T>::try_new_from_triplets(n, n, &t)
                    .map_err(|e| Error::InvalidArgument(format!("{e:?}")))?;
                let llt = a
                    .sp_cholesky(Side::Lower)
                    .map_err(|e| Error::InvalidArgument(format!("cholesky: {e:?}")))?;
                Backend::Direct(llt)
            }
        };
        Ok(Self { grid, backend, tol: T::lit(1e-10) })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn kind(&self) -> SolverKind {
        match self.backend {
            Backend::Direct(_) => SolverKind::DirectSparse,
            Backend::Sine { .. } => SolverKind::SineTransform,
        }
    }

    /// Overwrite interior data `(nx-2) x (ny-2)` with the solution of `-Delta_h psi = rhs`.
    pub fn solve_interior(&self, data: &mut [T]) {
        match &self.backend {
            Backend::Sine { dst, inv_eig } => {
                dst.apply(data);
                for (d, s) in data.iter_mut().zip(inv_eig) {
                    *d *= *s;
                }
                dst.apply(data);
            }
            Backend::Direct(llt) => {
                let n = data.len();
                let h2 = self.grid.h() * self.grid.h();
                let mut rhs = Mat::<T>::from_fn(n, 1, |i, _| data[i] * h2);
                llt.solve_in_place(rhs.as_mut());
                for (i, d) in data.iter_mut().enumerate() {
                    *d = rhs[(i, 0)];
                }
            }
        }
    }

    /// Solve a real node field: edges of the result are zero, edge data of `omega` is ignored.
    pub fn solve_real(&self, omega: &ScalarField<T, T>) -> ScalarField<T, T> {
        let g = self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let (mx, my) = (nx - 2, ny - 2);
        let mut buf = vec![T::zero(); mx * my];
        let v = omega.values();
        for j in 0..my {
            buf[j * mx..(j + 1) * mx].copy_from_slice(&v[(j + 1) * nx + 1..(j + 1) * nx + 1 + mx]);
        }
        self.solve_interior(&mut buf);
        let mut out = ScalarField::zeros(g);
        let o = out.values_mut();
        for j in 0..my {
            o[(j + 1) * nx + 1..(j + 1) * nx + 1 + mx].copy_from_slice(&buf[j * mx..(j + 1) * mx]);
        }
        out
    }

    /// Solve for real or complex data, component by component.
    pub fn solve_values<V: FieldValue<T>>(&self, omega: &ScalarField<T, V>) -> ScalarField<T, V> {
        let re = self.solve_real(&omega.map(|v| v.re()));
        if !V::IS_COMPLEX {
            return re.map(|r| V::from_real(r));
        }
        let im = self.solve_real(&omega.map(|v| v.im()));
        let vals = re.values().iter().zip(im.values()).map(|(&a, &b)| V::from_parts(a, b)).collect();
        ScalarField::from_vec(self.grid, vals).expect("same grid")
    }

    /// Dirichlet solve with diagnostics. A half-plane `omega` must vanish on the wall.
    pub fn solve_dirichlet<V: FieldValue<T>>(
        &self,
        omega: &ScalarField<T, V>,
    ) -> Result<(ScalarField<T, V>, PoissonSolveReport<T>)> {
        if omega.grid() != &self.grid {
            return Err(Error::ShapeMismatch("field grid differs from solver grid".into()));
        }
        let scale = omega.max_abs().max(T::one());
        if self.grid.kind() == DomainKind::Half {
            let trace = omega.wall_max_abs();
            if trace > T::lit(1e-12) * scale {
                return Err(Error::NonzeroTrace(trace.as_f64()));
            }
        }
        let psi = self.solve_values(omega);
        let residual = self.residual(&psi, omega);
        let converged = residual <= self.tol;
        let report = PoissonSolveReport {
            residual,
            kind: self.kind(),
            iterations: None,
            converged,
            edge_clearance_ok: edge_clearance_ok(omega),
        };
        if !converged {
            return Err(Error::SolverDivergence { residual: residual.as_f64(), tol: self.tol.as_f64() });
        }
        Ok((psi, report))
    }

    /// Relative interior residual `||-Delta_h psi - omega|| / ||omega||`.
    pub fn residual<V: FieldValue<T>>(&self, psi: &ScalarField<T, V>, omega: &ScalarField<T, V>) -> T {
        let lap = neg_laplacian_interior(psi);
        let g = self.grid;
        let (mut num, mut den) = (T::zero(), T::zero());
        for j in 1..g.ny() - 1 {
            for i in 1..g.nx() - 1 {
                let k = g.idx(i, j);
                num += (lap.values()[k] - omega.values()[k]).abs2();
                den += omega.values()[k].abs2();
            }
        }
        if den == T::zero() {
            return num.sqrt();
        }
        (num / den).sqrt()
    }
}

/// Support keeps distance `L/4` from every edge other than a half-plane wall.
pub fn edge_clearance_ok<T: Real, V: FieldValue<T>>(omega: &ScalarField<T, V>) -> bool {
    let g = omega.grid();
    let l = g.half_width();
    let margin = l / T::lit(4.0);
    let thr = omega.max_abs() * T::lit(1e-12);
    for k in 0..g.len() {
        if omega.values()[k].modulus() <= thr {
            continue;
        }
        let (x, y) = g.xy(k);
        let dx = l - x.abs();
        let dy_top = l - y;
        let dy_bot = match g.kind() {
            DomainKind::Half => margin,
            DomainKind::Whole => y + l,
        };
        if dx < margin || dy_top < margin || dy_bot < margin {
            return false;
        }
    }
    true
}
