//! Boundary-layer corrector, boundary-data norms and slip traces.

use crate::error::{Error, Result};
use crate::scalar::{FieldValue, Real};

pub const MAX_DERIVATIVE: usize = 5;

/// Function of `xi_1` sampled on `x_i = (i - c) dx`, with derivatives up to order five.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData<T: Real, V: FieldValue<T> = T> {
    pub dx: T,
    /// `derivs[k]` holds the `k`-th derivative; `derivs[0]` is the data itself.
    pub derivs: Vec<Vec<V>>,
}

/// Second-order centered stencils for derivative orders 1 to 5, as (offset, weight) with a `1 / (den dx^k)` factor.
const STENCILS: [(&[(i64, f64)], f64); 5] = [
    (&[(-1, -1.0), (1, 1.0)], 2.0),
    (&[(-1, 1.0), (0, -2.0), (1, 1.0)], 1.0),
    (&[(-2, -1.0), (-1, 2.0), (1, -2.0), (2, 1.0)], 2.0),
    (&[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)], 1.0),
    (&[(-3, -1.0), (-2, 4.0), (-1, -5.0), (1, 5.0), (2, -4.0), (3, 1.0)], 2.0),
];

fn difference<T: Real, V: FieldValue<T>>(f: &[V], dx: T, order: usize) -> Vec<V> {
    let (st, den) = STENCILS[order - 1];
    let scale = T::one() / (T::lit(den) * dx.powi(order as i32));
    let n = f.len() as i64;
    (0..n)
        .map(|i| {
            let mut acc = V::zero();
            for &(o, w) in st {
                let k = i + o;
                if (0..n).contains(&k) {
                    acc += f[k as usize] * T::lit(w);
                }
            }
            acc * scale
        })
        .collect()
}

impl<T: Real, V: FieldValue<T>> BoundaryData<T, V> {
    /// Derivatives by centered differencing, with zero data beyond the ends.
    pub fn from_samples(values: Vec<V>, dx: T) -> Result<Self> {
        if values.len() < 7 || values.len() % 2 == 0 {
            return Err(Error::InvalidArgument(format!("need an odd count of at least 7 samples, got {}", values.len())));
        }
        let mut derivs = vec![values.clone()];
        for k in 1..=MAX_DERIVATIVE {
            derivs.push(difference(&values, dx, k));
        }
        Ok(Self { dx, derivs })
    }

    pub fn len(&self) -> usize {
        self.derivs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.derivs[0].is_empty()
    }

    pub fn x(&self, i: usize) -> T {
        (T::of_usize(i) - T::of_usize((self.len() - 1) / 2)) * self.dx
    }

    pub fn values(&self) -> &[V] {
        &self.derivs[0]
    }

    pub fn scale(&self, a: T) -> Self {
        Self { dx: self.dx, derivs: self.derivs.iter().map(|d| d.iter().map(|&v| v * a).collect()).collect() }
    }

    /// Largest magnitude at the two end samples.
    pub fn end_magnitude(&self) -> T {
        let v = self.values();
        v[0].modulus().max(v[v.len() - 1].modulus())
    }

    fn l2(&self, f: impl Fn(usize) -> V) -> T {
        let mut acc = T::zero();
        for i in 0..self.len() {
            acc += f(i).abs2();
        }
        (acc * self.dx).sqrt()
    }

    pub fn max_abs(&self, k: usize) -> T {
        self.derivs[k].iter().fold(T::zero(), |m, v| m.max(v.modulus()))
    }
}

impl<T: Real> BoundaryData<T, T> {
    /// Samples of `f` on `n` points spanning `[-l, l]`.
    pub fn from_fn(l: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        if n < 7 || n % 2 == 0 {
            return Err(Error::InvalidArgument(format!("need an odd count of at least 7 samples, got {n}")));
        }
        let dx = (l + l) / T::of_usize(n - 1);
        let c = T::of_usize((n - 1) / 2);
        Self::from_samples((0..n).map(|i| f((T::of_usize(i) - c) * dx)).collect(), dx)
    }
}

/// `||h||_{W^{5,2}} + ||xi_1 h'|| + ||xi_1 h''||`.
pub fn z_norm<T: Real, V: FieldValue<T>>(h: &BoundaryData<T, V>) -> T {
    let mut sob = T::zero();
    for k in 0..=MAX_DERIVATIVE {
        sob += h.l2(|i| h.derivs[k][i]).powi(2);
    }
    let mut out = sob.sqrt();
    for l in 0..2 {
        out += h.l2(|i| h.derivs[l + 1][i] * h.x(i));
    }
    out
}

/// Tensor grid for the layer: the wall samples of `h` in `xi_1` and `y_j = j dy`, `j < ny`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerGrid<T> {
    pub dy: T,
    pub ny: usize,
}

impl<T: Real> LayerGrid<T> {
    /// Spacing `alpha^{-1/2} / per_width` up to `widths` layer widths.
    pub fn resolving(alpha: T, per_width: usize, widths: T) -> Self {
        let w = alpha.sqrt().recip();
        let dy = w / T::of_usize(per_width);
        let ny = (widths * T::of_usize(per_width)).ceil().to_usize().unwrap_or(0) + 1;
        Self { dy, ny }
    }

    pub fn y(&self, j: usize) -> T {
        T::of_usize(j) * self.dy
    }
}

/// Corrector components on the layer grid, stored row-major (`j * nx + i`).
#[derive(Clone, Debug, PartialEq)]
pub struct Corrector<T> {
    pub nx: usize,
    pub dx: T,
    pub layer: LayerGrid<T>,
    pub j1: Vec<T>,
    pub j2: Vec<T>,
}

/// Profile `(1 - s) e^{-s}` of the tangential component.
pub fn layer_profile<T: Real>(s: T) -> T {
    (T::one() - s) * (-s).exp()
}

/// `int_0^s (1 - eta) e^{-eta} d eta = s e^{-s}`.
pub fn layer_primitive<T: Real>(s: T) -> T {
    s * (-s).exp()
}

/// `J_1 = h (1 - Xi) e^{-Xi}`, `J_2 = -alpha^{-1/2} Xi e^{-Xi} h'`, `Xi = alpha^{1/2} xi_2`.
pub fn corrector_j<T: Real>(h: &BoundaryData<T>, alpha: T, layer: LayerGrid<T>) -> Result<Corrector<T>> {
    if !(alpha >= T::one()) {
        return Err(Error::InvalidArgument(format!("alpha must be at least 1, got {alpha}")));
    }
    let limit = alpha.sqrt().recip() / T::lit(8.0);
    if layer.dy > limit {
        return Err(Error::LayerUnderResolved { spacing: layer.dy.as_f64(), limit: limit.as_f64() });
    }
    let nx = h.len();
    let sa = alpha.sqrt();
    let mut j1 = Vec::with_capacity(nx * layer.ny);
    let mut j2 = Vec::with_capacity(nx * layer.ny);
    for j in 0..layer.ny {
        let xi = sa * layer.y(j);
        let (a, b) = (layer_profile(xi), layer_primitive(xi));
        for i in 0..nx {
            j1.push(h.derivs[0][i] * a);
            j2.push(-(h.derivs[1][i] * b) / sa);
        }
    }
    Ok(Corrector { nx, dx: h.dx, layer, j1, j2 })
}

/// Norms of one corrector on its grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectorRow<T> {
    pub alpha: T,
    pub norm_j: T,
    pub norm_grad_j: T,
    pub norm_grad2_j: T,
    pub norm_xi_grad_j: T,
    pub max_div: T,
    /// `h_1^2 ||h'''|| + dy^2 alpha ||h'||`, the size of the differencing error in `div J`.
    pub div_scale: T,
    pub wall_error_j1: T,
    pub wall_error_j2: T,
}

impl<T: Real> Corrector<T> {
    fn at(&self, f: &[T], i: usize, j: usize) -> T {
        f[j * self.nx + i]
    }

    fn dxf(&self, f: &[T], i: usize, j: usize) -> T {
        let h = self.dx;
        if i == 0 {
            (self.at(f, 1, j) - self.at(f, 0, j)) / h
        } else if i + 1 == self.nx {
            (self.at(f, i, j) - self.at(f, i - 1, j)) / h
        } else {
            (self.at(f, i + 1, j) - self.at(f, i - 1, j)) / (h + h)
        }
    }

    fn dyf(&self, f: &[T], i: usize, j: usize) -> T {
        let h = self.layer.dy;
        let ny = self.layer.ny;
        if j == 0 {
            (T::lit(-3.0) * self.at(f, i, 0) + T::lit(4.0) * self.at(f, i, 1) - self.at(f, i, 2)) / (h + h)
        } else if j + 1 == ny {
            (self.at(f, i, j) - self.at(f, i, j - 1)) / h
        } else {
            (self.at(f, i, j + 1) - self.at(f, i, j - 1)) / (h + h)
        }
    }

    fn map(&self, f: &[T], d: impl Fn(&Self, &[T], usize, usize) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(f.len());
        for j in 0..self.layer.ny {
            for i in 0..self.nx {
                out.push(d(self, f, i, j));
            }
        }
        out
    }

    fn l2(&self, fs: &[&[T]]) -> T {
        let mut acc = T::zero();
        for f in fs {
            for v in f.iter() {
                acc += *v * *v;
            }
        }
        (acc * self.dx * self.layer.dy).sqrt()
    }

    /// Norms from centered differences on the layer grid.
    pub fn report(&self, h: &BoundaryData<T>, alpha: T) -> CorrectorRow<T> {
        let x = |s: &Self, f: &[T], i, j| s.dxf(f, i, j);
        let y = |s: &Self, f: &[T], i, j| s.dyf(f, i, j);
        let (j1x, j1y) = (self.map(&self.j1, x), self.map(&self.j1, y));
        let (j2x, j2y) = (self.map(&self.j2, x), self.map(&self.j2, y));
        let second = [
            self.map(&j1x, x),
            self.map(&j1x, y),
            self.map(&j1y, y),
            self.map(&j2x, x),
            self.map(&j2x, y),
            self.map(&j2y, y),
        ];
        let mut xi1 = Vec::with_capacity(self.j1.len());
        let mut xi2 = Vec::with_capacity(self.j1.len());
        let mut max_div = T::zero();
        for j in 0..self.layer.ny {
            let yy = self.layer.y(j);
            for i in 0..self.nx {
                let k = j * self.nx + i;
                let xx = h.x(i);
                xi1.push(xx * j1x[k] + yy * j1y[k]);
                xi2.push(xx * j2x[k] + yy * j2y[k]);
                // the two outermost columns carry one-sided differences
                if i > 0 && i + 1 < self.nx && j > 0 && j + 1 < self.layer.ny {
                    max_div = max_div.max((j1x[k] + j2y[k]).abs());
                }
            }
        }
        let mut wall_error_j1 = T::zero();
        let mut wall_error_j2 = T::zero();
        for i in 0..self.nx {
            wall_error_j1 = wall_error_j1.max((self.j1[i] - h.derivs[0][i]).abs());
            wall_error_j2 = wall_error_j2.max(self.j2[i].abs());
        }
        let second_refs: Vec<&[T]> = second.iter().map(|v| v.as_slice()).collect();
        CorrectorRow {
            alpha,
            norm_j: self.l2(&[&self.j1, &self.j2]),
            norm_grad_j: self.l2(&[&j1x, &j1y, &j2x, &j2y]),
            norm_grad2_j: self.l2(&second_refs),
            norm_xi_grad_j: self.l2(&[&xi1, &xi2]),
            max_div,
            div_scale: self.dx * self.dx * h.max_abs(3) + self.layer.dy * self.layer.dy * alpha * h.max_abs(1),
            wall_error_j1,
            wall_error_j2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectorReport<T> {
    pub rows: Vec<CorrectorRow<T>>,
    /// Log-log slopes of `||J||`, `||grad J||`, `||grad^2 J||` and `||xi . grad J||` against `alpha`.
    pub slopes: [T; 4],
}

impl<T: Real> CorrectorReport<T> {
    /// `max |div J| <= factor * div_scale` on every row.
    pub fn divergence_ok(&self, factor: T) -> bool {
        self.rows.iter().all(|r| r.max_div <= factor * r.div_scale)
    }

    pub fn wall_exact(&self) -> bool {
        self.rows.iter().all(|r| r.wall_error_j1 == T::zero() && r.wall_error_j2 == T::zero())
    }
}

fn loglog<T: Real>(x: &[T], y: &[T]) -> T {
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let n = T::of_usize(x.len());
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (a, b) in lx.iter().zip(&ly) {
        sxx += (*a - mx) * (*a - mx);
        sxy += (*a - mx) * (*b - my);
    }
    sxy / sxx
}

/// Corrector norms over `alphas`, each on a layer grid with `per_width` points per layer width.
pub fn corrector_scaling<T: Real>(
    h: &BoundaryData<T>,
    alphas: &[T],
    per_width: usize,
    widths: T,
) -> Result<CorrectorReport<T>> {
    let mut a = alphas.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    if a.len() < 4 || a[a.len() - 1] / a[0] < T::lit(100.0) {
        return Err(Error::InvalidArgument("need at least 4 alpha values spanning two decades".into()));
    }
    let mut rows = Vec::with_capacity(a.len());
    for &alpha in &a {
        let c = corrector_j(h, alpha, LayerGrid::resolving(alpha, per_width, widths))?;
        rows.push(c.report(h, alpha));
    }
    let col = |f: fn(&CorrectorRow<T>) -> T| rows.iter().map(f).collect::<Vec<T>>();
    let slopes = [
        loglog(&a, &col(|r| r.norm_j)),
        loglog(&a, &col(|r| r.norm_grad_j)),
        loglog(&a, &col(|r| r.norm_grad2_j)),
        loglog(&a, &col(|r| r.norm_xi_grad_j)),
    ];
    Ok(CorrectorReport { rows, slopes })
}

pub mod slip {
    //! Tangential wall velocity of resolvent solutions.

    use std::f64::consts::PI;

    use faer::Mat;

    use super::{z_norm, BoundaryData};
    use crate::error::Result;
    use crate::fields::WeightKind;
    use crate::greens::wall_tangential_trace;
    use crate::operators::assemble_m_alpha;
    use crate::spectra::sweep::HalfPlaneProblem;
    use crate::spectra::Resolvent;
    use crate::C64;

    #[derive(Clone, Debug)]
    pub struct SlipTrace {
        pub lambda: C64,
        pub alpha: f64,
        pub data: BoundaryData<f64, C64>,
        pub z_norm: f64,
        pub g_norm: f64,
    }

    impl SlipTrace {
        pub fn ratio(&self) -> f64 {
            if self.g_norm == 0.0 {
                0.0
            } else {
                self.z_norm / self.g_norm
            }
        }
    }

    /// `h = -v_1` at the wall for `v = K[(lambda - M_alpha)^{-1} g]`.
    pub fn slip_trace_with(problem: &HalfPlaneProblem, m: &Mat<C64>, lambda: C64, alpha: f64, g: &[f64]) -> Result<SlipTrace> {
        let rest = &problem.restriction;
        let gc: Vec<C64> = g.iter().map(|&v| C64::new(v, 0.0)).collect();
        let g_norm = (g.iter().map(|v| v * v).sum::<f64>() * rest.grid().h().powi(2)).sqrt();
        let omega = if g_norm == 0.0 { vec![C64::new(0.0, 0.0); g.len()] } else { Resolvent::new(m, lambda).solve(&gc)? };
        let field = rest.scatter(&omega);
        let psi = problem.solver.solve_values(&field);
        let trace: Vec<C64> = wall_tangential_trace(&psi).into_iter().map(|v| -v).collect();
        let data = BoundaryData::from_samples(trace, rest.grid().h())?;
        Ok(SlipTrace { lambda, alpha, z_norm: z_norm(&data), data, g_norm })
    }

    pub fn slip_trace(problem: &HalfPlaneProblem, g: &[f64], lambda: C64, alpha: f64) -> Result<SlipTrace> {
        let (m, _) = assemble_m_alpha(&problem.lambda_e, alpha, WeightKind::gaussian())?;
        slip_trace_with(problem, &m.to_complex(), lambda, alpha, g)
    }

    /// Ratios `||h||_Z / ||g||` over contour nodes (rows) and `alphas` (columns).
    pub fn slip_uniformity(
        problem: &HalfPlaneProblem,
        g: &[f64],
        center: C64,
        radius: f64,
        nodes: usize,
        alphas: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        let mut out = vec![Vec::with_capacity(alphas.len()); nodes];
        for &alpha in alphas {
            let (m, _) = assemble_m_alpha(&problem.lambda_e, alpha, WeightKind::gaussian())?;
            let mc = m.to_complex();
            for (k, row) in out.iter_mut().enumerate() {
                let lambda = center + C64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
                row.push(slip_trace_with(problem, &mc, lambda, alpha, g)?.ratio());
            }
        }
        Ok(out)
    }
}
