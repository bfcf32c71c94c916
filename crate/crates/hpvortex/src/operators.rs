//! Discretized linear operators on an active set of grid nodes.

use std::io::Write;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;

use crate::baseflow::{BaseFields, MirroredFlow, RadialProfile};
use crate::error::{Error, Result};
use crate::fields::{DomainKind, ScalarField, WeightKind};
use crate::greens::PoissonSolver;
use crate::{Grid, C64};

/// Active nodes of a grid; box edges and the wall never belong to it.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainRestriction {
    grid: Grid,
    nodes: Vec<usize>,
    dof_of: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl DomainRestriction {
    pub fn from_predicate(grid: Grid, keep: impl Fn(f64, f64) -> bool) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut dof_of = vec![NONE; grid.len()];
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                if grid.is_edge(i, j) {
                    continue;
                }
                if keep(grid.x(i), grid.y(j)) {
                    let k = grid.idx(i, j);
                    dof_of[k] = nodes.len();
                    nodes.push(k);
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::RestrictionTooSmall("mask is empty".into()));
        }
        Ok(Self { grid, nodes, dof_of })
    }

    pub fn full_interior(grid: Grid) -> Result<Self> {
        Self::from_predicate(grid, |_, _| true)
    }

    /// Union of open discs `|xi - c| < radius`.
    pub fn discs(grid: Grid, discs: &[((f64, f64), f64)]) -> Result<Self> {
        let discs = discs.to_vec();
        Self::from_predicate(grid, move |x, y| {
            discs.iter().any(|&((cx, cy), r)| (x - cx).powi(2) + (y - cy).powi(2) < r * r)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dof(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, d: usize) -> usize {
        self.nodes[d]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn dof_of(&self, node: usize) -> Option<usize> {
        match self.dof_of[node] {
            NONE => None,
            d => Some(d),
        }
    }

    pub fn contains(&self, node: usize) -> bool {
        self.dof_of[node] != NONE
    }

    pub fn gather<V: crate::FieldValue<f64>>(&self, f: &ScalarField<f64, V>) -> Vec<V> {
        self.nodes.iter().map(|&k| f.values()[k]).collect()
    }

    pub fn scatter<V: crate::FieldValue<f64>>(&self, v: &[V]) -> ScalarField<f64, V> {
        let mut f = ScalarField::zeros(self.grid);
        for (d, &k) in self.nodes.iter().enumerate() {
            f.values_mut()[k] = v[d];
        }
        f
    }

    /// Dof of the node mirrored across `xi_2 = 0` on a whole grid.
    pub fn mirror_dof(&self, d: usize) -> Option<usize> {
        let (i, j) = self.grid.ij(self.nodes[d]);
        let c = self.grid.center();
        let jm = (2 * c).checked_sub(j)?;
        self.dof_of(self.grid.idx(i, jm))
    }

    /// Whether every node where `f` is nonzero lies in the mask together with its four neighbours.
    pub fn covers_support(&self, f: &ScalarField<f64>) -> bool {
        let g = self.grid;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                if f.at(i, j) == 0.0 {
                    continue;
                }
                if g.is_edge(i, j) {
                    return false;
                }
                let around = [(i, j), (i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)];
                for (a, b) in around {
                    if g.is_edge(a, b) {
                        continue;
                    }
                    if !self.contains(g.idx(a, b)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryTag {
    /// Zero data on the wall, box edges and outside the mask.
    Dirichlet,
    /// Odd reflection across the wall (perfect slip), Dirichlet elsewhere.
    PerfectSlip,
    /// Radial problem: regular at the origin, zero at the outer radius.
    Radial,
}

#[derive(Clone, Debug)]
pub enum Entries {
    Dense(Mat<f64>),
    DenseComplex(Mat<C64>),
    /// Coordinate list `(row, col, value)`; duplicates are summed.
    Sparse { n: usize, triplets: Vec<(usize, usize, f64)> },
}

/// Square operator on the active dofs, with the metadata needed to reproduce it.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub entries: Entries,
    pub weight: WeightKind<f64>,
    pub boundary: BoundaryTag,
    pub label: String,
    pub restriction: Option<Arc<DomainRestriction>>,
}

impl OperatorMatrix {
    pub fn dof(&self) -> usize {
        match &self.entries {
            Entries::Dense(m) => m.nrows(),
            Entries::DenseComplex(m) => m.nrows(),
            Entries::Sparse { n, .. } => *n,
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self.entries, Entries::DenseComplex(_))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        match &self.entries {
            Entries::Dense(m) => m.clone(),
            Entries::DenseComplex(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re),
            Entries::Sparse { n, triplets } => {
                let mut m = Mat::zeros(*n, *n);
                for &(i, j, v) in triplets {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }

    pub fn to_complex(&self) -> Mat<C64> {
        match &self.entries {
            Entries::DenseComplex(m) => m.clone(),
            _ => {
                let d = self.to_dense();
                Mat::from_fn(d.nrows(), d.ncols(), |i, j| C64::new(d[(i, j)], 0.0))
            }
        }
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dof();
        let mut y = vec![0.0; n];
        match &self.entries {
            Entries::Dense(m) => {
                for j in 0..n {
                    let xj = x[j];
                    if xj == 0.0 {
                        continue;
                    }
                    let col = m.col(j);
                    for i in 0..n {
                        y[i] += col[i] * xj;
                    }
                }
            }
            Entries::Sparse { triplets, .. } => {
                for &(i, j, v) in triplets {
                    y[i] += v * x[j];
                }
            }
            Entries::DenseComplex(m) => {
                for j in 0..n {
                    for i in 0..n {
                        y[i] += m[(i, j)].re * x[j];
                    }
                }
            }
        }
        y
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dof();
        match &self.entries {
            Entries::DenseComplex(m) => {
                let mut y = vec![C64::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        y[i] += m[(i, j)] * x[j];
                    }
                }
                y
            }
            _ => {
                let re: Vec<f64> = x.iter().map(|z| z.re).collect();
                let im: Vec<f64> = x.iter().map(|z| z.im).collect();
                let a = self.apply_real(&re);
                let b = self.apply_real(&im);
                a.into_iter().zip(b).map(|(r, i)| C64::new(r, i)).collect()
            }
        }
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        match &self.entries {
            Entries::Sparse { triplets, .. } => {
                let mut m = std::collections::HashMap::new();
                for &(i, j, v) in triplets {
                    *m.entry((i, j)).or_insert(0.0) += v;
                }
                m.values().map(|v: &f64| v * v).sum::<f64>().sqrt()
            }
            Entries::Dense(m) => m.norm_l2(),
            Entries::DenseComplex(m) => m.norm_l2(),
        }
    }

    /// Frobenius norm of `A + A^T`.
    pub fn symmetric_part_norm(&self) -> f64 {
        match &self.entries {
            Entries::Sparse { triplets, .. } => {
                let mut m = std::collections::HashMap::new();
                for &(i, j, v) in triplets {
                    *m.entry((i, j)).or_insert(0.0) += v;
                    *m.entry((j, i)).or_insert(0.0) += v;
                }
                m.values().map(|v: &f64| v * v).sum::<f64>().sqrt()
            }
            _ => {
                let d = self.to_dense();
                (&d + d.transpose()).norm_l2()
            }
        }
    }

    /// Sub-block on the given row and column dofs.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Mat<f64> {
        let d = self.to_dense();
        Mat::from_fn(rows.len(), cols.len(), |a, b| d[(rows[a], cols[b])])
    }

    pub fn with_entries(&self, entries: Entries, label: impl Into<String>) -> Self {
        Self { entries, label: label.into(), ..self.clone() }
    }

    /// Triplet text `row,col,re,im`, skipping exact zeros.
    pub fn write_triplets(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "row,col,re,im")?;
        match &self.entries {
            Entries::Sparse { triplets, .. } => {
                let mut t = triplets.clone();
                t.sort_by_key(|&(i, j, _)| (i, j));
                let mut acc: Vec<(usize, usize, f64)> = Vec::new();
                for (i, j, v) in t {
                    match acc.last_mut() {
                        Some(last) if last.0 == i && last.1 == j => last.2 += v,
                        _ => acc.push((i, j, v)),
                    }
                }
                for (i, j, v) in acc {
                    if v != 0.0 {
                        writeln!(out, "{i},{j},{v:?},0.0")?;
                    }
                }
            }
            Entries::Dense(m) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            writeln!(out, "{i},{j},{v:?},0.0")?;
                        }
                    }
                }
            }
            Entries::DenseComplex(m) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let v = m[(i, j)];
                        if v != C64::new(0.0, 0.0) {
                            writeln!(out, "{i},{j},{:?},{:?}", v.re, v.im)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Read a triplet export back into a dense complex matrix of size `n`.
pub fn read_triplets(text: &str, n: usize) -> Result<Mat<C64>> {
    let mut m = Mat::zeros(n, n);
    for line in text.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = line.split(',').collect();
        if p.len() != 4 {
            return Err(Error::Format(format!("bad triplet line {line:?}")));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{e}")));
        let i: usize = p[0].trim().parse().map_err(|e| Error::Format(format!("{e}")))?;
        let j: usize = p[1].trim().parse().map_err(|e| Error::Format(format!("{e}")))?;
        m[(i, j)] = C64::new(parse(p[2])?, parse(p[3])?);
    }
    Ok(m)
}

fn label(kind: &str, grid: &Grid, extra: &str) -> String {
    format!("{kind}[{}:L={:?}:n={}{}]", grid.kind().as_str(), grid.half_width(), grid.n(), extra)
}

/// `T omega = -div(U omega)` in conservative centered form.
pub fn assemble_transport(u: &crate::Vector, restriction: &Arc<DomainRestriction>) -> Result<OperatorMatrix> {
    let g = *restriction.grid();
    if u.grid() != &g {
        return Err(Error::ShapeMismatch("velocity grid differs from the restriction grid".into()));
    }
    let inv2h = 1.0 / (2.0 * g.h());
    let mut triplets = Vec::with_capacity(4 * restriction.dof());
    for (d, &k) in restriction.nodes().iter().enumerate() {
        let (i, j) = g.ij(k);
        let nbrs = [
            (g.idx(i + 1, j), -inv2h, &u.v1),
            (g.idx(i - 1, j), inv2h, &u.v1),
            (g.idx(i, j + 1), -inv2h, &u.v2),
            (g.idx(i, j - 1), inv2h, &u.v2),
        ];
        for (q, s, comp) in nbrs {
            if let Some(e) = restriction.dof_of(q) {
                let v = s * comp.values()[q];
                if v != 0.0 {
                    triplets.push((d, e, v));
                }
            }
        }
    }
    Ok(OperatorMatrix {
        entries: Entries::Sparse { n: restriction.dof(), triplets },
        weight: WeightKind::Unweighted,
        boundary: BoundaryTag::Dirichlet,
        label: label("T", &g, ""),
        restriction: Some(restriction.clone()),
    })
}

/// Which Biot-Savart law closes the perturbation term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsKind {
    Half,
    Whole,
}

/// Velocity `K[omega]` at an interior node from a streamfunction, centered differences.
#[inline]
fn k_at(psi: &[f64], g: &Grid, k: usize) -> (f64, f64) {
    let nx = g.nx();
    let inv2h = 1.0 / (2.0 * g.h());
    ((psi[k + nx] - psi[k - nx]) * inv2h, -(psi[k + 1] - psi[k - 1]) * inv2h)
}

fn check_bs(kind: BsKind, g: &Grid, solver: &PoissonSolver<f64>) -> Result<()> {
    let want = match kind {
        BsKind::Half => DomainKind::Half,
        BsKind::Whole => DomainKind::Whole,
    };
    if g.kind() != want || solver.grid() != g {
        return Err(Error::ShapeMismatch("Biot-Savart kind, grid and solver disagree".into()));
    }
    Ok(())
}

/// Dofs whose row of `S` can be nonzero.
fn gradient_rows(grad_omega: &crate::Vector, restriction: &DomainRestriction) -> Vec<usize> {
    (0..restriction.dof())
        .filter(|&d| {
            let k = restriction.node(d);
            grad_omega.v1.values()[k] != 0.0 || grad_omega.v2.values()[k] != 0.0
        })
        .collect()
}

/// `S omega = -K[omega] . grad Omega`, assembled column by column from Poisson solves.
pub fn assemble_perturbation(
    grad_omega: &crate::Vector,
    restriction: &Arc<DomainRestriction>,
    bs: BsKind,
    solver: &PoissonSolver<f64>,
) -> Result<OperatorMatrix> {
    let g = *restriction.grid();
    check_bs(bs, &g, solver)?;
    let n = restriction.dof();
    let rows = gradient_rows(grad_omega, restriction);
    let (nx, ny) = (g.nx(), g.ny());
    let (mx, my) = (nx - 2, ny - 2);
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let (i, j) = g.ij(restriction.node(c));
            let mut buf = vec![0.0; mx * my];
            buf[(j - 1) * mx + (i - 1)] = 1.0;
            solver.solve_interior(&mut buf);
            let mut psi = vec![0.0; nx * ny];
            for jj in 0..my {
                psi[(jj + 1) * nx + 1..(jj + 1) * nx + 1 + mx].copy_from_slice(&buf[jj * mx..(jj + 1) * mx]);
            }
            rows.iter()
                .map(|&r| {
                    let k = restriction.node(r);
                    let (k1, k2) = k_at(&psi, &g, k);
                    -(k1 * grad_omega.v1.values()[k] + k2 * grad_omega.v2.values()[k])
                })
                .collect()
        })
        .collect();
    let mut m = Mat::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (a, &r) in rows.iter().enumerate() {
            m[(r, c)] = col[a];
        }
    }
    Ok(OperatorMatrix {
        entries: Entries::Dense(m),
        weight: WeightKind::Unweighted,
        boundary: match bs {
            BsKind::Half => BoundaryTag::PerfectSlip,
            BsKind::Whole => BoundaryTag::Dirichlet,
        },
        label: label("S", &g, ""),
        restriction: Some(restriction.clone()),
    })
}

/// Direct evaluation of `-K[omega] . grad Omega` on the dofs, without a matrix.
pub fn perturbation_action(
    grad_omega: &crate::Vector,
    restriction: &DomainRestriction,
    solver: &PoissonSolver<f64>,
    omega: &[f64],
) -> Vec<f64> {
    let g = *restriction.grid();
    let field = restriction.scatter(omega);
    let psi = solver.solve_real(&field);
    (0..restriction.dof())
        .map(|d| {
            let k = restriction.node(d);
            let (gx, gy) = (grad_omega.v1.values()[k], grad_omega.v2.values()[k]);
            if gx == 0.0 && gy == 0.0 {
                return 0.0;
            }
            let (k1, k2) = k_at(psi.values(), &g, k);
            -(k1 * gx + k2 * gy)
        })
        .collect()
}

fn dense_sum(a: &OperatorMatrix, b: &OperatorMatrix) -> Mat<f64> {
    let mut m = a.to_dense();
    match &b.entries {
        Entries::Sparse { triplets, .. } => {
            for &(i, j, v) in triplets {
                m[(i, j)] += v;
            }
        }
        _ => m += b.to_dense(),
    }
    m
}

/// `Lambda = T + S` for a base state on the grid of the restriction.
pub fn assemble_linearized(
    base: &BaseFields<f64>,
    restriction: &Arc<DomainRestriction>,
    bs: BsKind,
    solver: &PoissonSolver<f64>,
) -> Result<OperatorMatrix> {
    if !restriction.covers_support(&base.omega) {
        return Err(Error::RestrictionTooSmall("mask must contain the vorticity support and one stencil around it".into()));
    }
    let t = assemble_transport(&base.u, restriction)?;
    let s = assemble_perturbation(&base.grad_omega, restriction, bs, solver)?;
    let m = dense_sum(&s, &t);
    Ok(OperatorMatrix {
        entries: Entries::Dense(m),
        weight: WeightKind::Unweighted,
        boundary: s.boundary,
        label: label("Lambda", restriction.grid(), ""),
        restriction: Some(restriction.clone()),
    })
}

/// `Lambda_E` on the half plane with the image Biot-Savart law.
pub fn assemble_lambda_e(
    base: &BaseFields<f64>,
    restriction: &Arc<DomainRestriction>,
    solver: &PoissonSolver<f64>,
) -> Result<OperatorMatrix> {
    let mut op = assemble_linearized(base, restriction, BsKind::Half, solver)?;
    op.label = label("LambdaE", restriction.grid(), "");
    Ok(op)
}

/// Mirrored operator with its lobe splitting.
#[derive(Clone, Debug)]
pub struct LambdaER {
    pub full: OperatorMatrix,
    pub plus: OperatorMatrix,
    pub minus: OperatorMatrix,
    pub remainder: OperatorMatrix,
    /// Dofs in the upper lobe (`xi_2 > 0`).
    pub upper: Vec<usize>,
    /// Dofs in the lower lobe.
    pub lower: Vec<usize>,
    pub r: f64,
}

pub fn assemble_lambda_er(
    flow: &MirroredFlow<f64>,
    restriction: &Arc<DomainRestriction>,
    solver: &PoissonSolver<f64>,
) -> Result<LambdaER> {
    let g = *restriction.grid();
    if !(flow.r > flow.r0) {
        return Err(Error::LobesOverlap { r: flow.r, r0: flow.r0 });
    }
    let full = assemble_linearized(&flow.whole, restriction, BsKind::Whole, solver)?;
    let n = restriction.dof();
    let side: Vec<bool> = (0..n).map(|d| g.xy(restriction.node(d)).1 > 0.0).collect();
    let upper: Vec<usize> = (0..n).filter(|&d| side[d]).collect();
    let lower: Vec<usize> = (0..n).filter(|&d| !side[d]).collect();
    let a = full.to_dense();
    let pick = |keep: &dyn Fn(bool, bool) -> bool| Mat::from_fn(n, n, |i, j| if keep(side[i], side[j]) { a[(i, j)] } else { 0.0 });
    let plus = pick(&|ri, cj| ri && cj);
    let minus = pick(&|ri, cj| !ri && !cj);
    let rem = pick(&|ri, cj| ri != cj);
    let tag = format!(":R={:?}", flow.r);
    let mk = |m: Mat<f64>, name: &str| OperatorMatrix {
        entries: Entries::Dense(m),
        weight: WeightKind::Unweighted,
        boundary: BoundaryTag::Dirichlet,
        label: label(name, &g, &tag),
        restriction: Some(restriction.clone()),
    };
    let full = mk(a.clone(), "LambdaER");
    let (plus, minus, remainder) = (mk(plus, "LambdaER+"), mk(minus, "LambdaER-"), mk(rem, "LambdaER~"));
    Ok(LambdaER { full, plus, minus, remainder, upper, lower, r: flow.r })
}

impl LambdaER {
    /// Restriction to odd fields, represented by their upper-lobe values:
    /// `A_odd[u, v] = A[u, v] - A[u, mirror(v)]`.
    pub fn odd_reduction(&self) -> Result<Mat<f64>> {
        let restriction = self.full.restriction.as_ref().expect("restriction");
        let a = self.full.to_dense();
        let mirror: Vec<usize> = self
            .upper
            .iter()
            .map(|&d| restriction.mirror_dof(d).ok_or_else(|| Error::RestrictionTooSmall("mask is not mirror symmetric".into())))
            .collect::<Result<_>>()?;
        let nu = self.upper.len();
        Ok(Mat::from_fn(nu, nu, |a_, b_| a[(self.upper[a_], self.upper[b_])] - a[(self.upper[a_], mirror[b_])]))
    }

    /// Upper-lobe block of the plus part.
    pub fn plus_block(&self) -> Mat<f64> {
        self.plus.block(&self.upper, &self.upper)
    }

    pub fn minus_block(&self) -> Mat<f64> {
        self.minus.block(&self.lower, &self.lower)
    }
}

/// Flux-form `H = rho^-2 div(rho^2 grad .) + 1 = Delta + xi/2 . grad + 1`.
fn drift_weight(weight: &WeightKind<f64>) -> WeightKind<f64> {
    match weight {
        WeightKind::Unweighted => WeightKind::gaussian(),
        w => *w,
    }
}

/// Stencil coefficients of `H` at node `(i, j)`: neighbour offsets and weights.
fn h_stencil(g: &Grid, w: &WeightKind<f64>, i: usize, j: usize) -> [((usize, usize), f64); 4] {
    let (x, y) = (g.x(i), g.y(j));
    let h = g.h();
    let inv = 1.0 / (h * h);
    let c = |dx: f64, dy: f64| w.weight_sq_ratio((x + 0.5 * dx * h, y + 0.5 * dy * h), (x, y)) * inv;
    [
        ((i + 1, j), c(1.0, 0.0)),
        ((i - 1, j), c(-1.0, 0.0)),
        ((i, j + 1), c(0.0, 1.0)),
        ((i, j - 1), c(0.0, -1.0)),
    ]
}

/// Sparse `H` on the active dofs.
pub fn assemble_viscous(restriction: &Arc<DomainRestriction>, weight: WeightKind<f64>) -> OperatorMatrix {
    let g = *restriction.grid();
    let w = drift_weight(&weight);
    let mut triplets = Vec::with_capacity(5 * restriction.dof());
    for (d, &k) in restriction.nodes().iter().enumerate() {
        let (i, j) = g.ij(k);
        let mut diag = 1.0;
        for ((a, b), c) in h_stencil(&g, &w, i, j) {
            diag -= c;
            if let Some(e) = restriction.dof_of(g.idx(a, b)) {
                triplets.push((d, e, c));
            }
        }
        triplets.push((d, d, diag));
    }
    OperatorMatrix {
        entries: Entries::Sparse { n: restriction.dof(), triplets },
        weight,
        boundary: BoundaryTag::Dirichlet,
        label: label("H", &g, ""),
        restriction: Some(restriction.clone()),
    }
}

/// `M_alpha = H / alpha + Lambda_E`, returned with `H`.
pub fn assemble_m_alpha(
    lambda_e: &OperatorMatrix,
    alpha: f64,
    weight: WeightKind<f64>,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be at least 1, got {alpha}")));
    }
    let restriction = lambda_e.restriction.clone().ok_or_else(|| Error::InvalidArgument("operator without restriction".into()))?;
    for &k in restriction.nodes() {
        let (x, y) = restriction.grid().xy(k);
        if !drift_weight(&weight).weight_sq(x, y).is_finite() {
            return Err(Error::WeightOverflow);
        }
    }
    let h = assemble_viscous(&restriction, weight);
    let mut m = lambda_e.to_dense();
    if let Entries::Sparse { triplets, .. } = &h.entries {
        for &(i, j, v) in triplets {
            m[(i, j)] += v / alpha;
        }
    }
    let op = OperatorMatrix {
        entries: Entries::Dense(m),
        weight,
        boundary: lambda_e.boundary,
        label: format!("{}+H/alpha[alpha={alpha:?}]", lambda_e.label),
        restriction: Some(restriction),
    };
    Ok((op, h))
}

/// `diag(rho) H diag(rho)^-1`, the conjugated viscous block.
pub fn conjugated_viscous(h: &OperatorMatrix) -> Mat<f64> {
    let restriction = h.restriction.as_ref().expect("restriction");
    let w = drift_weight(&h.weight);
    let g = restriction.grid();
    let lw: Vec<f64> = restriction.nodes().iter().map(|&k| {
        let (x, y) = g.xy(k);
        w.log_weight(x, y)
    }).collect();
    let d = h.to_dense();
    Mat::from_fn(d.nrows(), d.ncols(), |i, j| d[(i, j)] * (lw[i] - lw[j]).exp())
}

/// Matrix-free `H w` on the whole interior of `w`'s grid (Dirichlet on the edges).
pub fn apply_viscous(w: &crate::Field, weight: &WeightKind<f64>) -> crate::Field {
    let g = *w.grid();
    let wt = drift_weight(weight);
    let mut out = ScalarField::zeros(g);
    for j in 1..g.ny() - 1 {
        for i in 1..g.nx() - 1 {
            let mut acc = w.at(i, j);
            for ((a, b), c) in h_stencil(&g, &wt, i, j) {
                let nb = if g.is_edge(a, b) { 0.0 } else { w.at(a, b) };
                acc += c * (nb - w.at(i, j));
            }
            out.set(i, j, acc);
        }
    }
    out
}

/// Terms of the harmonic-oscillator lower bound for one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicBound {
    /// `Re <-H w, w>_rho`.
    pub form: f64,
    pub grad_sq: f64,
    pub xi_sq: f64,
    pub norm_sq: f64,
}

impl HarmonicBound {
    /// `||grad w||^2/8 + ||xi w||^2/128 + 3 ||w||^2/16`.
    pub fn rhs(&self) -> f64 {
        self.grad_sq / 8.0 + self.xi_sq / 128.0 + 3.0 * self.norm_sq / 16.0
    }

    /// Whether `form >= (1 - slack) rhs`.
    pub fn holds(&self, slack: f64) -> bool {
        self.form >= (1.0 - slack) * self.rhs()
    }
}

pub fn harmonic_bound(w: &crate::Field, weight: &WeightKind<f64>) -> Result<HarmonicBound> {
    let g = *w.grid();
    let hw = apply_viscous(w, weight).scale(-1.0);
    let form = hw.inner(w, weight)?.0;
    let gr = crate::fields::grad(w);
    let grad_sq = gr.v1.norm(weight)?.powi(2) + gr.v2.norm(weight)?.powi(2);
    let xw = ScalarField::from_vec(g, (0..g.len()).map(|k| {
        let (x, y) = g.xy(k);
        (x * x + y * y).sqrt() * w.values()[k]
    }).collect())?;
    Ok(HarmonicBound { form, grad_sq, xi_sq: xw.norm(weight)?.powi(2), norm_sq: w.norm(weight)?.powi(2) })
}

/// Radial grid `r_j = j dr`, `j = 1..=n`, `dr = r_max / (n + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn dr(&self) -> f64 {
        self.r_max / (self.n + 1) as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.dr()
    }
}

/// Solve `phi'' + phi'/r - m^2 phi / r^2 = -w` with `phi = 0` at both ends (tridiagonal).
pub fn radial_poisson(grid: &RadialGrid, m: usize, w: &[C64]) -> Vec<C64> {
    let n = grid.n;
    let dr = grid.dr();
    let m2 = (m * m) as f64;
    let mut lo = vec![0.0; n];
    let mut di = vec![0.0; n];
    let mut up = vec![0.0; n];
    for j in 0..n {
        let r = grid.r(j);
        di[j] = -2.0 / (dr * dr) - m2 / (r * r);
        lo[j] = 1.0 / (dr * dr) - 1.0 / (2.0 * dr * r);
        up[j] = 1.0 / (dr * dr) + 1.0 / (2.0 * dr * r);
    }
    let mut c = vec![0.0; n];
    let mut d: Vec<C64> = w.iter().map(|&v| -v).collect();
    c[0] = up[0] / di[0];
    d[0] /= di[0];
    for j in 1..n {
        let den = di[j] - lo[j] * c[j - 1];
        c[j] = up[j] / den;
        let prev = d[j - 1];
        d[j] = (d[j] - prev * lo[j]) / den;
    }
    for j in (0..n - 1).rev() {
        let next = d[j + 1];
        d[j] -= next * c[j];
    }
    d
}

/// `(Lambda w)(r) = -i m zeta w - i m omega_bar' phi_w / r` on mode-`m` fields.
pub fn assemble_radial_mode(profile: &RadialProfile<f64>, m: usize, grid: RadialGrid) -> Result<OperatorMatrix> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("azimuthal mode must be at least 2, got {m}")));
    }
    let n = grid.n;
    let im = C64::new(0.0, m as f64);
    let mut a = Mat::<C64>::zeros(n, n);
    let cols: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[c] = C64::new(1.0, 0.0);
            radial_poisson(&grid, m, &e)
        })
        .collect();
    for (c, phi) in cols.iter().enumerate() {
        for i in 0..n {
            let r = grid.r(i);
            a[(i, c)] = -im * profile.omega_bar_prime(r) / r * phi[i];
        }
        a[(c, c)] += -im * profile.zeta(grid.r(c));
    }
    Ok(OperatorMatrix {
        entries: Entries::DenseComplex(a),
        weight: WeightKind::Unweighted,
        boundary: BoundaryTag::Radial,
        label: format!("RadialMode[m={m}:rmax={:?}:n={n}]", grid.r_max),
        restriction: None,
    })
}
