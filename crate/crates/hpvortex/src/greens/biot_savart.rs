use super::poisson::{PoissonSolveReport, PoissonSolver};
use crate::error::{Error, Result};
use crate::fields::calculus::{partial, Axis};
use crate::fields::{DomainKind, ScalarField, VectorField};
use crate::scalar::{FieldValue, Real};

/// `(d2 psi, -d1 psi)`. On a half-plane grid the wall row uses the odd ghost
/// `psi(x1, -h) = -psi(x1, h)`, i.e. the image of the streamfunction.
pub fn velocity_from_streamfunction<T: Real, V: FieldValue<T>>(psi: &ScalarField<T, V>) -> VectorField<T, V> {
    let mut v1 = partial(psi, Axis::Y);
    let v2 = partial(psi, Axis::X).map(|v| -v);
    let g = *psi.grid();
    if g.kind() == DomainKind::Half {
        let inv2h = T::one() / (g.h() + g.h());
        for i in 0..g.nx() {
            let up = psi.at(i, 1);
            let ghost = -up;
            v1.set(i, 0, (up - ghost) * inv2h);
        }
    }
    VectorField { v1, v2 }
}

/// `K[omega] = grad_perp (-Delta_D)^{-1} omega` on the half plane.
pub fn biot_savart_half<T: Real, V: FieldValue<T>>(
    omega: &ScalarField<T, V>,
    solver: &PoissonSolver<T>,
) -> Result<(VectorField<T, V>, PoissonSolveReport<T>)> {
    if omega.grid().kind() != DomainKind::Half {
        return Err(Error::ShapeMismatch("half-plane Biot-Savart needs a half grid".into()));
    }
    let (psi, rep) = solver.solve_dirichlet(omega)?;
    Ok((velocity_from_streamfunction(&psi), rep))
}

/// Whole-box Biot-Savart with Dirichlet truncation on the box edges.
pub fn biot_savart_whole<T: Real, V: FieldValue<T>>(
    omega: &ScalarField<T, V>,
    solver: &PoissonSolver<T>,
) -> Result<(VectorField<T, V>, PoissonSolveReport<T>)> {
    if omega.grid().kind() != DomainKind::Whole {
        return Err(Error::ShapeMismatch("whole-plane Biot-Savart needs a whole grid".into()));
    }
    let (psi, rep) = solver.solve_dirichlet(omega)?;
    Ok((velocity_from_streamfunction(&psi), rep))
}

/// Tangential velocity `d2 psi` on the wall by the one-sided second-order stencil.
pub fn wall_tangential_trace<T: Real, V: FieldValue<T>>(psi: &ScalarField<T, V>) -> Vec<V> {
    let g = psi.grid();
    let j0 = g.wall_row();
    let inv2h = T::one() / (g.h() + g.h());
    (0..g.nx())
        .map(|i| {
            (psi.at(i, j0 + 1) * T::lit(4.0) - psi.at(i, j0) * T::lit(3.0) - psi.at(i, j0 + 2)) * inv2h
        })
        .collect()
}

/// Measured ratios of the half-plane Biot-Savart estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsRatios<T> {
    /// `||K|| / ||xi_2 omega||`.
    pub r1: T,
    /// `||grad K|| / ||omega||`; the sharp constant is one.
    pub r2: T,
    /// `||K_1 on the wall|| / ||<xi_2> omega||`.
    pub r3: T,
    /// False when `omega = 0` and the ratios are NaN.
    pub defined: bool,
}

pub fn check_bs_inequalities<T: Real>(omega: &ScalarField<T, T>, solver: &PoissonSolver<T>) -> Result<BsRatios<T>> {
    let g = *omega.grid();
    let nw = omega.l2();
    if nw == T::zero() {
        return Ok(BsRatios { r1: T::nan(), r2: T::nan(), r3: T::nan(), defined: false });
    }
    let (psi, _) = solver.solve_dirichlet(omega)?;
    let k = velocity_from_streamfunction(&psi);
    let xi2w = ScalarField::from_vec(
        g,
        omega.values().iter().enumerate().map(|(n, &v)| g.xy(n).1 * v).collect(),
    )?;
    let jw = ScalarField::from_vec(
        g,
        omega
            .values()
            .iter()
            .enumerate()
            .map(|(n, &v)| (T::one() + g.xy(n).1 * g.xy(n).1).sqrt() * v)
            .collect(),
    )?;
    let mut grad_sq = T::zero();
    for c in [&k.v1, &k.v2] {
        for ax in [Axis::X, Axis::Y] {
            let d = partial(c, ax).l2();
            grad_sq += d * d;
        }
    }
    let trace = wall_tangential_trace(&psi);
    let tr = (trace.iter().fold(T::zero(), |a, &v| a + v * v) * g.h()).sqrt();
    Ok(BsRatios { r1: k.l2() / xi2w.l2(), r2: grad_sq.sqrt() / nw, r3: tr / jw.l2(), defined: true })
}
