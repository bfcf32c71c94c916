//! Second-order finite differences: centered inside, one-sided on box edges.

use super::field::{ScalarField, VectorField};
use crate::error::Result;
use crate::scalar::{FieldValue, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// First derivative of samples `f(k)` for `k < m` at position `k`.
#[inline]
fn diff1<T: Real, V: FieldValue<T>>(f: impl Fn(usize) -> V, k: usize, m: usize, inv2h: T) -> V {
    if k == 0 {
        (f(1) * T::lit(4.0) - f(0) * T::lit(3.0) - f(2)) * inv2h
    } else if k + 1 == m {
        (f(k) * T::lit(3.0) - f(k - 1) * T::lit(4.0) + f(k - 2)) * inv2h
    } else {
        (f(k + 1) - f(k - 1)) * inv2h
    }
}

#[inline]
fn diff2<T: Real, V: FieldValue<T>>(f: impl Fn(usize) -> V, k: usize, m: usize, invh2: T) -> V {
    if k == 0 {
        (f(0) * T::lit(2.0) - f(1) * T::lit(5.0) + f(2) * T::lit(4.0) - f(3)) * invh2
    } else if k + 1 == m {
        (f(k) * T::lit(2.0) - f(k - 1) * T::lit(5.0) + f(k - 2) * T::lit(4.0) - f(k - 3)) * invh2
    } else {
        (f(k + 1) - f(k) * T::lit(2.0) + f(k - 1)) * invh2
    }
}

pub fn partial<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, axis: Axis) -> ScalarField<T, V> {
    let g = *f.grid();
    let inv2h = T::one() / (g.h() + g.h());
    let mut out = ScalarField::zeros(g);
    let (nx, ny) = (g.nx(), g.ny());
    let v = f.values();
    let o = out.values_mut();
    for j in 0..ny {
        for i in 0..nx {
            o[j * nx + i] = match axis {
                Axis::X => diff1(|a| v[j * nx + a], i, nx, inv2h),
                Axis::Y => diff1(|b| v[b * nx + i], j, ny, inv2h),
            };
        }
    }
    out
}

pub fn partial2<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, axis: Axis) -> ScalarField<T, V> {
    let g = *f.grid();
    let invh2 = T::one() / (g.h() * g.h());
    let mut out = ScalarField::zeros(g);
    let (nx, ny) = (g.nx(), g.ny());
    let v = f.values();
    let o = out.values_mut();
    for j in 0..ny {
        for i in 0..nx {
            o[j * nx + i] = match axis {
                Axis::X => diff2(|a| v[j * nx + a], i, nx, invh2),
                Axis::Y => diff2(|b| v[b * nx + i], j, ny, invh2),
            };
        }
    }
    out
}

pub fn grad<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>) -> VectorField<T, V> {
    VectorField { v1: partial(f, Axis::X), v2: partial(f, Axis::Y) }
}

/// `(d2 f, -d1 f)`.
pub fn grad_perp<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>) -> VectorField<T, V> {
    VectorField { v1: partial(f, Axis::Y), v2: partial(f, Axis::X).map(|v| -v) }
}

pub fn div<T: Real, V: FieldValue<T>>(v: &VectorField<T, V>) -> Result<ScalarField<T, V>> {
    partial(&v.v1, Axis::X).add(&partial(&v.v2, Axis::Y))
}

/// `d1 v2 - d2 v1`.
pub fn rot<T: Real, V: FieldValue<T>>(v: &VectorField<T, V>) -> Result<ScalarField<T, V>> {
    partial(&v.v2, Axis::X).sub(&partial(&v.v1, Axis::Y))
}

pub fn laplacian<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>) -> ScalarField<T, V> {
    let a = partial2(f, Axis::X);
    let b = partial2(f, Axis::Y);
    a.add(&b).expect("same grid")
}

/// Five-point `-Delta_h f` at interior nodes; zero on the edges.
pub fn neg_laplacian_interior<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>) -> ScalarField<T, V> {
    let g = *f.grid();
    let invh2 = T::one() / (g.h() * g.h());
    let (nx, ny) = (g.nx(), g.ny());
    let v = f.values();
    let mut out = ScalarField::zeros(g);
    let o = out.values_mut();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = j * nx + i;
            o[k] = (v[k] * T::lit(4.0) - v[k - 1] - v[k + 1] - v[k - nx] - v[k + nx]) * invh2;
        }
    }
    out
}
