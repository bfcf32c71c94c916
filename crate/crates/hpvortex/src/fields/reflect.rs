use super::field::{ScalarField, VectorField};
use super::grid::DomainKind;
use crate::error::{Error, Result};
use crate::scalar::{FieldValue, Real};

fn extend<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, odd: bool) -> Result<ScalarField<T, V>> {
    let g = f.grid();
    if g.kind() != DomainKind::Half {
        return Err(Error::ShapeMismatch("extension expects a half-plane field".into()));
    }
    let w = g.to_whole();
    let c = w.center();
    let mut out = ScalarField::zeros(w);
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let v = f.at(i, j);
            out.set(i, c + j, v);
            if j > 0 {
                out.set(i, c - j, if odd { -v } else { v });
            }
        }
    }
    Ok(out)
}

/// `f~(x1, x2) = -f(x1, -x2)` for `x2 < 0`.
pub fn odd_extend<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, tol: T) -> Result<ScalarField<T, V>> {
    let trace = f.wall_max_abs();
    if trace > tol {
        return Err(Error::NonzeroTrace(trace.as_f64()));
    }
    extend(f, true)
}

pub fn even_extend<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>) -> Result<ScalarField<T, V>> {
    extend(f, false)
}

/// Even first component, odd second: the reflection of a tangent velocity.
pub fn reflect_velocity<T: Real, V: FieldValue<T>>(v: &VectorField<T, V>, tol: T) -> Result<VectorField<T, V>> {
    VectorField::new(even_extend(&v.v1)?, odd_extend(&v.v2, tol)?)
}

pub fn restrict_half<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>) -> Result<ScalarField<T, V>> {
    let g = f.grid();
    if g.kind() != DomainKind::Whole {
        return Err(Error::ShapeMismatch("restriction expects a whole-plane field".into()));
    }
    let hgrid = g.to_half();
    let c = g.center();
    let mut out = ScalarField::zeros(hgrid);
    for j in 0..hgrid.ny() {
        for i in 0..hgrid.nx() {
            out.set(i, j, f.at(i, c + j));
        }
    }
    Ok(out)
}

pub fn restrict_half_vector<T: Real, V: FieldValue<T>>(v: &VectorField<T, V>) -> Result<VectorField<T, V>> {
    VectorField::new(restrict_half(&v.v1)?, restrict_half(&v.v2)?)
}

/// Largest `|f(x1, x2) + sign * f(x1, -x2)|` over mirrored node pairs of a whole grid.
pub fn mirror_defect<T: Real, V: FieldValue<T>>(f: &ScalarField<T, V>, odd: bool) -> T {
    let g = f.grid();
    let c = g.center();
    let mut m = T::zero();
    for j in 0..=c {
        for i in 0..g.nx() {
            let a = f.at(i, c + j);
            let b = f.at(i, c - j);
            let d = if odd { a + b } else { a - b };
            m = m.max(d.modulus());
        }
    }
    m
}
