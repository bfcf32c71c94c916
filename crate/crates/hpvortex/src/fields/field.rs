use num_complex::Complex;

use super::grid::Grid2D;
use super::weight::WeightKind;
use crate::error::{Error, Result};
use crate::scalar::{FieldValue, Real};

/// Node values on a grid; `V` is `T` or `Complex<T>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T: Real, V: FieldValue<T> = T> {
    grid: Grid2D<T>,
    values: Vec<V>,
}

/// Two components on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T: Real, V: FieldValue<T> = T> {
    pub v1: ScalarField<T, V>,
    pub v2: ScalarField<T, V>,
}

impl<T: Real, V: FieldValue<T>> ScalarField<T, V> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self { grid, values: vec![V::zero(); grid.len()] }
    }

    pub fn from_vec(grid: Grid2D<T>, values: Vec<V>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D<T>, mut f: impl FnMut(T, T) -> V) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [V] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<V> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> V {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: V) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    pub fn map<W: FieldValue<T>>(&self, f: impl Fn(V) -> W) -> ScalarField<T, W> {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(V, V) -> V) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| v * a)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite_value())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.modulus()))
    }

    /// Largest modulus on the line `xi_2 = 0`.
    pub fn wall_max_abs(&self) -> T {
        let j = self.grid.wall_row();
        (0..self.grid.nx()).fold(T::zero(), |m, i| m.max(self.at(i, j).modulus()))
    }

    /// Largest modulus on the outer box edges (excluding a half-plane wall).
    pub fn edge_max_abs(&self) -> T {
        let g = &self.grid;
        let mut m = T::zero();
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let wall = g.kind() == super::DomainKind::Half && j == 0;
                if g.is_edge(i, j) && !wall {
                    m = m.max(self.at(i, j).modulus());
                }
            }
        }
        m
    }

    /// Weighted discrete L2 norm `(sum w^2 |f|^2 h^2)^(1/2)`.
    pub fn norm(&self, w: &WeightKind<T>) -> Result<T> {
        let h2 = self.grid.h() * self.grid.h();
        let mut acc = T::zero();
        for (k, v) in self.values.iter().enumerate() {
            let a = v.abs2();
            if a == T::zero() {
                continue;
            }
            let (x, y) = self.grid.xy(k);
            let w2 = w.weight_sq(x, y);
            if !w2.is_finite() {
                return Err(Error::WeightOverflow);
            }
            acc += w2 * a;
        }
        let out = (acc * h2).sqrt();
        if !out.is_finite() {
            return Err(Error::WeightOverflow);
        }
        Ok(out)
    }

    pub fn l2(&self) -> T {
        self.norm(&WeightKind::Unweighted).unwrap_or(T::nan())
    }

    /// Weighted inner product `sum w^2 f conj(g) h^2`, returned as (re, im).
    pub fn inner(&self, other: &Self, w: &WeightKind<T>) -> Result<(T, T)> {
        self.check_same_grid(other)?;
        let h2 = self.grid.h() * self.grid.h();
        let (mut re, mut im) = (T::zero(), T::zero());
        for (k, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let (x, y) = self.grid.xy(k);
            let w2 = w.weight_sq(x, y);
            if !w2.is_finite() {
                return Err(Error::WeightOverflow);
            }
            let (ar, ai, br, bi) = (a.re(), a.im(), b.re(), b.im());
            re += w2 * (ar * br + ai * bi);
            im += w2 * (ai * br - ar * bi);
        }
        Ok((re * h2, im * h2))
    }
}

impl<T: Real> ScalarField<T, T> {
    pub fn to_complex(&self) -> ScalarField<T, Complex<T>>
    where
        Complex<T>: FieldValue<T>,
    {
        self.map(|v| Complex::new(v, T::zero()))
    }
}

impl<T: Real> ScalarField<T, Complex<T>>
where
    Complex<T>: FieldValue<T>,
{
    pub fn real_part(&self) -> ScalarField<T, T> {
        self.map(|v| v.re)
    }

    pub fn imag_part(&self) -> ScalarField<T, T> {
        self.map(|v| v.im)
    }
}

impl<T: Real, V: FieldValue<T>> VectorField<T, V> {
    pub fn new(v1: ScalarField<T, V>, v2: ScalarField<T, V>) -> Result<Self> {
        v1.check_same_grid(&v2)?;
        Ok(Self { v1, v2 })
    }

    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self { v1: ScalarField::zeros(grid), v2: ScalarField::zeros(grid) }
    }

    pub fn from_fn(grid: Grid2D<T>, f: impl Fn(T, T) -> (V, V)) -> Self {
        Self {
            v1: ScalarField::from_fn(grid, |x, y| f(x, y).0),
            v2: ScalarField::from_fn(grid, |x, y| f(x, y).1),
        }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.v1.grid()
    }

    pub fn norm(&self, w: &WeightKind<T>) -> Result<T> {
        let a = self.v1.norm(w)?;
        let b = self.v2.norm(w)?;
        Ok((a * a + b * b).sqrt())
    }

    pub fn l2(&self) -> T {
        self.norm(&WeightKind::Unweighted).unwrap_or(T::nan())
    }

    /// Largest pointwise speed.
    pub fn max_speed(&self) -> T {
        self.v1
            .values()
            .iter()
            .zip(self.v2.values())
            .fold(T::zero(), |m, (a, b)| m.max((a.abs2() + b.abs2()).sqrt()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self { v1: self.v1.sub(&other.v1)?, v2: self.v2.sub(&other.v2)? })
    }

    pub fn max_abs(&self) -> T {
        self.v1.max_abs().max(self.v2.max_abs())
    }
}
