use crate::error::{Error, Result};
use crate::scalar::Real;

/// Which box the grid discretizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// `[-L, L] x [0, L]`, wall at the first row.
    Half,
    /// `[-L, L]^2`.
    Whole,
}

impl DomainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainKind::Half => "half",
            DomainKind::Whole => "whole",
        }
    }
}

/// Uniform node grid. Values are stored row-major: row `j` runs along `xi_1`
/// at height `y(j)`, so node `(i, j)` sits at index `j * nx + i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<T> {
    kind: DomainKind,
    l: T,
    n: usize,
    h: T,
}

pub const MIN_NODES: usize = 17;

pub fn make_grid<T: Real>(kind: DomainKind, l: T, n: usize) -> Result<Grid2D<T>> {
    Grid2D::new(kind, l, n)
}

impl<T: Real> Grid2D<T> {
    pub fn new(kind: DomainKind, l: T, n: usize) -> Result<Self> {
        if !(l > T::zero()) || !l.is_finite() {
            return Err(Error::NonPositiveLength(l.as_f64()));
        }
        if n % 2 == 0 {
            return Err(Error::EvenNodeCount(n));
        }
        if n < MIN_NODES {
            return Err(Error::TooFewNodes(n));
        }
        let h = (l + l) / T::of_usize(n - 1);
        Ok(Self { kind, l, n, h })
    }

    /// Grid whose spacing is as close as possible to `h` with odd node count.
    pub fn with_spacing(kind: DomainKind, l: T, h: T) -> Result<Self> {
        let cells = ((l + l) / h).round().to_usize().unwrap_or(0).max(2);
        let cells = if cells % 2 == 1 { cells + 1 } else { cells };
        Self::new(kind, l, cells + 1)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn half_width(&self) -> T {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.n
    }

    pub fn ny(&self) -> usize {
        match self.kind {
            DomainKind::Half => (self.n + 1) / 2,
            DomainKind::Whole => self.n,
        }
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the node on `xi = 0` along each axis of a whole grid.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn x(&self, i: usize) -> T {
        (T::of_usize(i) - T::of_usize(self.center())) * self.h
    }

    pub fn y(&self, j: usize) -> T {
        match self.kind {
            DomainKind::Half => T::of_usize(j) * self.h,
            DomainKind::Whole => (T::of_usize(j) - T::of_usize(self.center())) * self.h,
        }
    }

    pub fn xy(&self, k: usize) -> (T, T) {
        let (i, j) = self.ij(k);
        (self.x(i), self.y(j))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx(), k / self.nx())
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx() || j + 1 == self.ny()
    }

    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        !self.is_edge(i, j)
    }

    /// Row index of the line `xi_2 = 0`.
    pub fn wall_row(&self) -> usize {
        match self.kind {
            DomainKind::Half => 0,
            DomainKind::Whole => self.center(),
        }
    }

    /// Node index nearest to a point, clamped to the box.
    pub fn nearest(&self, x: T, y: T) -> (usize, usize) {
        let fi = (x / self.h).round() + T::of_usize(self.center());
        let fj = match self.kind {
            DomainKind::Half => (y / self.h).round(),
            DomainKind::Whole => (y / self.h).round() + T::of_usize(self.center()),
        };
        let clamp = |v: T, hi: usize| v.max(T::zero()).min(T::of_usize(hi - 1)).to_usize().unwrap_or(0);
        (clamp(fi, self.nx()), clamp(fj, self.ny()))
    }

    /// The whole-plane grid sharing `L` and `n`.
    pub fn to_whole(&self) -> Self {
        Self { kind: DomainKind::Whole, ..*self }
    }

    /// The half-plane grid sharing `L` and `n`.
    pub fn to_half(&self) -> Self {
        Self { kind: DomainKind::Half, ..*self }
    }
}
