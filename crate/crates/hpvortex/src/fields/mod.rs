//! Grids, node fields, finite differences, weights and the odd reflection.

pub mod calculus;
pub mod field;
pub mod grid;
pub mod io;
pub mod reflect;
pub mod weight;

pub use calculus::{div, grad, grad_perp, laplacian, partial, rot, Axis};
pub use field::{ScalarField, VectorField};
pub use grid::{make_grid, DomainKind, Grid2D};
pub use reflect::{even_extend, odd_extend, restrict_half};
pub use weight::WeightKind;
