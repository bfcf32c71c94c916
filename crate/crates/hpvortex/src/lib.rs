//! Numerical laboratory for half-plane vortex instability: Biot-Savart on the
//! half plane, linearized Euler and viscous operators around a vortex near a
//! wall, spectra under mirroring and vanishing viscosity, the boundary-layer
//! corrector, and a self-similar nonlinear simulator.

pub mod baseflow;
pub mod blayer;
pub mod error;
pub mod fields;
pub mod greens;
pub mod operators;
pub mod scalar;
pub mod simulate;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::{FieldValue, Real};

pub type C64 = num_complex::Complex<f64>;
pub type Grid = fields::Grid2D<f64>;
pub type Field = fields::ScalarField<f64>;
pub type CField = fields::ScalarField<f64, C64>;
pub type Vector = fields::VectorField<f64>;
pub type Profile = baseflow::RadialProfile<f64>;
pub type Flow = baseflow::MirroredFlow<f64>;
pub type Base = baseflow::BaseFields<f64>;
pub type Poisson = greens::PoissonSolver<f64>;
