//! Dirichlet Poisson solvers and Biot-Savart reconstruction.

pub mod biot_savart;
pub mod dst;
pub mod poisson;

pub use biot_savart::{
    biot_savart_half, biot_savart_whole, check_bs_inequalities, velocity_from_streamfunction,
    wall_tangential_trace, BsRatios,
};
pub use poisson::{PoissonSolveReport, PoissonSolver, SolverKind};
