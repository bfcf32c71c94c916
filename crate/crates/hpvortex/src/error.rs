use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node count {0} is even; an odd count keeps the axes on grid lines")]
    EvenNodeCount(usize),
    #[error("node count {0} is below the minimum of 17")]
    TooFewNodes(usize),
    #[error("box half-width must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("weight overflowed on this box; set a weight cap")]
    WeightOverflow,
    #[error("boundary trace {0:e} exceeds tolerance")]
    NonzeroTrace(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("solver failed: residual {residual:e} above tolerance {tol:e}")]
    SolverDivergence { residual: f64, tol: f64 },
    #[error("lobes overlap: R = {r} must exceed R0 = {r0}")]
    LobesOverlap { r: f64, r0: f64 },
    #[error("bad profile parameter: {0}")]
    BadProfileParameter(String),
    #[error("domain restriction too small: {0}")]
    RestrictionTooSmall(String),
    #[error("operator has {dof} unknowns, above the dense limit {limit}")]
    DenseLimitExceeded { dof: usize, limit: usize },
    #[error("eigensolver did not converge: {0}")]
    IterativeNoConvergence(String),
    #[error("shift is within {distance:e} of the spectrum")]
    NearSingular { distance: f64 },
    #[error("contour passes within {distance:e} of an eigenvalue")]
    CircleHitsSpectrum { distance: f64 },
    #[error("Neumann series diverges: |U_R| = {0}")]
    SeriesDiverges(f64),
    #[error("no isolated eigenvalue: {0}")]
    NoIsolatedEigenvalue(String),
    #[error("boundary layer under-resolved: spacing {spacing:e} exceeds {limit:e}")]
    LayerUnderResolved { spacing: f64, limit: f64 },
    #[error("time step {dt:e} exceeds the stability bound {limit:e}")]
    CflViolated { dt: f64, limit: f64 },
    #[error("solution blew up at tau = {0}")]
    BlowUp(f64),
    #[error("linear growth window too short: {0}")]
    WindowTooShort(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
