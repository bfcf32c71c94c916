use crate::scalar::Real;

/// Inner-product weight on grid nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind<T> {
    Unweighted,
    /// `rho = exp(|xi|^2 / 8)`, clipped at `cap` when set.
    GaussianRho { cap: Option<T> },
}

/// Default ceiling `e^32`, leaving `|xi| <= 16` untouched.
pub const DEFAULT_LOG_CAP: f64 = 32.0;

impl<T: Real> WeightKind<T> {
    pub fn gaussian() -> Self {
        WeightKind::GaussianRho { cap: Some(T::lit(DEFAULT_LOG_CAP).exp()) }
    }

    pub fn gaussian_uncapped() -> Self {
        WeightKind::GaussianRho { cap: None }
    }

    /// `log w(x, y)`.
    pub fn log_weight(&self, x: T, y: T) -> T {
        match self {
            WeightKind::Unweighted => T::zero(),
            WeightKind::GaussianRho { cap } => {
                let e = (x * x + y * y) / T::lit(8.0);
                match cap {
                    Some(c) => e.min(c.ln()),
                    None => e,
                }
            }
        }
    }

    pub fn weight(&self, x: T, y: T) -> T {
        self.log_weight(x, y).exp()
    }

    pub fn weight_sq(&self, x: T, y: T) -> T {
        (self.log_weight(x, y) * T::lit(2.0)).exp()
    }

    /// `w(a)^2 / w(b)^2`, evaluated without forming either weight.
    pub fn weight_sq_ratio(&self, a: (T, T), b: (T, T)) -> T {
        ((self.log_weight(a.0, a.1) - self.log_weight(b.0, b.1)) * T::lit(2.0)).exp()
    }
}
