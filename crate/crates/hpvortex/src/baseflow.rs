//! Radial vortex profiles, smooth truncation, and the mirrored vortex pair.

use crate::error::{Error, Result};
use crate::fields::reflect::restrict_half;
use crate::fields::{DomainKind, Grid2D, ScalarField, VectorField};
use crate::scalar::Real;

/// Analytic angular-velocity families `zeta(r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileFamily<T> {
    /// `exp(-r^2/a^2)`.
    GaussianBump { a: T },
    /// `(1 - r^2/a^2)^4` for `r < a`.
    PolynomialBump { a: T },
    /// `(1 + b r^2/a^2) exp(-r^2/a^2)`.
    NonMonotoneRing { a: T, b: T },
}

impl<T: Real> ProfileFamily<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileFamily::GaussianBump { .. } => "gaussian-bump",
            ProfileFamily::PolynomialBump { .. } => "polynomial-bump",
            ProfileFamily::NonMonotoneRing { .. } => "non-monotone-ring",
        }
    }

    /// `(zeta, zeta', zeta'')` at `r`.
    pub fn eval(&self, r: T) -> (T, T, T) {
        match *self {
            ProfileFamily::GaussianBump { a } => ring(r, a, T::zero()),
            ProfileFamily::NonMonotoneRing { a, b } => ring(r, a, b),
            ProfileFamily::PolynomialBump { a } => {
                if r >= a {
                    return (T::zero(), T::zero(), T::zero());
                }
                let a2 = a * a;
                let u = T::one() - r * r / a2;
                let u2 = u * u;
                let u3 = u2 * u;
                let z = u2 * u2;
                let dz = -T::lit(8.0) * r * u3 / a2;
                let d2z = -T::lit(8.0) * u3 / a2 + T::lit(48.0) * r * r * u2 / (a2 * a2);
                (z, dz, d2z)
            }
        }
    }

    /// Radius beyond which `zeta` vanishes identically, if any.
    pub fn support(&self) -> Option<T> {
        match *self {
            ProfileFamily::PolynomialBump { a } => Some(a),
            _ => None,
        }
    }
}

fn ring<T: Real>(r: T, a: T, b: T) -> (T, T, T) {
    let a2 = a * a;
    let s = r * r / a2;
    let e = (-s).exp();
    let z = (T::one() + b * s) * e;
    let zs = (b - T::one() - b * s) * e;
    let zss = (T::one() - T::lit(2.0) * b + b * s) * e;
    let ds = T::lit(2.0) * r / a2;
    let dss = T::lit(2.0) / a2;
    (z, zs * ds, zss * ds * ds + zs * dss)
}

/// `f(t) = exp(-1/t)` for `t > 0` with its first two derivatives.
fn flat<T: Real>(t: T) -> (T, T, T) {
    if t <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    let f = (-T::one() / t).exp();
    let t2 = t * t;
    (f, f / t2, f * (T::one() - T::lit(2.0) * t) / (t2 * t2))
}

/// Smooth radial cutoff `phi(s)`: one on `s <= 1/2`, zero on `s >= 1`.
/// Returns `(phi, phi', phi'')`.
pub fn cutoff<T: Real>(s: T) -> (T, T, T) {
    let half = T::lit(0.5);
    if s <= half {
        return (T::one(), T::zero(), T::zero());
    }
    if s >= T::one() {
        return (T::zero(), T::zero(), T::zero());
    }
    let (fa, dfa, d2fa) = flat(T::one() - s);
    let (a, da, d2a) = (fa, -dfa, d2fa);
    let (b, db, d2b) = flat(s - half);
    let d = a + b;
    let dd = da + db;
    let num = da * b - a * db;
    let dnum = d2a * b - a * d2b;
    let d2 = d * d;
    (a / d, num / d2, dnum / d2 - T::lit(2.0) * num * dd / (d2 * d))
}

/// Angular velocity `zeta` of a radial vortex `u = zeta(|xi|) xi_perp`, optionally
/// multiplied by `phi(r / r_trunc)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialProfile<T> {
    pub family: ProfileFamily<T>,
    pub truncation: Option<T>,
}

pub fn make_profile<T: Real>(family: ProfileFamily<T>) -> Result<RadialProfile<T>> {
    let positive = |v: T, name: &str| {
        if v > T::zero() && v.is_finite() {
            Ok(())
        } else {
            Err(Error::BadProfileParameter(format!("{name} must be positive, got {v}")))
        }
    };
    match family {
        ProfileFamily::GaussianBump { a } | ProfileFamily::PolynomialBump { a } => positive(a, "a")?,
        ProfileFamily::NonMonotoneRing { a, b } => {
            positive(a, "a")?;
            if !b.is_finite() || b < T::zero() {
                return Err(Error::BadProfileParameter(format!("b must be non-negative, got {b}")));
            }
        }
    }
    Ok(RadialProfile { family, truncation: None })
}

pub fn truncate<T: Real>(profile: &RadialProfile<T>, r_trunc: T) -> Result<RadialProfile<T>> {
    if !(r_trunc > T::zero()) {
        return Err(Error::BadProfileParameter(format!("truncation radius must be positive, got {r_trunc}")));
    }
    let r_trunc = match profile.truncation {
        Some(t) => t.min(r_trunc),
        None => r_trunc,
    };
    Ok(RadialProfile { family: profile.family, truncation: Some(r_trunc) })
}

impl<T: Real> RadialProfile<T> {
    /// `(g, g', g'')` with `g = phi(r/R) zeta(r)`.
    pub fn zeta3(&self, r: T) -> (T, T, T) {
        let (z, dz, d2z) = self.family.eval(r);
        match self.truncation {
            None => (z, dz, d2z),
            Some(rt) => {
                let (p, dp, d2p) = cutoff(r / rt);
                (
                    p * z,
                    dp * z / rt + p * dz,
                    d2p * z / (rt * rt) + T::lit(2.0) * dp * dz / rt + p * d2z,
                )
            }
        }
    }

    pub fn zeta(&self, r: T) -> T {
        self.zeta3(r).0
    }

    /// `omega_bar = 2 zeta + r zeta'`.
    pub fn omega_bar(&self, r: T) -> T {
        let (g, dg, _) = self.zeta3(r);
        T::lit(2.0) * g + r * dg
    }

    /// `omega_bar' = 3 zeta' + r zeta''`.
    pub fn omega_bar_prime(&self, r: T) -> T {
        let (_, dg, d2g) = self.zeta3(r);
        T::lit(3.0) * dg + r * d2g
    }

    pub fn support_radius(&self) -> Option<T> {
        match (self.truncation, self.family.support()) {
            (Some(t), Some(s)) => Some(t.min(s)),
            (Some(t), None) => Some(t),
            (None, s) => s,
        }
    }

    /// Velocity, vorticity and vorticity gradient of the vortex centered at `c`, at `p`.
    pub fn lobe_at(&self, c: (T, T), p: (T, T)) -> LobeSample<T> {
        let dx = p.0 - c.0;
        let dy = p.1 - c.1;
        let r = (dx * dx + dy * dy).sqrt();
        let (g, dg, d2g) = self.zeta3(r);
        let wb = T::lit(2.0) * g + r * dg;
        let wbp = T::lit(3.0) * dg + r * d2g;
        let (gx, gy) = if r > T::zero() { (wbp * dx / r, wbp * dy / r) } else { (T::zero(), T::zero()) };
        LobeSample { u: (-g * dy, g * dx), omega: wb, grad_omega: (gx, gy) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LobeSample<T> {
    pub u: (T, T),
    pub omega: T,
    pub grad_omega: (T, T),
}

/// Base state on one grid: velocity, vorticity and the analytic vorticity gradient.
#[derive(Clone, Debug)]
pub struct BaseFields<T: Real> {
    pub u: VectorField<T>,
    pub omega: ScalarField<T>,
    pub grad_omega: VectorField<T>,
}

impl<T: Real> BaseFields<T> {
    pub fn grid(&self) -> &Grid2D<T> {
        self.omega.grid()
    }

    fn from_sampler(grid: Grid2D<T>, f: impl Fn(T, T) -> LobeSample<T>) -> Self {
        let n = grid.len();
        let mut u1 = Vec::with_capacity(n);
        let mut u2 = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n);
        let mut g1 = Vec::with_capacity(n);
        let mut g2 = Vec::with_capacity(n);
        for k in 0..n {
            let (x, y) = grid.xy(k);
            let s = f(x, y);
            u1.push(s.u.0);
            u2.push(s.u.1);
            w.push(s.omega);
            g1.push(s.grad_omega.0);
            g2.push(s.grad_omega.1);
        }
        let sf = |v| ScalarField::from_vec(grid, v).expect("grid length");
        Self {
            u: VectorField { v1: sf(u1), v2: sf(u2) },
            omega: sf(w),
            grad_omega: VectorField { v1: sf(g1), v2: sf(g2) },
        }
    }

    pub fn restrict_half(&self) -> Result<Self> {
        Ok(Self {
            u: VectorField::new(restrict_half(&self.u.v1)?, restrict_half(&self.u.v2)?)?,
            omega: restrict_half(&self.omega)?,
            grad_omega: VectorField::new(restrict_half(&self.grad_omega.v1)?, restrict_half(&self.grad_omega.v2)?)?,
        })
    }
}

/// A single vortex centered at `c`.
pub fn single_vortex<T: Real>(profile: &RadialProfile<T>, c: (T, T), grid: Grid2D<T>) -> BaseFields<T> {
    BaseFields::from_sampler(grid, |x, y| profile.lobe_at(c, (x, y)))
}

/// Vortex at `(0, R)` and its mirror image at `(0, -R)`.
#[derive(Clone, Debug)]
pub struct MirroredFlow<T: Real> {
    pub r: T,
    pub r0: T,
    pub profile: RadialProfile<T>,
    /// Whole-plane fields `U`, `Omega`, `grad Omega`.
    pub whole: BaseFields<T>,
}

/// Whole box of half-width `R + 3 R0` with spacing close to `h`.
pub fn default_box<T: Real>(r: T, r0: T, h: T) -> Result<Grid2D<T>> {
    Grid2D::with_spacing(DomainKind::Whole, r + T::lit(3.0) * r0, h)
}

pub fn build_mirrored<T: Real>(profile: &RadialProfile<T>, r0: T, r: T, grid: Grid2D<T>) -> Result<MirroredFlow<T>> {
    if !(r > r0) {
        return Err(Error::LobesOverlap { r: r.as_f64(), r0: r0.as_f64() });
    }
    if grid.kind() != DomainKind::Whole {
        return Err(Error::ShapeMismatch("mirrored flow lives on a whole grid".into()));
    }
    let profile = match profile.support_radius() {
        Some(s) if s <= r0 => *profile,
        Some(s) if profile.truncation.is_some() => {
            return Err(Error::BadProfileParameter(format!("profile support {s} exceeds R0 = {r0}")));
        }
        _ => truncate(profile, r0)?,
    };
    let lobe = |x: T, y: T| -> LobeSample<T> {
        let up = profile.lobe_at((T::zero(), r), (x, y));
        // mirror lobe: (u1, -u2)(x1, -x2 - R), vorticity -omega_bar(x1, -x2 - R)
        let m = profile.lobe_at((T::zero(), T::zero()), (x, -y - r));
        LobeSample {
            u: (up.u.0 + m.u.0, up.u.1 - m.u.1),
            omega: up.omega - m.omega,
            grad_omega: (up.grad_omega.0 - m.grad_omega.0, up.grad_omega.1 + m.grad_omega.1),
        }
    };
    let mut whole = BaseFields::from_sampler(grid, lobe);
    // assign the lower half from the upper half so the symmetry is exact at nodes
    let c = grid.center();
    for j in 1..=c {
        for i in 0..grid.nx() {
            let (a, b) = (grid.idx(i, c + j), grid.idx(i, c - j));
            whole.u.v1.values_mut()[b] = whole.u.v1.values()[a];
            whole.u.v2.values_mut()[b] = -whole.u.v2.values()[a];
            whole.omega.values_mut()[b] = -whole.omega.values()[a];
            whole.grad_omega.v1.values_mut()[b] = -whole.grad_omega.v1.values()[a];
            whole.grad_omega.v2.values_mut()[b] = whole.grad_omega.v2.values()[a];
        }
    }
    for i in 0..grid.nx() {
        let k = grid.idx(i, c);
        whole.u.v2.values_mut()[k] = T::zero();
        whole.omega.values_mut()[k] = T::zero();
        whole.grad_omega.v1.values_mut()[k] = T::zero();
    }
    Ok(MirroredFlow { r, r0, profile, whole })
}

impl<T: Real> MirroredFlow<T> {
    pub fn grid(&self) -> &Grid2D<T> {
        self.whole.grid()
    }

    /// Upper-lobe fields on the half plane: `(U_E, Omega_E)` with the gradient of `Omega_E`.
    pub fn to_half_plane(&self) -> Result<BaseFields<T>> {
        self.whole.restrict_half()
    }

    /// Centers of the two lobes.
    pub fn centers(&self) -> [(T, T); 2] {
        [(T::zero(), self.r), (T::zero(), -self.r)]
    }
}
