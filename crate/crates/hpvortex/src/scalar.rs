use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive, Zero};

/// Real scalar usable by grids, fields, transforms and sparse factorizations.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + rustfft::FftNum
    + faer::traits::RealField
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + FieldValue<Self>
    + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Value stored at a grid node: a real scalar or a complex number over it.
pub trait FieldValue<T: Float>:
    Copy
    + Zero
    + PartialEq
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Neg<Output = Self>
    + std::ops::Mul<T, Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::AddAssign
    + Debug
    + Send
    + Sync
    + 'static
{
    const IS_COMPLEX: bool;

    fn abs2(self) -> T;

    fn is_finite_value(self) -> bool;

    fn from_real(x: T) -> Self;

    fn re(self) -> T;

    fn im(self) -> T;

    fn from_parts(re: T, im: T) -> Self;

    fn modulus(self) -> T {
        self.abs2().sqrt()
    }
}

macro_rules! impl_field_value {
    ($t:ty) => {
        impl FieldValue<$t> for $t {
            const IS_COMPLEX: bool = false;
            fn abs2(self) -> $t {
                self * self
            }
            fn is_finite_value(self) -> bool {
                self.is_finite()
            }
            fn from_real(x: $t) -> Self {
                x
            }
            fn re(self) -> $t {
                self
            }
            fn im(self) -> $t {
                0.0
            }
            fn from_parts(re: $t, _im: $t) -> Self {
                re
            }
        }

        impl FieldValue<$t> for Complex<$t> {
            const IS_COMPLEX: bool = true;
            fn abs2(self) -> $t {
                self.norm_sqr()
            }
            fn is_finite_value(self) -> bool {
                self.re.is_finite() && self.im.is_finite()
            }
            fn from_real(x: $t) -> Self {
                Complex::new(x, 0.0)
            }
            fn re(self) -> $t {
                self.re
            }
            fn im(self) -> $t {
                self.im
            }
            fn from_parts(re: $t, im: $t) -> Self {
                Complex::new(re, im)
            }
        }
    };
}

impl_field_value!(f32);
impl_field_value!(f64);
