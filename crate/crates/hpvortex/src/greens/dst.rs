use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Unnormalized type-I sine transform `X_k = sum_j x_j sin(pi j k / (m + 1))`,
/// `j, k = 1..=m`, evaluated through a complex FFT of length `2 (m + 1)`.
#[derive(Clone)]
pub struct Dst1<T: Real> {
    m: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Dst1<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dst1").field("m", &self.m).finish()
    }
}

impl<T: Real> Dst1<T> {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { m, fft: planner.plan_fft_forward(2 * (m + 1)) }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Transform `count` contiguous signals of length `m` stored back to back.
    pub fn apply_batch(&self, data: &mut [T], count: usize) {
        let m = self.m;
        let p = 2 * (m + 1);
        debug_assert_eq!(data.len(), m * count);
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; p * count];
        for s in 0..count {
            let x = &data[s * m..(s + 1) * m];
            let b = &mut buf[s * p..(s + 1) * p];
            for j in 0..m {
                b[j + 1] = Complex::new(x[j], T::zero());
                b[p - 1 - j] = Complex::new(-x[j], T::zero());
            }
        }
        self.fft.process(&mut buf);
        let half = T::lit(-0.5);
        for s in 0..count {
            let b = &buf[s * p..(s + 1) * p];
            let x = &mut data[s * m..(s + 1) * m];
            for k in 0..m {
                x[k] = b[k + 1].im * half;
            }
        }
    }

    pub fn apply(&self, data: &mut [T]) {
        self.apply_batch(data, 1);
    }
}

/// Two-dimensional sine transform on an `mx x my` row-major array.
#[derive(Clone, Debug)]
pub struct Dst2<T: Real> {
    pub mx: usize,
    pub my: usize,
    tx: Dst1<T>,
    ty: Dst1<T>,
}

impl<T: Real> Dst2<T> {
    pub fn new(mx: usize, my: usize) -> Self {
        Self { mx, my, tx: Dst1::new(mx), ty: Dst1::new(my) }
    }

    pub fn apply(&self, data: &mut [T]) {
        let (mx, my) = (self.mx, self.my);
        self.tx.apply_batch(data, my);
        let mut t = vec![T::zero(); mx * my];
        for j in 0..my {
            for i in 0..mx {
                t[i * my + j] = data[j * mx + i];
            }
        }
        self.ty.apply_batch(&mut t, mx);
        for i in 0..mx {
            for j in 0..my {
                data[j * mx + i] = t[i * my + j];
            }
        }
    }
}
