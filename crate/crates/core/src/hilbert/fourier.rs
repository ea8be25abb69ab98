//! Radix-2 FFT for power-of-two pointer grids.
//!
//! Both directions are unitary (scaled by `1/sqrt(n)`): the forward
//! transform maps grid amplitudes onto the plane-wave eigenbasis of the
//! translation generator, `c_j = n^{-1/2} sum_m e^{-2 pi i j m / n} psi_m`.

use alloc::vec::Vec;
use core::f64::consts::PI;


use super::C64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<C64>,
    scale: f64,
}

impl FftPlan {
    /// Panics unless `n` is a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
        let twiddles = (0..n / 2).map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)).collect();
        Self { n, twiddles, scale: 1.0 / (n as f64).sqrt() }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [C64]) {
        self.transform(data, false);
    }

    pub fn inverse(&self, data: &mut [C64]) {
        self.transform(data, true);
    }

    fn transform(&self, data: &mut [C64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n);
        if n == 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..len / 2 {
                    let w = self.twiddles[k * stride];
                    let w = if inverse { w.conj() } else { w };
                    let a = data[start + k];
                    let b = data[start + k + len / 2] * w;
                    data[start + k] = a + b;
                    data[start + k + len / 2] = a - b;
                }
            }
            len <<= 1;
        }
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[C64]) -> Vec<C64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(m, &v)| v * C64::from_polar(1.0, -2.0 * PI * (j * m) as f64 / n as f64))
                    .sum::<C64>()
                    / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 8, 64] {
            let x: Vec<C64> = (0..n).map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64).cos() * 0.3)).collect();
            let mut y = x.clone();
            FftPlan::new(n).forward(&mut y);
            for (a, b) in y.iter().zip(naive_dft(&x)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let plan = FftPlan::new(256);
        let x: Vec<C64> = (0..256).map(|k| C64::new(k as f64, -(k as f64) * 0.5)).collect();
        let mut y = x.clone();
        plan.forward(&mut y);
        plan.inverse(&mut y);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-10));
    }

    #[test]
    #[should_panic]
    fn rejects_non_power_of_two() {
        let _ = FftPlan::new(12);
        let _ = vec![0; 1];
    }
}
