use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use super::fourier::FftPlan;
use super::{HermitianOperator, StateVector, C64};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Uniform periodic grid for a one-dimensional pointer coordinate (hbar = 1).
///
/// Points are `r_min + m * spacing` for `m < n_points`; `r_max` is the
/// periodic image of `r_min`. The conjugate translation generator is
/// diagonal in the discrete Fourier basis of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerGrid {
    n_points: usize,
    r_min: f64,
    r_max: f64,
}

impl PointerGrid {
    pub fn new(n_points: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if !n_points.is_power_of_two() || n_points < 8 {
            return Err(Error::Sizing(format!("grid size {n_points} must be a power of two >= 8")));
        }
        if !(r_max > r_min) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(Error::Sizing(format!("invalid grid range [{r_min}, {r_max})")));
        }
        Ok(Self { n_points, r_min, r_max })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn length(&self) -> f64 {
        self.r_max - self.r_min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn r_values(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.n_points).map(|m| self.r_min + m as f64 * dx).collect()
    }

    /// Eigenvalues of the translation generator in FFT order:
    /// `2 pi j' / L` with `j' = j` below `n/2` and `j - n` above.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dk } else { (j as f64 - n as f64) * dk })
            .collect()
    }

    /// Largest |eigenvalue| of the translation generator, `pi / spacing`.
    pub fn max_wavenumber(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn fft(&self) -> FftPlan {
        FftPlan::new(self.n_points)
    }

    /// The generator `Q` of pointer translations: `e^{-i s Q}` moves a
    /// packet centred at `r` to `r + s`. Dense; built from its spectrum.
    pub fn translation_generator(&self) -> HermitianOperator {
        let n = self.n_points;
        let norm = 1.0 / (n as f64).sqrt();
        let vectors = DMatrix::from_fn(n, n, |m, j| C64::from_polar(norm, 2.0 * PI * (j * m % n) as f64 / n as f64));
        HermitianOperator::from_spectrum(self.wavenumbers(), vectors)
            .expect("plane waves are orthonormal")
    }

    /// The pointer coordinate `R`, diagonal on the grid.
    pub fn position_operator(&self) -> HermitianOperator {
        HermitianOperator::diagonal(&self.r_values())
    }

    /// Gaussian packet with `|phi|^2` of mean `center` and RMS width `width`.
    /// The width must satisfy `4 * spacing <= width <= length / 8`.
    pub fn gaussian_packet(&self, center: f64, width: f64) -> Result<StateVector> {
        let dx = self.spacing();
        if !(width >= 4.0 * dx) || !(width <= self.length() / 8.0) {
            return Err(Error::Sizing(format!(
                "packet width {width} violates 4*spacing <= width <= length/8 (spacing {dx}, length {})",
                self.length()
            )));
        }
        if !(center >= self.r_min && center < self.r_max) {
            return Err(Error::Sizing(format!("packet centre {center} outside [{}, {})", self.r_min, self.r_max)));
        }
        let amps = self
            .r_values()
            .into_iter()
            .map(|r| C64::new((-(r - center).powi(2) / (4.0 * width * width)).exp(), 0.0))
            .collect();
        StateVector::from_amplitudes(amps)
    }

    /// Applies `e^{-i shift Q}` to grid amplitudes in place.
    pub fn translate(&self, plan: &FftPlan, amplitudes: &mut [C64], shift: f64) {
        plan.forward(amplitudes);
        for (c, k) in amplitudes.iter_mut().zip(self.wavenumbers()) {
            *c *= C64::from_polar(1.0, -k * shift);
        }
        plan.inverse(amplitudes);
    }

    /// Mean and RMS width of a distribution over the grid points.
    pub fn moments(&self, weights: &[f64]) -> (f64, f64) {
        moments(&self.r_values(), weights)
    }
}

pub(crate) fn moments(coords: &[f64], weights: &[f64]) -> (f64, f64) {
    let mass: f64 = weights.iter().sum();
    let mean = coords.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / mass;
    let var = coords.iter().zip(weights).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / mass;
    (mean, var.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PointerGrid {
        PointerGrid::new(256, -20.0, 20.0).unwrap()
    }

    #[test]
    fn packet_moments() {
        let g = grid();
        let phi = g.gaussian_packet(3.0, 1.0).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        let (c, w) = g.moments(&phi.probabilities());
        assert!((c - 3.0).abs() < 0.02 && (c - 3.0).abs() < g.spacing() / 10.0);
        assert!((w - 1.0).abs() < 0.02);

        let wide = g.gaussian_packet(0.0, g.length() / 8.0).unwrap();
        let (c, _) = g.moments(&wide.probabilities());
        assert!(c.abs() < g.spacing() / 10.0, "centroid {c}");
    }

    #[test]
    fn packet_width_band() {
        let g = grid();
        assert!(matches!(g.gaussian_packet(0.0, 2.0 * g.spacing()), Err(Error::Sizing(_))));
        assert!(matches!(g.gaussian_packet(0.0, g.length() / 4.0), Err(Error::Sizing(_))));
    }

    #[test]
    fn translation_moves_centroid() {
        let g = grid();
        let q = g.translation_generator();
        let phi = g.gaussian_packet(3.0, 1.0).unwrap();

        let same = q.evolve(&phi, 0.0).unwrap();
        assert!(same.max_amplitude_difference(&phi).unwrap() < 1e-12);

        let moved = q.evolve(&phi, 2.0).unwrap();
        let (c, w) = g.moments(&moved.probabilities());
        assert!((c - 5.0).abs() < 0.02, "centroid {c}");
        assert!((w - 1.0).abs() < 0.02);

        let mut amps: Vec<C64> = phi.amplitudes().iter().copied().collect();
        g.translate(&g.fft(), &mut amps, 2.0);
        for (a, b) in amps.iter().zip(moved.amplitudes().iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn integer_cell_shifts_are_exact_to_1e6() {
        let g = PointerGrid::new(256, -16.0, 16.0).unwrap();
        let dx = g.spacing();
        let phi = g.gaussian_packet(-1.0, 8.0 * dx).unwrap();
        let (c0, _) = g.moments(&phi.probabilities());
        // Up to a quarter of the box.
        for cells in [-64i32, -3, 1, 7, 64] {
            let s = cells as f64 * dx;
            let mut amps: Vec<C64> = phi.amplitudes().iter().copied().collect();
            g.translate(&g.fft(), &mut amps, s);
            let p: Vec<f64> = amps.iter().map(|z| z.norm_sqr()).collect();
            let (c, _) = g.moments(&p);
            assert!((c - c0 - s).abs() < 1e-6);
        }
    }

    #[test]
    fn canonical_commutator_on_gaussian() {
        let g = grid();
        let q = g.translation_generator();
        let r = g.position_operator();
        let phi = g.gaussian_packet(0.0, 1.5).unwrap();
        let rq = r.matrix() * (q.matrix() * phi.amplitudes());
        let qr = q.matrix() * (r.matrix() * phi.amplitudes());
        let lhs = rq - qr;
        let rhs = phi.amplitudes().map(|z| z * C64::new(0.0, 1.0));
        let rel = (&lhs - &rhs).norm() / rhs.norm();
        assert!(rel < 0.01, "relative deviation {rel}");
        assert!(q.commutator_norm(&q).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PointerGrid::new(100, 0.0, 1.0).is_err());
        assert!(PointerGrid::new(64, 1.0, 1.0).is_err());
    }
}
