use alloc::format;
use core::f64::consts::PI;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Shape of the switching function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileShape {
    /// `sin^2` ramps over a fraction `ramp_fraction` of `T` at each end,
    /// flat in between.
    SineSquared { ramp_fraction: f64 },
    /// Constant `1/T`; the sudden-switching idealization.
    Rectangular,
}

/// Switching function `g(t)` on `[0, T]`, normalized to unit integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingProfile {
    total_time: f64,
    shape: ProfileShape,
}

impl CouplingProfile {
    pub fn new(total_time: f64, shape: ProfileShape) -> Result<Self> {
        if !(total_time > 0.0) || !total_time.is_finite() {
            return Err(Error::Validation(format!("total time must be positive, got {total_time}")));
        }
        if let ProfileShape::SineSquared { ramp_fraction } = shape {
            if !(ramp_fraction > 0.0 && ramp_fraction < 0.5) {
                return Err(Error::Validation(format!("ramp fraction {ramp_fraction} not in (0, 0.5)")));
            }
        }
        Ok(Self { total_time, shape })
    }

    pub fn sine_squared(total_time: f64, ramp_fraction: f64) -> Result<Self> {
        Self::new(total_time, ProfileShape::SineSquared { ramp_fraction })
    }

    pub fn rectangular(total_time: f64) -> Result<Self> {
        Self::new(total_time, ProfileShape::Rectangular)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn shape(&self) -> ProfileShape {
        self.shape
    }

    /// Flat-top value: `1/(T(1-f))` for ramps, `1/T` otherwise.
    pub fn plateau_height(&self) -> f64 {
        match self.shape {
            ProfileShape::SineSquared { ramp_fraction } => 1.0 / (self.total_time * (1.0 - ramp_fraction)),
            ProfileShape::Rectangular => 1.0 / self.total_time,
        }
    }

    /// `g(t)`; errors outside `[0, T]`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.total_time).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.total_time)));
        }
        Ok(self.value(t))
    }

    fn value(&self, t: f64) -> f64 {
        let h = self.plateau_height();
        match self.shape {
            ProfileShape::Rectangular => h,
            ProfileShape::SineSquared { ramp_fraction } => {
                let ramp = ramp_fraction * self.total_time;
                let edge = t.min(self.total_time - t);
                if edge >= ramp {
                    h
                } else {
                    h * (PI * edge / (2.0 * ramp)).sin().powi(2)
                }
            }
        }
    }

    /// `int_0^t g`, closed form.
    pub fn cumulative(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.total_time);
        let h = self.plateau_height();
        match self.shape {
            ProfileShape::Rectangular => t * h,
            ProfileShape::SineSquared { ramp_fraction } => {
                let ramp = ramp_fraction * self.total_time;
                let rising = |s: f64| h * (s / 2.0 - ramp / (2.0 * PI) * (PI * s / ramp).sin());
                if t <= ramp {
                    rising(t)
                } else if t <= self.total_time - ramp {
                    h * (ramp / 2.0 + (t - ramp))
                } else {
                    1.0 - rising(self.total_time - t)
                }
            }
        }
    }

    /// Mean of `g` over slice `k` of `n_steps` equal slices.
    pub fn step_coupling(&self, k: usize, n_steps: usize) -> f64 {
        let dt = self.total_time / n_steps as f64;
        if let ProfileShape::Rectangular = self.shape {
            return self.plateau_height();
        }
        let a = k as f64 * dt;
        let b = if k + 1 == n_steps { self.total_time } else { a + dt };
        (self.cumulative(b) - self.cumulative(a)) / (b - a)
    }

    /// `sum_k step_coupling(k) * dt`: the quadrature the propagator sees.
    pub fn integrate(&self, n_steps: usize) -> f64 {
        let dt = self.total_time / n_steps as f64;
        (0..n_steps).map(|k| self.step_coupling(k, n_steps) * dt).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn ramp_endpoints_and_plateau() {
        let p = CouplingProfile::sine_squared(40.0, 0.1).unwrap();
        assert_eq!(p.evaluate(0.0).unwrap(), 0.0);
        assert!(p.evaluate(40.0).unwrap().abs() < 1e-30);
        // Trapezoid of two sin^2 ramps: h (T - 2fT) + 2 h fT / 2 = h T (1 - f) = 1.
        let expect = 1.0 / (40.0 * 0.9);
        assert!((p.evaluate(20.0).unwrap() - expect).abs() < 1e-12);
        assert!((p.plateau_height() - 1.0 / 40.0).abs() / (1.0 / 40.0) < 0.12);
    }

    #[test]
    fn rectangular_is_flat() {
        let p = CouplingProfile::rectangular(8.0).unwrap();
        for t in [1e-9, 0.5, 3.3, 7.999] {
            assert_eq!(p.evaluate(t).unwrap(), 1.0 / 8.0);
        }
    }

    #[test]
    fn domain_and_parameter_errors() {
        let p = CouplingProfile::sine_squared(1.0, 0.2).unwrap();
        assert!(matches!(p.evaluate(-0.1), Err(Error::Domain(_))));
        assert!(matches!(p.evaluate(1.5), Err(Error::Domain(_))));
        assert!(CouplingProfile::sine_squared(1.0, 0.5).is_err());
        assert!(CouplingProfile::rectangular(0.0).is_err());
    }

    #[test]
    fn cumulative_matches_quadrature() {
        let p = CouplingProfile::sine_squared(13.0, 0.17).unwrap();
        for t in [0.0, 1.0, 2.21, 5.0, 11.5, 13.0] {
            let q = simpson(|s| p.evaluate(s).unwrap(), 0.0, t, 20_000);
            assert!((p.cumulative(t) - q).abs() < 1e-10, "t = {t}");
        }
        assert!((p.cumulative(13.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalized_at_every_step_size() {
        for shape in [ProfileShape::SineSquared { ramp_fraction: 0.1 }, ProfileShape::Rectangular] {
            let p = CouplingProfile::new(250.0, shape).unwrap();
            for n in [16, 64, 1000, 4096] {
                assert!((p.integrate(n) - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn continuous_and_non_negative() {
        let p = CouplingProfile::sine_squared(10.0, 0.3).unwrap();
        let mut last = 0.0;
        for i in 0..=10_000 {
            let g = p.evaluate(i as f64 * 1e-3).unwrap();
            assert!(g >= 0.0);
            assert!((g - last).abs() < 1e-3);
            last = g;
        }
    }
}
