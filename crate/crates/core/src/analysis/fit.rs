use alloc::format;
use core::ops::Range;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Fewest points [`fit_power_law`] accepts.
pub const MIN_FIT_POINTS: usize = 4;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: Range<usize>,
}

impl ScalingFit {
    /// Fitted `y` at `x`.
    pub fn predict(&self, x: f64) -> f64 {
        (self.intercept + self.slope * x.ln()).exp()
    }
}

/// Fits `y = exp(intercept) x^slope` on the points with indices in `window`.
pub fn fit_power_law(x: &[f64], y: &[f64], window: Range<usize>) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if window.end > x.len() || window.len() < MIN_FIT_POINTS {
        return Err(Error::Validation(format!(
            "fit window {window:?} must hold at least {MIN_FIT_POINTS} of {} points",
            x.len()
        )));
    }
    if let Some(i) = window.clone().find(|&i| !(x[i] > 0.0) || !(y[i] > 0.0)) {
        return Err(Error::Domain(format!("non-positive value at index {i}: x = {}, y = {}", x[i], y[i])));
    }
    let n = window.len() as f64;
    let lx = |i: usize| x[i].ln();
    let ly = |i: usize| y[i].ln();
    let mx = window.clone().map(lx).sum::<f64>() / n;
    let my = window.clone().map(ly).sum::<f64>() / n;
    let sxx: f64 = window.clone().map(|i| (lx(i) - mx).powi(2)).sum();
    let sxy: f64 = window.clone().map(|i| (lx(i) - mx) * (ly(i) - my)).sum();
    let syy: f64 = window.clone().map(|i| (ly(i) - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all x values in the window are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(ScalingFit { slope, intercept, r_squared, window })
}
