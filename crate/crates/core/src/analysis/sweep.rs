use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use super::{compare_to_prediction, fit_power_law, ScalingFit, MIN_FIT_POINTS, VALIDITY_THRESHOLD};
use crate::error::{Error, Result};
use crate::measurement::{run, MeasurementConfig, RunResult};
#[allow(unused_imports)]
use num_traits::Float;

/// Fewest sweep points and smallest span (decades) a sweep accepts.
pub const MIN_SWEEP_POINTS: usize = 5;
pub const MIN_SWEEP_DECADES: f64 = 1.5;

/// Fit window points need disturbance above this multiple of the
/// propagation tolerance.
pub const NOISE_FLOOR_FACTOR: f64 = 100.0;

/// Runs of one configuration over increasing `T`. Failed points keep `NaN`
/// in the numeric columns and their error in `errors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub t_values: Vec<f64>,
    pub pointer_centroids: Vec<f64>,
    pub predicted_shifts: Vec<f64>,
    pub centroid_errors: Vec<f64>,
    pub disturbances: Vec<f64>,
    pub entropies: Vec<f64>,
    pub validities: Vec<f64>,
    pub n_steps: Vec<usize>,
    pub errors: Vec<Option<Error>>,
    /// Power law of disturbance against `T` on the automatic window;
    /// `None` when fewer than four points qualify.
    pub fit: Option<ScalingFit>,
    /// Whether disturbance strictly decreases across the fit window.
    pub decreasing_in_window: bool,
}

/// Checks that `t_values` is a usable sweep grid.
pub fn validate_t_values(t_values: &[f64]) -> Result<()> {
    if t_values.len() < MIN_SWEEP_POINTS {
        return Err(Error::Validation(format!(
            "sweep needs at least {MIN_SWEEP_POINTS} T values, got {}",
            t_values.len()
        )));
    }
    if t_values.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::Validation("T values must be positive and finite".into()));
    }
    if t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("T values must be strictly increasing".into()));
    }
    let decades = (t_values[t_values.len() - 1] / t_values[0]).log10();
    if decades < MIN_SWEEP_DECADES {
        return Err(Error::Validation(format!(
            "T values span {decades:.2} decades; at least {MIN_SWEEP_DECADES} required"
        )));
    }
    Ok(())
}

/// `n` values log-spaced from `t_min` to `t_max` inclusive.
pub fn log_spaced(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![t_min];
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Runs `base` at each `T`, one after another.
pub fn sweep_over_t(base: &MeasurementConfig, t_values: &[f64]) -> Result<SweepResult> {
    validate_t_values(t_values)?;
    let results = t_values.iter().map(|&t| run(&base.with_total_time(t))).collect();
    Ok(SweepResult::assemble(t_values, results, base.tolerance))
}

impl SweepResult {
    /// Collects per-`T` outcomes (in `t_values` order) and fits the
    /// disturbance law on points with validity below the threshold and
    /// disturbance above the noise floor.
    pub fn assemble(t_values: &[f64], results: Vec<Result<RunResult>>, tolerance: f64) -> Self {
        let n = t_values.len();
        let mut s = Self {
            t_values: t_values.to_vec(),
            pointer_centroids: Vec::with_capacity(n),
            predicted_shifts: Vec::with_capacity(n),
            centroid_errors: Vec::with_capacity(n),
            disturbances: Vec::with_capacity(n),
            entropies: Vec::with_capacity(n),
            validities: Vec::with_capacity(n),
            n_steps: Vec::with_capacity(n),
            errors: Vec::with_capacity(n),
            fit: None,
            decreasing_in_window: false,
        };
        for r in results {
            match r {
                Ok(r) => {
                    s.pointer_centroids.push(r.pointer_centroid);
                    s.predicted_shifts.push(r.predicted_shift);
                    s.centroid_errors.push(compare_to_prediction(&r).centroid_error);
                    s.disturbances.push(r.disturbance);
                    s.entropies.push(r.entanglement_entropy);
                    s.validities.push(r.validity);
                    s.n_steps.push(r.report.n_steps);
                    s.errors.push(None);
                }
                Err(e) => {
                    for col in [
                        &mut s.pointer_centroids,
                        &mut s.predicted_shifts,
                        &mut s.centroid_errors,
                        &mut s.disturbances,
                        &mut s.entropies,
                        &mut s.validities,
                    ] {
                        col.push(f64::NAN);
                    }
                    let steps = match &e {
                        Error::Convergence { n_steps, .. } => *n_steps,
                        _ => 0,
                    };
                    s.n_steps.push(steps);
                    s.errors.push(Some(e));
                }
            }
        }
        let window = s.fit_window(tolerance);
        if window.len() >= MIN_FIT_POINTS {
            s.decreasing_in_window = window.clone().skip(1).all(|i| s.disturbances[i] < s.disturbances[i - 1]);
            s.fit = fit_power_law(&s.t_values, &s.disturbances, window).ok();
        }
        s
    }

    /// Longest contiguous run of points eligible for the scaling fit.
    pub fn fit_window(&self, tolerance: f64) -> Range<usize> {
        let eligible = |i: usize| {
            self.errors[i].is_none()
                && self.validities[i] < VALIDITY_THRESHOLD
                && self.disturbances[i] > NOISE_FLOOR_FACTOR * tolerance
        };
        let mut best = 0..0;
        let mut start = 0;
        for i in 0..=self.t_values.len() {
            if i == self.t_values.len() || !eligible(i) {
                if i - start > best.len() {
                    best = start..i;
                }
                start = i + 1;
            }
        }
        best
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn failures(&self) -> usize {
        self.errors.iter().filter(|e| e.is_some()).count()
    }
}
