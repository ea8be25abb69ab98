//! Post-processing: T sweeps, power-law fits, convergence studies and
//! comparisons with the first-order prediction.

mod compare;
mod convergence;
mod fit;
mod stats;
mod sweep;

pub use compare::{compare_to_prediction, Discrepancy, VALIDITY_THRESHOLD};
pub use convergence::{convergence_order, ConvergenceStudy};
pub use fit::{fit_power_law, ScalingFit, MIN_FIT_POINTS};
pub use stats::spearman;
pub use sweep::{
    log_spaced, sweep_over_t, validate_t_values, SweepResult, MIN_SWEEP_DECADES, MIN_SWEEP_POINTS, NOISE_FLOOR_FACTOR,
};
