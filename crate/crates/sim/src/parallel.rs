//! Sweeps over `T` spread across a worker pool. Each `T` is an independent
//! run; results are gathered in input order before anything is written.

use std::num::NonZeroUsize;

use log::debug;
use protective_core::analysis::{validate_t_values, SweepResult};
use protective_core::measurement::{run, MeasurementConfig, RunResult};
use protective_core::Result;
use rayon::prelude::*;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PROTECTIVE_WORKERS";

/// Worker count from [`WORKERS_ENV`], else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<NonZeroUsize>().ok())
        .or_else(|| std::thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get)
}

/// Runs `base` at every `T` on `workers` threads.
pub fn run_parallel(base: &MeasurementConfig, t_values: &[f64], workers: usize) -> Result<Vec<Result<RunResult>>> {
    validate_t_values(t_values)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool construction");
    debug!("sweeping {} values of T on {} workers", t_values.len(), workers.max(1));
    Ok(pool.install(|| t_values.par_iter().map(|&t| run(&base.with_total_time(t))).collect()))
}

/// Parallel counterpart of `sweep_over_t`; also returns the per-`T` runs.
pub fn parallel_sweep(
    base: &MeasurementConfig,
    t_values: &[f64],
    workers: usize,
) -> Result<(SweepResult, Vec<Result<RunResult>>)> {
    let runs = run_parallel(base, t_values, workers)?;
    let sweep = SweepResult::assemble(t_values, runs.clone(), base.tolerance);
    Ok((sweep, runs))
}
