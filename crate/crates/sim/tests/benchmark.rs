use std::f64::consts::PI;

use protective_core::analysis::log_spaced;
use protective_core::measurement::run;
use protective_core::Error;
use protective_sim::benchmark::*;
use protective_sim::parallel::{parallel_sweep, run_parallel, worker_count, WORKERS_ENV};

#[test]
fn near_commuting_limit() {
    let r = run(&qubit_benchmark_config(0.01, 2500.0).unwrap()).unwrap();
    assert!((r.shift() - 1.0).abs() < 1e-3);
    assert!(r.disturbance < 1e-8);
}

#[test]
fn perpendicular_field_gives_zero_shift() {
    let r = run(&qubit_benchmark_config(PI / 2.0, 2500.0).unwrap()).unwrap();
    assert!(r.shift().abs() < 1e-3, "{}", r.shift());
}

#[test]
fn tilted_sweep_approaches_cos_theta() {
    let s = qubit_benchmark_run(PI / 3.0, &log_spaced(25.0, 2500.0, 6)).unwrap();
    assert_eq!(s.failures(), 0);
    let errors: Vec<f64> = s.centroid_errors.iter().map(|e| e.abs()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!((s.pointer_centroids[5] - 0.5).abs() < 5e-3);
}

#[test]
fn theta_outside_open_interval_is_rejected() {
    for theta in [0.0, PI, -1.0, f64::NAN] {
        assert!(matches!(qubit_benchmark_config(theta, 10.0), Err(Error::Domain(_))));
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let base = qubit_benchmark_config(PI / 3.0, 1.0).unwrap();
    let t = log_spaced(10.0, 1000.0, 5);
    let (one, _) = parallel_sweep(&base, &t, 1).unwrap();
    let (four, _) = parallel_sweep(&base, &t, 4).unwrap();
    assert_eq!(one.pointer_centroids, four.pointer_centroids);
    assert_eq!(one.disturbances, four.disturbances);
    assert!(run_parallel(&base, &[1.0, 2.0], 2).is_err());
}

#[test]
fn worker_env_is_honoured() {
    std::env::set_var(WORKERS_ENV, "3");
    assert_eq!(worker_count(), 3);
    std::env::set_var(WORKERS_ENV, "zero");
    assert!(worker_count() >= 1);
    std::env::remove_var(WORKERS_ENV);
}
