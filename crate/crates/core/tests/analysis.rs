mod common;

use proptest::prelude::*;
use protective_core::analysis::{
    compare_to_prediction, convergence_order, fit_power_law, log_spaced, spearman, sweep_over_t, validate_t_values,
    SweepResult,
};
use protective_core::dynamics::{system_eigenstate, ProfileShape};
use protective_core::hilbert::TensorProduct;
use protective_core::measurement::{run, ApparatusConfig};
use protective_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn xs() -> Vec<f64> {
    log_spaced(1.0, 1000.0, 12)
}

#[test]
fn exact_inverse_square() {
    let x = xs();
    let y: Vec<f64> = x.iter().map(|x| 3.7 / (x * x)).collect();
    let fit = fit_power_law(&x, &y, 0..x.len()).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-10);
    assert!((fit.intercept - 3.7f64.ln()).abs() < 1e-10);
    for (xi, yi) in x.iter().zip(&y) {
        assert!((fit.predict(*xi) / yi - 1.0).abs() < 1e-10);
    }
}

#[test]
fn constant_has_zero_slope() {
    let x = xs();
    let fit = fit_power_law(&x, &vec![0.4; x.len()], 2..9).unwrap();
    assert!(fit.slope.abs() < 1e-12);
    assert_eq!(fit.window, 2..9);
}

#[test]
fn noisy_inverse_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = log_spaced(10.0, 10_000.0, 40);
    let y: Vec<f64> = x
        .iter()
        .map(|x| {
            // Box-Muller normal deviate.
            let (u, v): (f64, f64) = (rng.random(), rng.random());
            let n = (-2.0 * (1.0 - u).ln()).sqrt() * (2.0 * core::f64::consts::PI * v).cos();
            5.0 / (x * x) * (1.0 + 0.01 * n)
        })
        .collect();
    let fit = fit_power_law(&x, &y, 0..x.len()).unwrap();
    assert!(fit.slope > -2.05 && fit.slope < -1.95, "{}", fit.slope);
}

#[test]
fn fit_rejects_bad_windows() {
    let x = xs();
    let mut y = vec![1.0; x.len()];
    assert!(matches!(fit_power_law(&x, &y, 0..3), Err(Error::Validation(_))));
    y[4] = 0.0;
    assert!(matches!(fit_power_law(&x, &y, 2..8), Err(Error::Domain(_))));
    assert!(fit_power_law(&x, &y, 5..10).is_ok());
}

#[test]
fn sweep_grid_validation() {
    assert!(validate_t_values(&log_spaced(10.0, 1000.0, 5)).is_ok());
    assert!(validate_t_values(&log_spaced(10.0, 1000.0, 4)).is_err());
    assert!(validate_t_values(&log_spaced(10.0, 200.0, 8)).is_err());
    assert!(validate_t_values(&[1.0, 10.0, 5.0, 50.0, 100.0]).is_err());
}

#[test]
fn commuting_sweep_skips_fit() {
    let mut base = common::tilted_qubit(0.0, 1.0);
    base.profile = ProfileShape::SineSquared { ramp_fraction: 0.1 };
    let s = sweep_over_t(&base, &log_spaced(5.0, 500.0, 6)).unwrap();
    assert!(s.disturbances.iter().all(|d| *d < 1e-8));
    assert!(s.fit.is_none());
    assert_eq!(s.failures(), 0);
}

#[test]
fn tilted_sweep_trends() {
    let s = sweep_over_t(&common::tilted_qubit_pi3(1.0), &log_spaced(25.0, 2500.0, 11)).unwrap();
    assert_eq!(s.len(), 11);
    let window = s.fit_window(1e-10);
    assert!(window.start > 0 && window.end == s.len());
    let adiabatic: Vec<usize> = (0..s.len()).filter(|&i| s.validities[i] < 0.5).collect();
    for pair in adiabatic.windows(2) {
        assert!(s.disturbances[pair[1]] < s.disturbances[pair[0]]);
        assert!(s.centroid_errors[pair[1]].abs() < s.centroid_errors[pair[0]].abs());
    }
    assert!(s.centroid_errors[s.len() - 1].abs() < 1e-4);
    assert!(spearman(&s.entropies, &s.disturbances) > 0.9);
}

#[test]
fn prediction_comparison() {
    let exact = run(&common::tilted_qubit(0.0, 40.0)).unwrap();
    assert!(compare_to_prediction(&exact).centroid_error.abs() < 1e-6);

    let slow = compare_to_prediction(&run(&common::tilted_qubit_pi3(2500.0)).unwrap());
    assert!(slow.relative_error < 0.01 && !slow.flagged);

    let fast = compare_to_prediction(&run(&common::tilted_qubit_pi3(5.0)).unwrap());
    assert!(fast.flagged && fast.validity > 1.0);
    assert!(fast.relative_error > 10.0 * slow.relative_error);
}

#[test]
fn smooth_profile_is_second_order() {
    let mut config = common::tilted_qubit_pi3(40.0);
    config.profile = ProfileShape::SineSquared { ramp_fraction: 0.25 };
    let h = config.hamiltonian().unwrap();
    let ApparatusConfig::Pointer { grid, .. } = &config.apparatus else { unreachable!() };
    let nu = system_eigenstate(&config.system.hamiltonian, 0).unwrap();
    let psi = nu.tensor(&grid.gaussian_packet(0.0, 0.15).unwrap()).unwrap();
    let study = convergence_order(&h, &psi, 64).unwrap();
    assert!(study.order > 1.8 && study.order < 2.2, "order {}", study.order);
    assert!(study.norm_drift < 1e-8);
}

#[test]
fn failed_points_are_marked() {
    let t = log_spaced(1.0, 100.0, 5);
    let ok = run(&common::tilted_qubit_pi3(10.0)).unwrap();
    let results = t
        .iter()
        .enumerate()
        .map(|(i, _)| if i == 2 { Err(Error::Convergence { estimate: 1e-3, n_steps: 1 << 20 }) } else { Ok(ok.clone()) })
        .collect();
    let s = SweepResult::assemble(&t, results, 1e-8);
    assert_eq!(s.failures(), 1);
    assert!(s.disturbances[2].is_nan());
    assert_eq!(s.n_steps[2], 1 << 20);
    assert!(s.fit.is_none());
}

proptest! {
    #[test]
    fn power_laws_fit_exactly(exponent in -4.0f64..4.0, scale in 1e-3f64..1e3, start in 0usize..4) {
        let x = xs();
        let y: Vec<f64> = x.iter().map(|x| scale * x.powf(exponent)).collect();
        let fit = fit_power_law(&x, &y, start..x.len()).unwrap();
        prop_assert!((fit.slope - exponent).abs() < 1e-10);
        prop_assert!(fit.r_squared > 1.0 - 1e-10);
    }

    #[test]
    fn r_squared_in_unit_interval(y in prop::collection::vec(1e-6f64..1e6, 12)) {
        let fit = fit_power_law(&xs(), &y, 0..12).unwrap();
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn spearman_bounded_and_rank_only(v in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..30)) {
        let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
        let r = spearman(&a, &b);
        if r.is_finite() {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            let warped: Vec<f64> = a.iter().map(|x| x.powi(3) + 2.0 * x).collect();
            prop_assert!((spearman(&warped, &b) - r).abs() < 1e-12);
        }
        prop_assert!((spearman(&a, &a) - 1.0).abs() < 1e-12 || a.iter().all(|x| *x == a[0]));
    }

    #[test]
    fn log_spacing_hits_endpoints(lo in 1e-2f64..1e2, decades in 0.5f64..4.0, n in 2usize..40) {
        let hi = lo * 10f64.powf(decades);
        let t = log_spaced(lo, hi, n);
        prop_assert_eq!(t.len(), n);
        prop_assert!((t[0] / lo - 1.0).abs() < 1e-12 && (t[n - 1] / hi - 1.0).abs() < 1e-12);
        prop_assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}
