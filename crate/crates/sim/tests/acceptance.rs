//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use protective_core::analysis::{convergence_order, log_spaced, SweepResult};
use protective_core::dynamics::{
    impulsive_propagator, propagate, system_eigenstate, Apparatus, CompositeHamiltonian, CouplingProfile, GridApparatus,
    ProfileShape, PropagationOptions,
};
use protective_core::hilbert::{max_abs, HermitianOperator, PointerGrid, StateVector, TensorProduct, C64};
use protective_core::measurement::{
    construct_y_operator, run, run_sequential, run_strong, ApparatusConfig, CollapseSampler, MeasurementConfig, Mode,
    PacketSpec, RunResult, SystemConfig,
};
use protective_sim::benchmark::{qubit_benchmark_config, qubit_benchmark_run, tilted_hamiltonian};
use protective_sim::coldatom::{cold_atom_run, ColdAtomParams, FidelityLevel, TARGET_DISPLACEMENT};
use protective_sim::config::{parse_config_str, ConfigDocument};
use protective_sim::output::{csv_string, sweep_rows, ResultDocument};
use protective_sim::parallel::{parallel_sweep, worker_count};

const SHIFT_TOL: f64 = 0.01;
const SLOPE_RANGE: (f64, f64) = (-2.3, -1.7);
const R2_MIN: f64 = 0.98;
const FIXED_POINT_TOL: f64 = 1e-8;
const IMPULSIVE_TOL: f64 = 1e-8;
const BORN_SAMPLES: usize = 10_000;
const ORDER_RANGE: (f64, f64) = (1.8, 2.2);
const NORM_DRIFT_TOL: f64 = 1e-8;
const COLD_ATOM_TOL: f64 = 0.02;
const DISPLACEMENT_TOL: f64 = 0.10;
const GENERALIZED_TOL: f64 = 0.05;
const Y_TOL: f64 = 1e-10;
const SEQUENTIAL_TOL: f64 = 0.02;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// The gap is 2, so T * gap spans [50, 5000].
fn shift_sweep() -> Result<SweepResult, String> {
    qubit_benchmark_run(PI / 3.0, &log_spaced(25.0, 2500.0, 21)).map_err(|e| e.to_string())
}

fn criterion_1(sweep: &SweepResult) -> Outcome {
    let last = sweep.len() - 1;
    let shift = sweep.pointer_centroids[last];
    let err = rel(shift, 0.5);
    check(
        sweep.failures() == 0 && err < SHIFT_TOL,
        format!("T = {:.0}: shift {shift:.7} vs 0.5, relative error {err:.2e} (tol {SHIFT_TOL:e}), {} failed points", sweep.t_values[last], sweep.failures()),
    )
}

fn criterion_2(sweep: &SweepResult) -> Outcome {
    let Some(fit) = &sweep.fit else {
        return Err("no fit window with enough adiabatic points".into());
    };
    check(
        fit.slope >= SLOPE_RANGE.0 && fit.slope <= SLOPE_RANGE.1 && fit.r_squared > R2_MIN,
        format!(
            "slope {:.4} in [{}, {}], r^2 {:.5} > {R2_MIN} over {} points",
            fit.slope,
            SLOPE_RANGE.0,
            SLOPE_RANGE.1,
            fit.r_squared,
            fit.window.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut config = qubit_benchmark_config(PI / 3.0, 1.0).map_err(|e| e.to_string())?;
    config.system.hamiltonian = HermitianOperator::pauli_z().scaled(-1.0);
    let (_, runs) = parallel_sweep(&config, &log_spaced(5.0, 2500.0, 8), worker_count()).map_err(|e| e.to_string())?;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for r in &runs {
        let r = r.as_ref().map_err(|e| e.to_string())?;
        worst = (worst.0.max(r.disturbance.abs()), worst.1.max(r.entanglement_entropy.abs()));
    }
    check(
        worst.0 < FIXED_POINT_TOL && worst.1 < FIXED_POINT_TOL,
        format!("max disturbance {:.2e}, max entropy {:.2e} over 8 values of T (tol {FIXED_POINT_TOL:e})", worst.0, worst.1),
    )
}

fn criterion_4() -> Outcome {
    let grid = PointerGrid::new(64, -8.0, 8.0).map_err(|e| e.to_string())?;
    let q = HermitianOperator::spin_along([0.3, 0.4, 0.8]);
    let psi = StateVector::bloch(1.1, 0.3)
        .tensor(&grid.gaussian_packet(-0.5, 1.0).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let closed = impulsive_propagator(&q, &grid, &psi).map_err(|e| e.to_string())?;
    let h = CompositeHamiltonian::new(
        HermitianOperator::zeros(2),
        q,
        Apparatus::Grid(GridApparatus::free(grid)),
        CouplingProfile::rectangular(1.0).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let (generic, _) = propagate(&h, &psi, &PropagationOptions::default()).map_err(|e| e.to_string())?;
    let diff = closed.max_amplitude_difference(&generic).map_err(|e| e.to_string())?;
    check(diff < IMPULSIVE_TOL, format!("max amplitude deviation {diff:.2e} (tol {IMPULSIVE_TOL:e})"))
}

fn criterion_5() -> Outcome {
    let psi = StateVector::from_amplitudes(vec![C64::new(0.5, 0.0), C64::new(0.75f64.sqrt(), 0.0)]).map_err(|e| e.to_string())?;
    let grid = PointerGrid::new(256, -8.0, 8.0).map_err(|e| e.to_string())?;
    let config = MeasurementConfig::new(
        Mode::Strong,
        1.0,
        SystemConfig { hamiltonian: HermitianOperator::zeros(2), observable: HermitianOperator::pauli_z(), initial: Some(psi) },
        ApparatusConfig::Pointer { grid, mass: None, potential: None, packet: PacketSpec { center: 0.0, width: 0.5 } },
    );
    let out = run_strong(&config).map_err(|e| e.to_string())?;
    let draw = |seed| -> Result<Vec<f64>, String> {
        let sampler = CollapseSampler::new(&out.entangled, &HermitianOperator::pauli_z(), seed).map_err(|e| e.to_string())?;
        Ok(sampler.take(BORN_SAMPLES).map(|c| c.eigenvalue).collect())
    };
    let a = draw(2024)?;
    let b = draw(2024)?;
    let n = BORN_SAMPLES as f64;
    let band = 3.0 * (n * 0.25 * 0.75).sqrt();
    let ups = a.iter().filter(|&&e| e > 0.0).count() as f64;
    let downs = n - ups;
    check(
        (ups - 0.25 * n).abs() < band && (downs - 0.75 * n).abs() < band && a == b,
        format!("counts {ups}/{downs} vs {}/{} +- {band:.1}, repeat identical: {}", 0.25 * n, 0.75 * n, a == b),
    )
}

fn criterion_6() -> Outcome {
    let mut config = qubit_benchmark_config(PI / 3.0, 40.0).map_err(|e| e.to_string())?;
    config.profile = ProfileShape::SineSquared { ramp_fraction: 0.25 };
    let h = config.hamiltonian().map_err(|e| e.to_string())?;
    let ApparatusConfig::Pointer { grid, packet, .. } = &config.apparatus else {
        return Err("benchmark apparatus is not a grid".into());
    };
    let nu = system_eigenstate(&config.system.hamiltonian, 0).map_err(|e| e.to_string())?;
    let psi = nu.tensor(&grid.gaussian_packet(packet.center, packet.width).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let study = convergence_order(&h, &psi, 64).map_err(|e| e.to_string())?;
    check(
        study.order >= ORDER_RANGE.0 && study.order <= ORDER_RANGE.1 && study.norm_drift < NORM_DRIFT_TOL,
        format!(
            "order {:.3} in [{}, {}], norm drift {:.1e} (tol {NORM_DRIFT_TOL:e})",
            study.order, ORDER_RANGE.0, ORDER_RANGE.1, study.norm_drift
        ),
    )
}

fn criterion_7() -> Outcome {
    let params = ColdAtomParams::default();
    let report = cold_atom_run(&params, FidelityLevel::Full).map_err(|e| e.to_string())?;
    let full = report.full.as_ref().ok_or("no full-grid outcome")?;
    let shift_err = rel(full.momentum_shift, report.analytic.momentum_shift);
    let width_err = rel(full.position_width, report.analytic.position_width);
    let disp_err = rel(report.summary.drift_displacement, TARGET_DISPLACEMENT);
    check(
        shift_err < COLD_ATOM_TOL && width_err < COLD_ATOM_TOL && disp_err < DISPLACEMENT_TOL,
        format!(
            "kick error {shift_err:.2e}, width error {width_err:.2e} (tol {COLD_ATOM_TOL}); drift {:.5} m vs {TARGET_DISPLACEMENT} m, error {disp_err:.2e} (tol {DISPLACEMENT_TOL})",
            report.summary.drift_displacement
        ),
    )
}

/// 16-level apparatus with `[Q_A, H_A] != 0`.
fn sixteen_levels() -> Result<(HermitianOperator, HermitianOperator), String> {
    let d = 16;
    let energies: Vec<f64> = (0..d).map(|j| j as f64 + 0.037 * (j * j) as f64).collect();
    let mut q = vec![0.0; d * d];
    for j in 0..d {
        q[j * d + j] = 1.57 * (j as f64 - 7.5);
        if j + 1 < d {
            q[j * d + j + 1] = 0.3;
            q[(j + 1) * d + j] = 0.3;
        }
    }
    Ok((HermitianOperator::diagonal(&energies), HermitianOperator::from_real(d, &q).map_err(|e| e.to_string())?))
}

fn levels_config(mode: Mode, h_a: HermitianOperator, q_a: HermitianOperator, total_time: f64) -> Result<MeasurementConfig, String> {
    let y = construct_y_operator(&q_a, &h_a).map_err(|e| e.to_string())?;
    let spacing = 2.0 * PI / y.spectral_range() * 15.0 / 16.0;
    Ok(MeasurementConfig::new(
        mode,
        total_time,
        SystemConfig { hamiltonian: tilted_hamiltonian(PI / 3.0), observable: HermitianOperator::pauli_z(), initial: None },
        ApparatusConfig::Levels { hamiltonian: h_a, observable: q_a, packet: PacketSpec { center: -0.25, width: 1.5 * spacing } },
    ))
}

fn criterion_8() -> Outcome {
    let (h_a, q_a) = sixteen_levels()?;
    let base = levels_config(Mode::Generalized, h_a, q_a, 1.0)?;
    let t_values = log_spaced(60.0, 2000.0, 5);
    let (_, runs) = parallel_sweep(&base, &t_values, worker_count()).map_err(|e| e.to_string())?;
    let last = runs.last().expect("five points").as_ref().map_err(|e| e.to_string())?;
    let shift_err = rel(last.shift(), 0.5);

    let energies: Vec<f64> = (0..16).map(|j| j as f64 + 0.037 * (j * j) as f64).collect();
    let charges: Vec<f64> = (0..16).map(|j| 1.57 * (j as f64 - 7.5)).collect();
    let (h_c, q_c) = (HermitianOperator::diagonal(&energies), HermitianOperator::diagonal(&charges));
    let y = construct_y_operator(&q_c, &h_c).map_err(|e| e.to_string())?;
    let y_err = max_abs(&(y.matrix() - q_c.matrix()));
    let gen = run(&levels_config(Mode::Generalized, h_c.clone(), q_c.clone(), 200.0)?).map_err(|e| e.to_string())?;
    let std = run(&levels_config(Mode::Protective, h_c, q_c, 200.0)?).map_err(|e| e.to_string())?;
    let run_err = (gen.pointer_centroid - std.pointer_centroid).abs().max((gen.disturbance - std.disturbance).abs());
    check(
        shift_err < GENERALIZED_TOL && y_err < Y_TOL && run_err < Y_TOL,
        format!(
            "T = 2000: shift {:.5} vs 0.5, error {shift_err:.2e} (tol {GENERALIZED_TOL}); commuting case |Y - Q_A| {y_err:.1e}, run difference {run_err:.1e} (tol {Y_TOL:e})",
            last.shift()
        ),
    )
}

fn criterion_9() -> Outcome {
    let config = qubit_benchmark_config(PI / 3.0, 2500.0).map_err(|e| e.to_string())?;
    let (first, second) = run_sequential(&config, &HermitianOperator::pauli_x()).map_err(|e| e.to_string())?;
    let (a, b) = (rel(first.shift(), 0.5), rel(second.shift(), (PI / 3.0).sin()));
    check(
        a < SEQUENTIAL_TOL && b < SEQUENTIAL_TOL,
        format!(
            "sigma_z {:.5} vs 0.5 (error {a:.2e}), sigma_x {:.5} vs {:.5} (error {b:.2e}), tol {SEQUENTIAL_TOL}",
            first.shift(),
            second.shift(),
            (PI / 3.0).sin()
        ),
    )
}

const CONFIG: &str = r#"{
  "schema_version": 1,
  "mode": "strong",
  "total_time": 1.0,
  "rng_seed": 17,
  "system": {
    "hamiltonian": {"type": "zero", "dim": 2},
    "observable": {"type": "spin", "axis": [0.0, 0.0, 1.0], "scale": 1.0},
    "initial": {"type": "bloch", "theta": 2.0943951023931957, "phi": 0.0}
  },
  "apparatus": {"type": "grid", "n_points": 256, "r_min": -8.0, "r_max": 8.0, "packet": {"center": 0.0, "width": 0.5}}
}"#;

fn criterion_10() -> Outcome {
    let origin = Path::new("acceptance.json");
    let doc = parse_config_str(CONFIG, origin).map_err(|e| e.to_string())?;
    let ConfigDocument::Measurement(parsed) = &doc else {
        return Err("expected a measurement config".into());
    };
    let again = parse_config_str(&doc.to_json(), origin).map_err(|e| e.to_string())?;
    let ConfigDocument::Measurement(reparsed) = &again else {
        return Err("round trip changed the document kind".into());
    };
    let config_ok = reparsed.file == parsed.file
        && reparsed.config == parsed.config
        && reparsed.defaults_applied.is_empty()
        && again.to_json() == doc.to_json();

    let emit = |config: &MeasurementConfig| -> Result<(String, String, Vec<RunResult>), String> {
        let t = [config.total_time];
        let runs = vec![run(config)];
        let rows = sweep_rows(&SweepResult::assemble(&t, runs.clone(), config.tolerance));
        let value = serde_json::to_value(&parsed.file).map_err(|e| e.to_string())?;
        let json = ResultDocument::new(value, config.rng_seed, &t, &runs).to_json();
        let ok = runs.into_iter().collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        Ok((csv_string(&rows), json, ok))
    };
    let (csv_a, json_a, results) = emit(&parsed.config)?;
    let (csv_b, json_b, _) = emit(&parsed.config)?;
    let bytes_ok = csv_a == csv_b && json_a == json_b;

    let back = ResultDocument::from_json(&json_a).map_err(|e| e.to_string())?;
    let record = back.results[0].result.as_ref().ok_or("missing record")?;
    let restored = RunResult::try_from(record).map_err(|e| e.to_string())?;
    let json_ok = restored == results[0] && back.to_json() == json_a;
    check(
        config_ok && bytes_ok && json_ok,
        format!("config round trip {config_ok}, byte-identical CSV and JSON {bytes_ok}, JSON round trip {json_ok}"),
    )
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let start = Instant::now();
    let sweep = shift_sweep();
    let mut failed = 0;
    let mut report = |n: usize, outcome: Outcome, elapsed: f64| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {tag}  {detail}  [{elapsed:.1} s]");
    };
    let sweep_time = start.elapsed().as_secs_f64();
    match &sweep {
        Ok(s) => {
            report(1, criterion_1(s), sweep_time);
            report(2, criterion_2(s), 0.0);
        }
        Err(e) => {
            report(1, Err(e.clone()), sweep_time);
            report(2, Err(e.clone()), 0.0);
        }
    }
    let rest: [(usize, fn() -> Outcome); 8] = [
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    for (n, f) in rest {
        let t = Instant::now();
        let outcome = f();
        report(n, outcome, t.elapsed().as_secs_f64());
    }
    println!("{} of 10 criteria passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
