//! Tilted-qubit benchmark: `H_S = -sigma.n0(theta)` with `n0` in the x-z
//! plane, measured through `Q_S = sigma_z` by a free pointer. The ground
//! state gives `<sigma_z> = cos(theta)`.

use std::f64::consts::PI;

use protective_core::analysis::SweepResult;
use protective_core::dynamics::ProfileShape;
use protective_core::hilbert::{HermitianOperator, PointerGrid};
use protective_core::measurement::{ApparatusConfig, MeasurementConfig, Mode, PacketSpec, SystemConfig};
use protective_core::{Error, Result};

use crate::parallel::{parallel_sweep, worker_count};

pub const GRID_POINTS: usize = 256;
pub const GRID_HALF_WIDTH: f64 = 4.0;
pub const PACKET_WIDTH: f64 = 0.15;
pub const TOLERANCE: f64 = 1e-10;

pub fn tilted_hamiltonian(theta: f64) -> HermitianOperator {
    HermitianOperator::spin_along([-theta.sin(), 0.0, -theta.cos()])
}

/// Protective config with a rectangular profile, so that the leakage
/// falls off as a clean power of `T`.
pub fn qubit_benchmark_config(theta: f64, total_time: f64) -> Result<MeasurementConfig> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Domain(format!("theta must lie in (0, pi), got {theta}")));
    }
    let grid = PointerGrid::new(GRID_POINTS, -GRID_HALF_WIDTH, GRID_HALF_WIDTH)?;
    let mut c = MeasurementConfig::new(
        Mode::Protective,
        total_time,
        SystemConfig { hamiltonian: tilted_hamiltonian(theta), observable: HermitianOperator::pauli_z(), initial: None },
        ApparatusConfig::Pointer { grid, mass: None, potential: None, packet: PacketSpec { center: 0.0, width: PACKET_WIDTH } },
    );
    c.profile = ProfileShape::Rectangular;
    c.tolerance = TOLERANCE;
    Ok(c)
}

pub fn qubit_benchmark_run(theta: f64, t_values: &[f64]) -> Result<SweepResult> {
    let base = qubit_benchmark_config(theta, t_values.first().copied().unwrap_or(1.0))?;
    parallel_sweep(&base, t_values, worker_count()).map(|(s, _)| s)
}
