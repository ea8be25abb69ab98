#![allow(dead_code)]

use core::f64::consts::PI;

use protective_core::dynamics::ProfileShape;
use protective_core::hilbert::{HermitianOperator, PointerGrid};
use protective_core::measurement::{ApparatusConfig, MeasurementConfig, Mode, PacketSpec, SystemConfig};

/// `-sigma . n0` with `n0` at polar angle `theta` in the x-z plane.
pub fn tilted_hamiltonian(theta: f64) -> HermitianOperator {
    HermitianOperator::spin_along([-theta.sin(), 0.0, -theta.cos()])
}

/// Tilted qubit coupled through `sigma_z` to a free 256-point pointer.
pub fn tilted_qubit(theta: f64, total_time: f64) -> MeasurementConfig {
    let grid = PointerGrid::new(256, -4.0, 4.0).unwrap();
    let mut c = MeasurementConfig::new(
        Mode::Protective,
        total_time,
        SystemConfig { hamiltonian: tilted_hamiltonian(theta), observable: HermitianOperator::pauli_z(), initial: None },
        ApparatusConfig::Pointer { grid, mass: None, potential: None, packet: PacketSpec { center: 0.0, width: 0.15 } },
    );
    c.profile = ProfileShape::Rectangular;
    c.tolerance = 1e-10;
    c
}

pub fn tilted_qubit_pi3(total_time: f64) -> MeasurementConfig {
    tilted_qubit(PI / 3.0, total_time)
}

/// 16-level apparatus with `[Q_A, H_A] != 0`.
pub fn sixteen_level_apparatus() -> (HermitianOperator, HermitianOperator) {
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
    (HermitianOperator::diagonal(&energies), HermitianOperator::from_real(d, &q).unwrap())
}

pub fn generalized(total_time: f64) -> MeasurementConfig {
    let (h_a, q_a) = sixteen_level_apparatus();
    // Conjugate spacing: 2 pi / (range of Y) for 16 levels.
    let mut c = MeasurementConfig::new(
        Mode::Generalized,
        total_time,
        SystemConfig { hamiltonian: tilted_hamiltonian(PI / 3.0), observable: HermitianOperator::pauli_z(), initial: None },
        ApparatusConfig::Levels { hamiltonian: h_a, observable: q_a, packet: PacketSpec { center: 0.0, width: 0.0 } },
    );
    c.apparatus = match c.apparatus {
        ApparatusConfig::Levels { hamiltonian, observable, .. } => {
            let y = protective_core::measurement::construct_y_operator(&observable, &hamiltonian).unwrap();
            let spacing = 2.0 * PI / y.spectral_range() * 15.0 / 16.0;
            ApparatusConfig::Levels { hamiltonian, observable, packet: PacketSpec { center: -0.25, width: 1.5 * spacing } }
        }
        other => other,
    };
    c
}
