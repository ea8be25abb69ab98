use super::Mode;
use crate::dynamics::PropagationReport;
use crate::hilbert::{BornWeight, DensityOperator};

/// Outcome of one measurement run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub mode: Mode,
    pub total_time: f64,
    /// Pointer centroid of the prepared packet.
    pub initial_centroid: f64,
    pub pointer_centroid: f64,
    pub pointer_width: f64,
    /// Expected pointer displacement: `<nu|Q_S|nu>` in adiabatic modes, the
    /// sampled eigenvalue in strong mode.
    pub predicted_shift: f64,
    pub reduced_system_state: DensityOperator,
    /// `1 - <nu|rho_S|nu>` against the prepared system state.
    pub disturbance: f64,
    /// Von Neumann entropy of the system factor (nats); in strong mode,
    /// of the entangled state before collapse.
    pub entanglement_entropy: f64,
    /// Adiabaticity figure; infinite for strong mode.
    pub validity: f64,
    pub report: PropagationReport,
    pub seed: u64,
    /// Sampled outcome of a strong measurement.
    pub collapse: Option<BornWeight>,
}

impl RunResult {
    /// Measured pointer displacement.
    pub fn shift(&self) -> f64 {
        self.pointer_centroid - self.initial_centroid
    }
}
