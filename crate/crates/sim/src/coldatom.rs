//! Cold-atom Stern-Gerlach scenario.
//!
//! A spin-1/2 atom of mass `M` moves through a uniform field `B0 n0` while a
//! weak gradient pulse couples `sigma.n` to the position `x`:
//!
//! ```text
//! H = P^2/2M - mu B0 sigma.n0 - mu g(t) Bi x sigma.n,    int g dt = 1
//! ```
//!
//! In momentum space `-x` generates translations of `p`, so the pointer is
//! the atom's momentum and the expected kick is `mu Bi <sigma.n>`. `Bi` is
//! therefore the time-integrated gradient, in T s/m.
//!
//! Internally lengths are measured in units of the packet width `eps`,
//! times in units of the transit time `L/v`, and `hbar = 1`.

use log::{info, warn};
use protective_core::dynamics::ProfileShape;
use protective_core::hilbert::{HermitianOperator, PointerGrid, StateVector, C64};
use protective_core::measurement::{run_with_state, ApparatusConfig, MeasurementConfig, Mode, PacketSpec, RunResult, SystemConfig};
use protective_core::Error;
use serde::{Deserialize, Serialize};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
pub const RB87_MASS: f64 = 1.443e-25;
/// Position displacement after the default drift used to calibrate `Bi`.
pub const TARGET_DISPLACEMENT: f64 = 0.02;

/// Grid cells per momentum standard deviation.
const CELLS_PER_WIDTH: f64 = 4.0;
/// Free momentum range kept on each side of the two packet positions, in
/// momentum standard deviations.
const GRID_MARGIN_WIDTHS: f64 = 32.0;
const MAX_GRID_POINTS: usize = 1 << 16;
const RAMP_FRACTION: f64 = 0.1;
const START_STEPS: usize = 256;
const TOLERANCE: f64 = 1e-7;

/// Physical parameters in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColdAtomParams {
    /// kg
    pub mass: f64,
    /// J/T
    pub magnetic_moment: f64,
    /// T
    pub b0: f64,
    /// Time-integrated gradient, T s/m.
    pub b_gradient: f64,
    pub n0: [f64; 3],
    pub n: [f64; 3],
    /// Position-space RMS width, m.
    pub packet_width: f64,
    /// m
    pub interaction_length: f64,
    /// m/s
    pub velocity: f64,
    /// s
    pub drift_time: f64,
}

impl Default for ColdAtomParams {
    fn default() -> Self {
        let third = core::f64::consts::FRAC_PI_3;
        let mut p = Self {
            mass: RB87_MASS,
            magnetic_moment: BOHR_MAGNETON,
            b0: 1e-4,
            b_gradient: 0.0,
            n0: [0.0, 0.0, 1.0],
            n: [third.sin(), 0.0, third.cos()],
            packet_width: 1e-3,
            interaction_length: 0.3,
            velocity: 0.01,
            drift_time: 30.0,
        };
        p.b_gradient = p.calibrated_gradient(TARGET_DISPLACEMENT);
        p
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl ColdAtomParams {
    pub fn validate(&self) -> Result<(), Error> {
        for (name, v) in [
            ("mass", self.mass),
            ("magnetic_moment", self.magnetic_moment),
            ("b0", self.b0),
            ("b_gradient", self.b_gradient),
            ("packet_width", self.packet_width),
            ("interaction_length", self.interaction_length),
            ("velocity", self.velocity),
            ("drift_time", self.drift_time),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("n0", self.n0), ("n", self.n)] {
            let norm = dot(v, v).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!("{name} must be a unit vector, |{name}| = {norm}")));
            }
        }
        Ok(())
    }

    /// Interaction time `L / v`.
    pub fn interaction_time(&self) -> f64 {
        self.interaction_length / self.velocity
    }

    /// Gradient that moves the atom by `displacement` over the drift time.
    pub fn calibrated_gradient(&self, displacement: f64) -> f64 {
        displacement * self.mass / (self.magnetic_moment * self.drift_time * dot(self.n0, self.n))
    }

    /// Mean gradient over the interaction window, T/m.
    pub fn mean_gradient(&self) -> f64 {
        self.b_gradient / self.interaction_time()
    }

    pub fn to_internal(&self) -> InternalParams {
        let length = self.packet_width;
        let time = self.interaction_time();
        let momentum = HBAR / length;
        InternalParams {
            length_unit: length,
            time_unit: time,
            mass: self.mass * length * length / (HBAR * time),
            field_energy: self.magnetic_moment * self.b0 * time / HBAR,
            coupling: self.magnetic_moment * self.b_gradient / momentum,
            n0: self.n0,
            n: self.n,
            interaction_length: self.interaction_length / length,
            drift_time: self.drift_time / time,
            magnetic_moment: self.magnetic_moment,
        }
    }
}

/// Dimensionless parameters: `hbar = 1`, lengths in packet widths, times
/// in transit times. The packet width and the interaction time are 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalParams {
    /// m
    pub length_unit: f64,
    /// s
    pub time_unit: f64,
    pub mass: f64,
    /// `mu B0`.
    pub field_energy: f64,
    /// `mu Bi`: the coefficient of `sigma.n` in `Q_S`.
    pub coupling: f64,
    pub n0: [f64; 3],
    pub n: [f64; 3],
    pub interaction_length: f64,
    pub drift_time: f64,
    /// J/T; carried through unchanged to fix the field scales.
    pub magnetic_moment: f64,
}

impl InternalParams {
    pub fn to_si(&self) -> ColdAtomParams {
        let (length, time) = (self.length_unit, self.time_unit);
        let interaction_length = self.interaction_length * length;
        ColdAtomParams {
            mass: self.mass * HBAR * time / (length * length),
            magnetic_moment: self.magnetic_moment,
            b0: self.field_energy * HBAR / (self.magnetic_moment * time),
            b_gradient: self.coupling * HBAR / (length * self.magnetic_moment),
            n0: self.n0,
            n: self.n,
            packet_width: length,
            interaction_length,
            velocity: interaction_length / time,
            drift_time: self.drift_time * time,
        }
    }

    /// RMS momentum width of the initial packet.
    pub fn momentum_width(&self) -> f64 {
        0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityLevel {
    Analytic,
    Full,
}

/// Internal-unit outcome of one fidelity level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColdAtomOutcome {
    pub momentum_shift: f64,
    /// Position-space RMS width at the end of the interaction.
    pub position_width: f64,
    pub momentum_width: f64,
    pub entanglement_entropy: f64,
}

/// Headline numbers in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiSummary {
    /// kg m/s
    pub momentum_shift: f64,
    /// kg m/s
    pub momentum_spread: f64,
    pub shift_to_spread: f64,
    /// m, after `drift_time`.
    pub drift_displacement: f64,
    /// m
    pub final_width: f64,
    /// T/m, averaged over the interaction window.
    pub mean_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColdAtomReport {
    pub level: FidelityLevel,
    pub internal: InternalParams,
    pub analytic: ColdAtomOutcome,
    /// Present for [`FidelityLevel::Full`].
    pub full: Option<ColdAtomOutcome>,
    #[serde(skip)]
    pub run: Option<RunResult>,
    pub summary: SiSummary,
    pub warnings: Vec<String>,
}

impl ColdAtomReport {
    /// The outcome the summary was computed from.
    pub fn outcome(&self) -> &ColdAtomOutcome {
        self.full.as_ref().unwrap_or(&self.analytic)
    }
}

/// Closed forms: kick `mu Bi (n0.n)` and width `sqrt(eps^2 + T^2/(M eps)^2)`
/// with `eps = T = 1`.
pub fn analytic(internal: &InternalParams) -> ColdAtomOutcome {
    let m = internal.mass;
    ColdAtomOutcome {
        momentum_shift: internal.coupling * dot(internal.n0, internal.n),
        position_width: (1.0 + 1.0 / (m * m)).sqrt(),
        momentum_width: internal.momentum_width(),
        entanglement_entropy: 0.0,
    }
}

/// Momentum grid holding both the initial packet at `p = 0` and the
/// shifted one.
pub fn momentum_grid(internal: &InternalParams) -> Result<PointerGrid, Error> {
    let sigma = internal.momentum_width();
    let shift = internal.coupling * dot(internal.n0, internal.n);
    let spacing = sigma / CELLS_PER_WIDTH;
    let span = shift.abs() + 2.0 * GRID_MARGIN_WIDTHS * sigma;
    let n_points = ((span / spacing).ceil() as usize).next_power_of_two();
    if n_points > MAX_GRID_POINTS {
        return Err(Error::Sizing(format!(
            "momentum grid needs {n_points} points (> {MAX_GRID_POINTS}) to hold a kick of {shift:.3e} packet widths"
        )));
    }
    let length = n_points as f64 * spacing;
    let mid = 0.5 * shift;
    PointerGrid::new(n_points, mid - 0.5 * length, mid + 0.5 * length)
}

/// Protective-mode config for the full simulation: spin `H_S = -mu B0
/// sigma.n0`, `Q_S = mu Bi sigma.n`, pointer = momentum grid with the
/// kinetic energy as a coordinate potential.
pub fn measurement_config(internal: &InternalParams) -> Result<MeasurementConfig, Error> {
    let grid = momentum_grid(internal)?;
    let kinetic = grid.r_values().iter().map(|p| p * p / (2.0 * internal.mass)).collect();
    let system = SystemConfig {
        hamiltonian: HermitianOperator::spin_along(internal.n0).scaled(-internal.field_energy),
        observable: HermitianOperator::spin_along(internal.n).scaled(internal.coupling),
        initial: None,
    };
    let apparatus = ApparatusConfig::Pointer {
        grid,
        mass: None,
        potential: Some(kinetic),
        packet: PacketSpec { center: 0.0, width: internal.momentum_width() },
    };
    let mut config = MeasurementConfig::new(Mode::Protective, 1.0, system, apparatus);
    config.profile = ProfileShape::SineSquared { ramp_fraction: RAMP_FRACTION };
    config.n_steps = Some(START_STEPS);
    config.tolerance = TOLERANCE;
    Ok(config)
}

/// RMS position width of the apparatus marginal, from the momentum-space
/// amplitudes of every spin branch.
pub fn position_width(state: &StateVector, grid: &PointerGrid) -> f64 {
    let n = grid.n_points();
    let plan = grid.fft();
    let k = grid.wavenumbers();
    let mut weights = vec![0.0; n];
    for row in state.amplitudes().as_slice().chunks(n) {
        let mut buf: Vec<C64> = row.to_vec();
        plan.forward(&mut buf);
        for (w, z) in weights.iter_mut().zip(&buf) {
            *w += z.norm_sqr();
        }
    }
    let total: f64 = weights.iter().sum();
    let mean = weights.iter().zip(&k).map(|(w, k)| w * k).sum::<f64>() / total;
    let var = weights.iter().zip(&k).map(|(w, k)| w * (k - mean).powi(2)).sum::<f64>() / total;
    var.sqrt()
}

fn full(internal: &InternalParams) -> Result<(ColdAtomOutcome, RunResult), Error> {
    let config = measurement_config(internal)?;
    let ApparatusConfig::Pointer { grid, .. } = &config.apparatus else {
        unreachable!("cold-atom pointer is a grid")
    };
    let (result, state) = run_with_state(&config)?;
    let outcome = ColdAtomOutcome {
        momentum_shift: result.shift(),
        position_width: position_width(&state, grid),
        momentum_width: result.pointer_width,
        entanglement_entropy: result.entanglement_entropy,
    };
    Ok((outcome, result))
}

pub fn cold_atom_run(params: &ColdAtomParams, level: FidelityLevel) -> Result<ColdAtomReport, Error> {
    params.validate()?;
    let internal = params.to_internal();
    info!(
        "cold atom: M = {:.6e}, mu B0 = {:.6e}, mu Bi = {:.6e} (internal units)",
        internal.mass, internal.field_energy, internal.coupling
    );
    let analytic = analytic(&internal);
    let (full, run) = match level {
        FidelityLevel::Analytic => (None, None),
        FidelityLevel::Full => {
            let (outcome, run) = full(&internal)?;
            (Some(outcome), Some(run))
        }
    };
    let outcome = full.as_ref().unwrap_or(&analytic);
    let momentum_unit = HBAR / internal.length_unit;
    let momentum_shift = outcome.momentum_shift * momentum_unit;
    let momentum_spread = outcome.momentum_width * momentum_unit;
    let summary = SiSummary {
        momentum_shift,
        momentum_spread,
        shift_to_spread: momentum_shift / momentum_spread,
        drift_displacement: momentum_shift / params.mass * params.drift_time,
        final_width: outcome.position_width * internal.length_unit,
        mean_gradient: params.mean_gradient(),
    };
    let mut warnings = Vec::new();
    if summary.shift_to_spread.abs() < 1.0 {
        warnings.push(format!(
            "momentum shift / spread = {:.3e} < 1: the kick is not resolved against the packet",
            summary.shift_to_spread
        ));
    }
    for w in &warnings {
        warn!("{w}");
    }
    Ok(ColdAtomReport { level, internal, analytic, full, run, summary, warnings })
}
