use alloc::format;
use alloc::vec::Vec;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{frame, MeasurementConfig, Mode, RunResult};
use crate::dynamics::{impulsive_propagator, system_eigenstate, PropagationReport};
use crate::error::{Error, Result};
use crate::hilbert::{BornWeight, HermitianOperator, PartialTrace, StateVector, TensorProduct, C64};

/// Entangled state after an impulsive coupling, with the Born weights of
/// `Q_S` in the initial system state.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongOutcome {
    pub entangled: StateVector,
    pub outcomes: Vec<BornWeight>,
}

/// One sampled branch.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseOutcome {
    pub eigenvalue: f64,
    pub post_state: StateVector,
    pub probability: f64,
}

pub(crate) fn initial_system_state(config: &MeasurementConfig) -> Result<StateVector> {
    match &config.system.initial {
        Some(s) => Ok(s.clone()),
        None => system_eigenstate(&config.system.hamiltonian, config.nu_index),
    }
}

pub fn run_strong(config: &MeasurementConfig) -> Result<StrongOutcome> {
    if config.mode != Mode::Strong {
        return Err(Error::Mode(format!("run_strong called with mode {}", config.mode.as_str())));
    }
    config.validate()?;
    let super::ApparatusConfig::Pointer { grid, packet, .. } = &config.apparatus else {
        return Err(Error::Mode("strong measurement needs a pointer grid apparatus".into()));
    };
    let system = initial_system_state(config)?;
    let initial = system.tensor(&grid.gaussian_packet(packet.center, packet.width)?)?;
    let entangled = impulsive_propagator(&config.system.observable, grid, &initial)?;
    let outcomes = config.system.observable.born_weights(&system)?;
    Ok(StrongOutcome { entangled, outcomes })
}

/// Branches `(P_i (x) I)|psi>` of a composite state over the eigenspaces
/// of a system observable.
pub struct CollapseSampler {
    rng: ChaCha8Rng,
    branches: Vec<CollapseOutcome>,
}

impl CollapseSampler {
    pub fn new(entangled: &StateVector, q_system: &HermitianOperator, seed: u64) -> Result<Self> {
        let ds = q_system.dim();
        if ds == 0 || !entangled.dim().is_multiple_of(ds) {
            return Err(Error::DimensionMismatch { expected: ds, found: entangled.dim() });
        }
        let da = entangled.dim() / ds;
        let spectrum = q_system.spectrum();
        let amps = entangled.amplitudes();
        let mut branches = Vec::new();
        for space in q_system.eigenspaces() {
            let cols = spectrum.vectors.columns(space.columns.start, space.columns.len());
            let projector = cols * cols.adjoint();
            let mut branch = DVector::<C64>::zeros(entangled.dim());
            for a in 0..da {
                for r in 0..ds {
                    let mut acc = C64::new(0.0, 0.0);
                    for c in 0..ds {
                        acc += projector[(r, c)] * amps[c * da + a];
                    }
                    branch[r * da + a] = acc;
                }
            }
            let probability = branch.norm_squared();
            if probability < 1e-14 {
                continue;
            }
            let post_state = StateVector::new(branch.iter().copied().collect(), entangled.dims().to_vec())?;
            branches.push(CollapseOutcome { eigenvalue: space.value, post_state, probability });
        }
        Ok(Self { rng: ChaCha8Rng::seed_from_u64(seed), branches })
    }

    pub fn branches(&self) -> &[CollapseOutcome] {
        &self.branches
    }

    /// Index into [`branches`](Self::branches) of the next sample.
    pub fn sample_index(&mut self) -> usize {
        let total: f64 = self.branches.iter().map(|b| b.probability).sum();
        let mut u = self.rng.random::<f64>() * total;
        for (i, b) in self.branches.iter().enumerate() {
            if u < b.probability {
                return i;
            }
            u -= b.probability;
        }
        self.branches.len() - 1
    }
}

impl Iterator for CollapseSampler {
    type Item = CollapseOutcome;

    fn next(&mut self) -> Option<CollapseOutcome> {
        if self.branches.is_empty() {
            return None;
        }
        let i = self.sample_index();
        Some(self.branches[i].clone())
    }
}

/// Samples one branch of `entangled` with Born probabilities for
/// `q_system`. Deterministic in `seed`.
pub fn collapse_sample(entangled: &StateVector, q_system: &HermitianOperator, seed: u64) -> Result<CollapseOutcome> {
    CollapseSampler::new(entangled, q_system, seed)?
        .next()
        .ok_or_else(|| Error::Validation("state has no branch with non-zero weight".into()))
}

/// Strong measurement followed by one seeded collapse, summarized as a
/// [`RunResult`] together with the collapsed state.
pub fn strong_result(config: &MeasurementConfig) -> Result<(RunResult, StateVector)> {
    let outcome = run_strong(config)?;
    let super::ApparatusConfig::Pointer { grid, packet, .. } = &config.apparatus else {
        unreachable!("run_strong checked the apparatus")
    };
    let system = initial_system_state(config)?;
    let initial_packet = grid.gaussian_packet(packet.center, packet.width)?;
    let start = frame::readout(&initial_packet, grid)?;
    let collapsed = collapse_sample(&outcome.entangled, &config.system.observable, config.rng_seed)?;
    let end = frame::readout(&collapsed.post_state, grid)?;
    let rho = collapsed.post_state.partial_trace(0)?;
    let entropy = outcome.entangled.partial_trace(0)?.von_neumann_entropy();
    let result = RunResult {
        mode: Mode::Strong,
        total_time: config.total_time,
        initial_centroid: start.centroid,
        pointer_centroid: end.centroid,
        pointer_width: end.width,
        predicted_shift: collapsed.eigenvalue,
        disturbance: 1.0 - rho.fidelity_pure(&system)?,
        reduced_system_state: rho,
        entanglement_entropy: entropy,
        validity: f64::INFINITY,
        report: PropagationReport {
            n_steps: 1,
            step_size: config.total_time,
            richardson_error_estimate: 0.0,
            norm_drift: (outcome.entangled.norm() - 1.0).abs(),
        },
        seed: config.rng_seed,
        collapse: Some(BornWeight { eigenvalue: collapsed.eigenvalue, probability: collapsed.probability }),
    };
    Ok((result, collapsed.post_state))
}
