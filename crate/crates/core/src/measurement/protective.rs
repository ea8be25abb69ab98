use alloc::format;

use super::frame::{ConjugateFrame, PointerFrame};
use super::strong::{initial_system_state, strong_result};
use super::{ApparatusConfig, MeasurementConfig, Mode, RunResult};
use crate::dynamics::{first_order_prediction, propagate, system_eigenstate, CompositeHamiltonian};
use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, PartialTrace, StateVector, TensorProduct, DEGENERACY_TOL};

/// Largest apparatus dimension accepted in generalized mode.
pub const MAX_GENERALIZED_DIM: usize = 64;

/// Runs the pipeline selected by `config.mode`.
pub fn run(config: &MeasurementConfig) -> Result<RunResult> {
    run_with_state(config).map(|(r, _)| r)
}

/// As [`run`], also returning the final composite state (the collapsed
/// branch in strong mode).
pub fn run_with_state(config: &MeasurementConfig) -> Result<(RunResult, StateVector)> {
    match config.mode {
        Mode::Strong => strong_result(config),
        Mode::Protective => protective(config),
        Mode::Generalized => generalized(config),
    }
}

/// `Y = sum_j <a_j|Q_A|a_j> |a_j><a_j|` over the eigenvectors `|a_j>` of a
/// non-degenerate `H_A`.
pub fn construct_y_operator(q_apparatus: &HermitianOperator, h_apparatus: &HermitianOperator) -> Result<HermitianOperator> {
    let d = h_apparatus.dim();
    if q_apparatus.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: q_apparatus.dim() });
    }
    let spectrum = h_apparatus.spectrum();
    let tol = DEGENERACY_TOL * h_apparatus.spectral_range();
    if let Some(w) = spectrum.values.windows(2).find(|w| w[1] - w[0] <= tol) {
        return Err(Error::Precondition(format!(
            "apparatus Hamiltonian is degenerate near {}; its eigenbasis is not unique",
            w[0]
        )));
    }
    let diag = q_apparatus.in_basis(&spectrum.vectors).diagonal().iter().map(|z| z.re).collect();
    HermitianOperator::from_spectrum(diag, spectrum.vectors.clone())
}

/// Protective measurement: weak adiabatic coupling to a pointer whose
/// reading is conserved by the apparatus Hamiltonian.
///
/// Accepts a grid pointer with either a kinetic term or a potential in the
/// pointer coordinate (not both), or a levels apparatus with
/// `[Q_A, H_A] = 0`, read in the coordinate conjugate to `Q_A`.
pub fn run_protective(config: &MeasurementConfig) -> Result<RunResult> {
    protective(config).map(|(r, _)| r)
}

fn protective(config: &MeasurementConfig) -> Result<(RunResult, StateVector)> {
    if config.mode == Mode::Strong {
        return Err(Error::Mode("run_protective called with mode strong".into()));
    }
    config.validate()?;
    let h = config.hamiltonian()?;
    let frame = match &config.apparatus {
        ApparatusConfig::Pointer { grid, mass, potential, .. } => {
            if mass.is_some() && potential.is_some() {
                return Err(Error::Mode(
                    "pointer with both mass and potential: the reading is not conserved; use generalized mode".into(),
                ));
            }
            PointerFrame::Grid(*grid)
        }
        ApparatusConfig::Levels { hamiltonian, observable, .. } => {
            if !h.apparatus().commutes() {
                return Err(Error::Mode("[Q_A, H_A] != 0: protective mode needs commuting apparatus operators; use generalized mode".into()));
            }
            PointerFrame::Conjugate(ConjugateFrame::new(observable, hamiltonian)?)
        }
    };
    adiabatic_run(config, &h, &frame)
}

/// Generalized protective measurement: the pointer is prepared and read in
/// the coordinate conjugate to the Y operator built from `Q_A` and `H_A`.
pub fn run_generalized(config: &MeasurementConfig) -> Result<RunResult> {
    generalized(config).map(|(r, _)| r)
}

fn generalized(config: &MeasurementConfig) -> Result<(RunResult, StateVector)> {
    if config.mode == Mode::Strong {
        return Err(Error::Mode("run_generalized called with mode strong".into()));
    }
    config.validate()?;
    let (h_a, q_a, packet) = match &config.apparatus {
        ApparatusConfig::Pointer { mass, potential, .. } if mass.is_none() || potential.is_none() => {
            return protective(config);
        }
        ApparatusConfig::Pointer { packet, .. } => {
            let app = config.apparatus.build()?;
            (app.hamiltonian(), app.observable(), *packet)
        }
        ApparatusConfig::Levels { hamiltonian, observable, packet } => (hamiltonian.clone(), observable.clone(), *packet),
    };
    if h_a.dim() > MAX_GENERALIZED_DIM {
        return Err(Error::Sizing(format!(
            "generalized mode supports apparatus dimension <= {MAX_GENERALIZED_DIM}, got {}",
            h_a.dim()
        )));
    }
    let y = construct_y_operator(&q_a, &h_a)?;
    let frame = PointerFrame::Conjugate(ConjugateFrame::new(&y, &h_a)?);
    let levels = MeasurementConfig {
        apparatus: ApparatusConfig::Levels { hamiltonian: h_a, observable: q_a, packet },
        ..config.clone()
    };
    adiabatic_run(config, &levels.hamiltonian()?, &frame)
}

/// Two protective runs on the same system: the first measures the
/// configured observable; the second measures `second_observable` starting
/// from the dominant eigenvector of the first run's reduced system state.
pub fn run_sequential(config: &MeasurementConfig, second_observable: &HermitianOperator) -> Result<(RunResult, RunResult)> {
    let first = run(config)?;
    let carried = first.reduced_system_state.dominant_eigenvector();
    let mut next = config.clone();
    next.system.observable = second_observable.clone();
    next.system.initial = Some(carried);
    let second = run(&next)?;
    Ok((first, second))
}

fn adiabatic_run(
    config: &MeasurementConfig,
    h: &CompositeHamiltonian,
    frame: &PointerFrame,
) -> Result<(RunResult, StateVector)> {
    let nu = system_eigenstate(&config.system.hamiltonian, config.nu_index)?;
    let prediction = first_order_prediction(h, config.nu_index)?;
    let system = match &config.system.initial {
        Some(_) => initial_system_state(config)?,
        None => nu.clone(),
    };
    let pointer = frame.prepare(&config.apparatus.packet())?;
    let start = frame.readout(&pointer, 0.0)?;
    let initial = system.tensor(&pointer)?;
    let (final_state, report) = propagate(h, &initial, &config.propagation_options())?;
    let end = frame.readout(&final_state, config.total_time)?;
    let rho = final_state.partial_trace(0)?;
    let result = RunResult {
        mode: config.mode,
        total_time: config.total_time,
        initial_centroid: start.centroid,
        pointer_centroid: end.centroid,
        pointer_width: end.width,
        predicted_shift: prediction.shift,
        disturbance: 1.0 - rho.fidelity_pure(&nu)?,
        entanglement_entropy: rho.von_neumann_entropy(),
        reduced_system_state: rho,
        validity: prediction.validity,
        report,
        seed: config.rng_seed,
        collapse: None,
    };
    Ok((result, final_state))
}

