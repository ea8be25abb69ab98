use alloc::format;
use alloc::vec::Vec;

use crate::dynamics::{Apparatus, CompositeHamiltonian, CouplingProfile, GridApparatus, ProfileShape, PropagationOptions};
use crate::error::{Error, Result};
use crate::hilbert::{HermitianOperator, PointerGrid, StateVector};

/// Starting slice count when the config leaves `n_steps` to the propagator.
pub const AUTO_START_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Strong,
    Protective,
    Generalized,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Strong => "strong",
            Mode::Protective => "protective",
            Mode::Generalized => "generalized",
        }
    }
}

/// Initial pointer packet: centre and RMS width in the pointer coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub hamiltonian: HermitianOperator,
    pub observable: HermitianOperator,
    /// Overrides the initial system state. Defaults to the `nu_index`
    /// eigenstate of the Hamiltonian.
    pub initial: Option<StateVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ApparatusConfig {
    /// Pointer on a periodic grid; `Q_A` generates grid translations.
    Pointer { grid: PointerGrid, mass: Option<f64>, potential: Option<Vec<f64>>, packet: PacketSpec },
    /// Finite-level apparatus. The packet lives in the coordinate conjugate
    /// to `Q_A` (protective) or to the Y operator (generalized).
    Levels { hamiltonian: HermitianOperator, observable: HermitianOperator, packet: PacketSpec },
}

impl ApparatusConfig {
    pub fn packet(&self) -> PacketSpec {
        match self {
            Self::Pointer { packet, .. } | Self::Levels { packet, .. } => *packet,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pointer { grid, .. } => grid.n_points(),
            Self::Levels { hamiltonian, .. } => hamiltonian.dim(),
        }
    }

    pub fn build(&self) -> Result<Apparatus> {
        match self {
            Self::Pointer { grid, mass, potential, .. } => {
                Ok(Apparatus::Grid(GridApparatus::new(*grid, *mass, potential.clone())?))
            }
            Self::Levels { hamiltonian, observable, .. } => Apparatus::levels(hamiltonian.clone(), observable.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementConfig {
    pub mode: Mode,
    pub total_time: f64,
    pub profile: ProfileShape,
    /// Fixed starting slice count; `None` starts at [`AUTO_START_STEPS`].
    pub n_steps: Option<usize>,
    /// Richardson tolerance on the final amplitudes.
    pub tolerance: f64,
    pub max_steps: usize,
    pub system: SystemConfig,
    pub apparatus: ApparatusConfig,
    pub nu_index: usize,
    pub rng_seed: u64,
}

impl MeasurementConfig {
    /// Config with default numerics: sine-squared ramps over 10% of `T`,
    /// tolerance 1e-8, automatic slice count.
    pub fn new(mode: Mode, total_time: f64, system: SystemConfig, apparatus: ApparatusConfig) -> Self {
        let defaults = PropagationOptions::default();
        Self {
            mode,
            total_time,
            profile: ProfileShape::SineSquared { ramp_fraction: 0.1 },
            n_steps: None,
            tolerance: defaults.tolerance,
            max_steps: defaults.max_steps,
            system,
            apparatus,
            nu_index: 0,
            rng_seed: 0,
        }
    }

    pub fn with_total_time(&self, total_time: f64) -> Self {
        Self { total_time, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.coupling_profile()?;
        let ds = self.system.hamiltonian.dim();
        if self.system.observable.dim() != ds {
            return Err(Error::DimensionMismatch { expected: ds, found: self.system.observable.dim() });
        }
        if let Some(init) = &self.system.initial {
            if init.dim() != ds {
                return Err(Error::DimensionMismatch { expected: ds, found: init.dim() });
            }
        }
        if self.nu_index >= ds {
            return Err(Error::Validation(format!("nu_index {} out of range for system dimension {ds}", self.nu_index)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Validation(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        let packet = self.apparatus.packet();
        if !packet.width.is_finite() || !(packet.width > 0.0) || !packet.center.is_finite() {
            return Err(Error::Sizing(format!("packet centre {} / width {} invalid", packet.center, packet.width)));
        }
        self.apparatus.build().map(|_| ())
    }

    pub fn coupling_profile(&self) -> Result<CouplingProfile> {
        CouplingProfile::new(self.total_time, self.profile)
    }

    pub fn propagation_options(&self) -> PropagationOptions {
        PropagationOptions {
            n_steps: self.n_steps.unwrap_or(AUTO_START_STEPS),
            tolerance: self.tolerance,
            max_steps: self.max_steps,
        }
    }

    pub fn hamiltonian(&self) -> Result<CompositeHamiltonian> {
        CompositeHamiltonian::new(
            self.system.hamiltonian.clone(),
            self.system.observable.clone(),
            self.apparatus.build()?,
            self.coupling_profile()?,
        )
    }
}
