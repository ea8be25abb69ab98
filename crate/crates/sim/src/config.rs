//! Strict JSON configuration files.
//!
//! Two document kinds share one loader: measurement configs (`"kind":
//! "measurement"`, the default) and cold-atom parameter sets (`"kind":
//! "cold_atom"`). Unknown keys are rejected. Every omitted optional field is
//! filled with its default, logged, and listed in `defaults_applied`; the
//! filled document serializes back to a file that parses to the same
//! structure with nothing left to fill.

use std::fs;
use std::path::Path;

use log::info;
use nalgebra::DMatrix;
use protective_core::dynamics::ProfileShape;
use protective_core::hilbert::{HermitianOperator, PointerGrid, StateVector, C64};
use protective_core::measurement::{
    construct_y_operator, ApparatusConfig, ConjugateFrame, MeasurementConfig, Mode, PacketSpec, SystemConfig,
    AUTO_START_STEPS,
};
use protective_core::{dynamics::PropagationOptions, Error};
use serde::{Deserialize, Serialize};

use crate::coldatom::{ColdAtomParams, TARGET_DISPLACEMENT};
use crate::error::{SimError, SimResult};

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_TOTAL_TIME: f64 = 100.0;
pub const DEFAULT_RAMP_FRACTION: f64 = 0.1;
pub const DEFAULT_GRID_POINTS: usize = 256;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 4.0;
/// Default grid packet width in grid spacings.
pub const DEFAULT_GRID_PACKET_CELLS: f64 = 5.0;
/// Default levels packet width in conjugate-coordinate spacings.
pub const DEFAULT_LEVELS_PACKET_CELLS: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentKind {
    Measurement,
    ColdAtom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Strong,
    Protective,
    Generalized,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Strong => Mode::Strong,
            ModeName::Protective => Mode::Protective,
            ModeName::Generalized => Mode::Generalized,
        }
    }
}

impl From<Mode> for ModeName {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strong => ModeName::Strong,
            Mode::Protective => ModeName::Protective,
            Mode::Generalized => ModeName::Generalized,
        }
    }
}

/// Hermitian operator, tagged by `type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// `scale * sigma.axis`.
    Spin { axis: [f64; 3], scale: f64 },
    /// `scale * sigma.n` with `n` at polar angle `theta`, azimuth `phi`.
    SpinPolar { theta: f64, phi: f64, scale: f64 },
    Diagonal { values: Vec<f64> },
    /// Row-major entries; `im` defaults to zero.
    Matrix {
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
    Zero { dim: usize },
    /// Real symmetric tridiagonal matrix.
    Tridiagonal { diagonal: Vec<f64>, off_diagonal: Vec<f64> },
}

impl OperatorSpec {
    pub fn build(&self) -> Result<HermitianOperator, Error> {
        match self {
            Self::Spin { axis, scale } => Ok(HermitianOperator::spin_along(*axis).scaled(*scale)),
            Self::SpinPolar { theta, phi, scale } => {
                let axis = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
                Ok(HermitianOperator::spin_along(axis).scaled(*scale))
            }
            Self::Diagonal { values } => {
                if values.is_empty() {
                    return Err(Error::Validation("diagonal operator needs at least one value".into()));
                }
                Ok(HermitianOperator::diagonal(values))
            }
            Self::Matrix { re, im } => {
                let d = re.len();
                let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|row| row.len() == d);
                if d == 0 || !square(re) || !im.as_ref().is_none_or(square) {
                    return Err(Error::Validation("matrix entries must form non-empty square arrays of equal size".into()));
                }
                let m = DMatrix::from_fn(d, d, |i, j| C64::new(re[i][j], im.as_ref().map_or(0.0, |im| im[i][j])));
                HermitianOperator::new(m)
            }
            Self::Zero { dim } => {
                if *dim == 0 {
                    return Err(Error::Validation("zero operator needs dim >= 1".into()));
                }
                Ok(HermitianOperator::zeros(*dim))
            }
            Self::Tridiagonal { diagonal, off_diagonal } => {
                let d = diagonal.len();
                if d == 0 || off_diagonal.len() + 1 != d {
                    return Err(Error::Validation(format!(
                        "tridiagonal operator needs off_diagonal of length {} for {d} diagonal entries",
                        d.saturating_sub(1)
                    )));
                }
                let mut entries = vec![0.0; d * d];
                for (j, &v) in diagonal.iter().enumerate() {
                    entries[j * d + j] = v;
                }
                for (j, &v) in off_diagonal.iter().enumerate() {
                    entries[j * d + j + 1] = v;
                    entries[(j + 1) * d + j] = v;
                }
                HermitianOperator::from_real(d, &entries)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    /// `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    Bloch { theta: f64, phi: f64 },
    /// Normalized amplitudes; `im` defaults to zero.
    Amplitudes {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
}

impl StateSpec {
    pub fn build(&self) -> Result<StateVector, Error> {
        match self {
            Self::Bloch { theta, phi } => Ok(StateVector::bloch(*theta, *phi)),
            Self::Amplitudes { re, im } => {
                if let Some(im) = im {
                    if im.len() != re.len() {
                        return Err(Error::DimensionMismatch { expected: re.len(), found: im.len() });
                    }
                }
                let amps = re
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| C64::new(r, im.as_ref().map_or(0.0, |im| im[i])))
                    .collect();
                StateVector::from_amplitudes(amps)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    SineSquared { ramp_fraction: f64 },
    Rectangular,
}

impl From<ProfileSpec> for ProfileShape {
    fn from(p: ProfileSpec) -> Self {
        match p {
            ProfileSpec::SineSquared { ramp_fraction } => ProfileShape::SineSquared { ramp_fraction },
            ProfileSpec::Rectangular => ProfileShape::Rectangular,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketFile {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub hamiltonian: OperatorSpec,
    pub observable: OperatorSpec,
    /// Absent: start in the `nu_index` eigenstate of the Hamiltonian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<StateSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ApparatusFile {
    Grid {
        n_points: usize,
        r_min: f64,
        r_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mass: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        potential: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        packet: Option<PacketFile>,
    },
    Levels {
        hamiltonian: OperatorSpec,
        observable: OperatorSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        packet: Option<PacketFile>,
    },
}

/// Measurement config as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<DocumentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    pub system: SystemFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apparatus: Option<ApparatusFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

/// Cold-atom parameters as written on disk; SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColdAtomFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<DocumentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnetic_moment: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    /// Absent: calibrated to a 2 cm displacement over `drift_time`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_gradient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMeasurement {
    /// The document with every default written out.
    pub file: MeasurementFile,
    pub config: MeasurementConfig,
    pub defaults_applied: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedColdAtom {
    pub file: ColdAtomFile,
    pub params: ColdAtomParams,
    pub defaults_applied: Vec<String>,
}

/// Parsed once per invocation, so the size gap between variants is moot.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigDocument {
    Measurement(ParsedMeasurement),
    ColdAtom(ParsedColdAtom),
}

impl ConfigDocument {
    pub fn defaults_applied(&self) -> &[String] {
        match self {
            Self::Measurement(m) => &m.defaults_applied,
            Self::ColdAtom(c) => &c.defaults_applied,
        }
    }

    /// Pretty JSON of the filled document.
    pub fn to_json(&self) -> String {
        match self {
            Self::Measurement(m) => to_pretty(&m.file),
            Self::ColdAtom(c) => to_pretty(&c.file),
        }
    }
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("config types serialize");
    s.push('\n');
    s
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub mode: Option<ModeName>,
    pub rng_seed: Option<u64>,
}

pub fn parse_config(path: &Path) -> SimResult<ConfigDocument> {
    parse_config_with(path, Overrides::default())
}

pub fn parse_config_with(path: &Path, overrides: Overrides) -> SimResult<ConfigDocument> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_config_str_with(&text, path, overrides)
}

/// Parses `text`; `origin` only labels errors.
pub fn parse_config_str(text: &str, origin: &Path) -> SimResult<ConfigDocument> {
    parse_config_str_with(text, origin, Overrides::default())
}

pub fn parse_config_str_with(text: &str, origin: &Path, overrides: Overrides) -> SimResult<ConfigDocument> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| SimError::config(origin, e))?;
    let kind = match value.get("kind") {
        None => DocumentKind::Measurement,
        Some(k) => DocumentKind::deserialize(k).map_err(|e| SimError::config(origin, format!("kind: {e}")))?,
    };
    let version = value.get("schema_version").and_then(serde_json::Value::as_u64);
    if let Some(v) = version {
        if v != u64::from(SCHEMA_VERSION) {
            return Err(SimError::config(origin, format!("schema_version {v} is not supported (expected {SCHEMA_VERSION})")));
        }
    }
    let doc = match kind {
        DocumentKind::Measurement => {
            let mut file: MeasurementFile = serde_json::from_str(text).map_err(|e| SimError::config(origin, e))?;
            file.mode = overrides.mode.or(file.mode);
            file.rng_seed = overrides.rng_seed.or(file.rng_seed);
            ConfigDocument::Measurement(resolve_measurement(file).map_err(|e| SimError::config(origin, e))?)
        }
        DocumentKind::ColdAtom => {
            let file: ColdAtomFile = serde_json::from_str(text).map_err(|e| SimError::config(origin, e))?;
            ConfigDocument::ColdAtom(resolve_cold_atom(file).map_err(|e| SimError::config(origin, e))?)
        }
    };
    for d in doc.defaults_applied() {
        info!("{}: default applied: {d}", origin.display());
    }
    Ok(doc)
}

fn fill<T: Clone + std::fmt::Debug>(slot: &mut Option<T>, value: T, name: &str, log: &mut Vec<String>) -> T {
    if slot.is_none() {
        log.push(format!("{name} = {value:?}"));
        *slot = Some(value);
    }
    slot.clone().expect("filled above")
}

fn field<T>(name: &str, r: Result<T, Error>) -> Result<T, String> {
    r.map_err(|e| format!("{name}: {e}"))
}

/// Conjugate frame the pipeline will use for a levels apparatus.
fn levels_frame(mode: Mode, h: &HermitianOperator, q: &HermitianOperator) -> Result<ConjugateFrame, Error> {
    match mode {
        Mode::Generalized => ConjugateFrame::new(&construct_y_operator(q, h)?, h),
        _ => ConjugateFrame::new(q, h),
    }
}

pub fn resolve_measurement(mut file: MeasurementFile) -> Result<ParsedMeasurement, String> {
    let mut log = Vec::new();
    let defaults = PropagationOptions::default();
    fill(&mut file.kind, DocumentKind::Measurement, "kind", &mut log);
    let mode: Mode = fill(&mut file.mode, ModeName::Protective, "mode", &mut log).into();
    let total_time = fill(&mut file.total_time, DEFAULT_TOTAL_TIME, "total_time", &mut log);
    let profile = fill(
        &mut file.profile,
        ProfileSpec::SineSquared { ramp_fraction: DEFAULT_RAMP_FRACTION },
        "profile",
        &mut log,
    );
    let n_steps = fill(&mut file.n_steps, AUTO_START_STEPS, "n_steps", &mut log);
    let tolerance = fill(&mut file.tolerance, defaults.tolerance, "tolerance", &mut log);
    let max_steps = fill(&mut file.max_steps, defaults.max_steps, "max_steps", &mut log);
    let nu_index = fill(&mut file.nu_index, 0, "nu_index", &mut log);
    let rng_seed = fill(&mut file.rng_seed, 0, "rng_seed", &mut log);

    let system = SystemConfig {
        hamiltonian: field("system.hamiltonian", file.system.hamiltonian.build())?,
        observable: field("system.observable", file.system.observable.build())?,
        initial: match &file.system.initial {
            Some(s) => Some(field("system.initial", s.build())?),
            None => None,
        },
    };

    let apparatus_file = fill(
        &mut file.apparatus,
        ApparatusFile::Grid {
            n_points: DEFAULT_GRID_POINTS,
            r_min: -DEFAULT_GRID_HALF_WIDTH,
            r_max: DEFAULT_GRID_HALF_WIDTH,
            mass: None,
            potential: None,
            packet: None,
        },
        "apparatus",
        &mut log,
    );
    let (apparatus, packet_file) = match apparatus_file {
        ApparatusFile::Grid { n_points, r_min, r_max, mass, potential, mut packet } => {
            let grid = field("apparatus", PointerGrid::new(n_points, r_min, r_max))?;
            let width = (DEFAULT_GRID_PACKET_CELLS * grid.spacing()).min(grid.length() / 8.0);
            let center = 0.5 * (r_min + r_max);
            let p = fill(&mut packet, PacketFile { center, width }, "apparatus.packet", &mut log);
            field("apparatus.packet", grid.gaussian_packet(p.center, p.width))?;
            let spec = PacketSpec { center: p.center, width: p.width };
            (ApparatusConfig::Pointer { grid, mass, potential, packet: spec }, packet)
        }
        ApparatusFile::Levels { hamiltonian, observable, mut packet } => {
            let h = field("apparatus.hamiltonian", hamiltonian.build())?;
            let q = field("apparatus.observable", observable.build())?;
            if mode == Mode::Strong {
                return Err("apparatus: strong mode needs a grid pointer".into());
            }
            let frame = field("apparatus", levels_frame(mode, &h, &q))?;
            let width = (DEFAULT_LEVELS_PACKET_CELLS * frame.spacing()).min(frame.length() / 8.0);
            let p = fill(&mut packet, PacketFile { center: 0.0, width }, "apparatus.packet", &mut log);
            field("apparatus.packet", frame.packet(p.center, p.width))?;
            let spec = PacketSpec { center: p.center, width: p.width };
            (ApparatusConfig::Levels { hamiltonian: h, observable: q, packet: spec }, packet)
        }
    };
    if let Some(ApparatusFile::Grid { packet, .. } | ApparatusFile::Levels { packet, .. }) = &mut file.apparatus {
        *packet = packet_file;
    }

    let config = MeasurementConfig {
        mode,
        total_time,
        profile: profile.into(),
        n_steps: Some(n_steps),
        tolerance,
        max_steps,
        system,
        apparatus,
        nu_index,
        rng_seed,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(ParsedMeasurement { file, config, defaults_applied: log })
}

pub fn resolve_cold_atom(mut file: ColdAtomFile) -> Result<ParsedColdAtom, String> {
    let mut log = Vec::new();
    let d = ColdAtomParams::default();
    fill(&mut file.kind, DocumentKind::ColdAtom, "kind", &mut log);
    let mut params = ColdAtomParams {
        mass: fill(&mut file.mass, d.mass, "mass", &mut log),
        magnetic_moment: fill(&mut file.magnetic_moment, d.magnetic_moment, "magnetic_moment", &mut log),
        b0: fill(&mut file.b0, d.b0, "b0", &mut log),
        b_gradient: 0.0,
        n0: fill(&mut file.n0, d.n0, "n0", &mut log),
        n: fill(&mut file.n, d.n, "n", &mut log),
        packet_width: fill(&mut file.packet_width, d.packet_width, "packet_width", &mut log),
        interaction_length: fill(&mut file.interaction_length, d.interaction_length, "interaction_length", &mut log),
        velocity: fill(&mut file.velocity, d.velocity, "velocity", &mut log),
        drift_time: fill(&mut file.drift_time, d.drift_time, "drift_time", &mut log),
    };
    let calibrated = params.calibrated_gradient(TARGET_DISPLACEMENT);
    params.b_gradient = fill(&mut file.b_gradient, calibrated, "b_gradient", &mut log);
    params.validate().map_err(|e| e.to_string())?;
    Ok(ParsedColdAtom { file, params, defaults_applied: log })
}

/// Fully explicit document for `params`.
pub fn cold_atom_file(params: &ColdAtomParams) -> ColdAtomFile {
    ColdAtomFile {
        schema_version: SCHEMA_VERSION,
        kind: Some(DocumentKind::ColdAtom),
        mass: Some(params.mass),
        magnetic_moment: Some(params.magnetic_moment),
        b0: Some(params.b0),
        b_gradient: Some(params.b_gradient),
        n0: Some(params.n0),
        n: Some(params.n),
        packet_width: Some(params.packet_width),
        interaction_length: Some(params.interaction_length),
        velocity: Some(params.velocity),
        drift_time: Some(params.drift_time),
    }
}
