//! Result files.
//!
//! CSV: one row per run, fixed header, every float written with 17
//! significant digits, LF line endings. JSON: a [`ResultDocument`] holding
//! [`RunRecord`]s, floats again with 17 significant digits; non-finite
//! values become the strings `"NaN"`, `"inf"` and `"-inf"`. Timestamps live
//! only in the separate [`RunManifest`], so result files are byte-identical
//! across repeated invocations.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use protective_core::analysis::{compare_to_prediction, SweepResult};
use protective_core::dynamics::PropagationReport;
use protective_core::hilbert::{BornWeight, DensityOperator, C64};
use protective_core::measurement::{Mode, RunResult};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::config::ModeName;
use crate::error::{SimError, SimResult};

pub const CSV_HEADER: [&str; 8] =
    ["T", "pointer_centroid", "predicted_shift", "centroid_error", "disturbance", "entropy_nats", "validity", "n_steps"];

/// Float text with 17 significant digits.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// `f64` that serializes through [`format_real`]. Equality is bitwise so
/// that NaN fields compare equal after a round trip.
#[derive(Debug, Clone, Copy)]
pub struct Real(pub f64);

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format_real(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(serializer)
        } else {
            serializer.serialize_str(&format_real(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = Real;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"NaN\", \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                match v {
                    "NaN" | "inf" | "-inf" => Ok(Real(parse_real(v).expect("listed above"))),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

fn reals(m: &DMatrix<f64>) -> Vec<Vec<Real>> {
    m.row_iter().map(|row| row.iter().map(|&x| Real(x)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityRecord {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<Real>>,
    pub im: Vec<Vec<Real>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub n_steps: usize,
    pub step_size: Real,
    pub richardson_error_estimate: Real,
    pub norm_drift: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseRecord {
    pub eigenvalue: Real,
    pub probability: Real,
}

/// JSON image of a [`RunResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub mode: ModeName,
    pub total_time: Real,
    pub initial_centroid: Real,
    pub pointer_centroid: Real,
    pub pointer_width: Real,
    pub predicted_shift: Real,
    pub reduced_system_state: DensityRecord,
    pub disturbance: Real,
    pub entanglement_entropy: Real,
    pub validity: Real,
    pub report: ReportRecord,
    pub seed: u64,
    #[serde(default)]
    pub collapse: Option<CollapseRecord>,
}

impl From<&RunResult> for RunRecord {
    fn from(r: &RunResult) -> Self {
        let rho = r.reduced_system_state.matrix();
        Self {
            mode: r.mode.into(),
            total_time: Real(r.total_time),
            initial_centroid: Real(r.initial_centroid),
            pointer_centroid: Real(r.pointer_centroid),
            pointer_width: Real(r.pointer_width),
            predicted_shift: Real(r.predicted_shift),
            reduced_system_state: DensityRecord {
                dims: r.reduced_system_state.dims().to_vec(),
                re: reals(&rho.map(|z| z.re)),
                im: reals(&rho.map(|z| z.im)),
            },
            disturbance: Real(r.disturbance),
            entanglement_entropy: Real(r.entanglement_entropy),
            validity: Real(r.validity),
            report: ReportRecord {
                n_steps: r.report.n_steps,
                step_size: Real(r.report.step_size),
                richardson_error_estimate: Real(r.report.richardson_error_estimate),
                norm_drift: Real(r.report.norm_drift),
            },
            seed: r.seed,
            collapse: r.collapse.map(|c| CollapseRecord { eigenvalue: Real(c.eigenvalue), probability: Real(c.probability) }),
        }
    }
}

impl TryFrom<&RunRecord> for RunResult {
    type Error = protective_core::Error;

    fn try_from(r: &RunRecord) -> Result<Self, Self::Error> {
        let d = r.reduced_system_state.re.len();
        let (re, im) = (&r.reduced_system_state.re, &r.reduced_system_state.im);
        if im.len() != d || re.iter().chain(im).any(|row| row.len() != d) {
            return Err(protective_core::Error::Validation("reduced_system_state is not a square matrix".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| C64::new(re[i][j].0, im[i][j].0));
        Ok(RunResult {
            mode: Mode::from(r.mode),
            total_time: r.total_time.0,
            initial_centroid: r.initial_centroid.0,
            pointer_centroid: r.pointer_centroid.0,
            pointer_width: r.pointer_width.0,
            predicted_shift: r.predicted_shift.0,
            reduced_system_state: DensityOperator::new(matrix, r.reduced_system_state.dims.clone())?,
            disturbance: r.disturbance.0,
            entanglement_entropy: r.entanglement_entropy.0,
            validity: r.validity.0,
            report: PropagationReport {
                n_steps: r.report.n_steps,
                step_size: r.report.step_size.0,
                richardson_error_estimate: r.report.richardson_error_estimate.0,
                norm_drift: r.report.norm_drift.0,
            },
            seed: r.seed,
            collapse: r.collapse.as_ref().map(|c| BornWeight { eigenvalue: c.eigenvalue.0, probability: c.probability.0 }),
        })
    }
}

/// One sweep point: the run, or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub t: Real,
    #[serde(default)]
    pub result: Option<RunRecord>,
    #[serde(default)]
    pub error: Option<String>,
}

/// Contents of a JSON result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDocument {
    pub code_version: String,
    pub seed: u64,
    /// Filled config the results came from.
    pub config: serde_json::Value,
    pub results: Vec<SweepEntry>,
}

impl ResultDocument {
    pub fn new(config: serde_json::Value, seed: u64, t_values: &[f64], runs: &[protective_core::Result<RunResult>]) -> Self {
        let results = t_values
            .iter()
            .zip(runs)
            .map(|(&t, r)| match r {
                Ok(r) => SweepEntry { t: Real(t), result: Some(r.into()), error: None },
                Err(e) => SweepEntry { t: Real(t), result: None, error: Some(e.to_string()) },
            })
            .collect();
        Self { code_version: env!("CARGO_PKG_VERSION").into(), seed, config, results }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result records serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

/// Provenance of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub config: serde_json::Value,
    pub code_version: String,
    pub seed: u64,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub outputs: Vec<PathBuf>,
}

pub fn unix_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn write(&self, path: &Path) -> SimResult<()> {
        write_file(path, self.to_json().as_bytes())
    }
}

/// One CSV data row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub pointer_centroid: f64,
    pub predicted_shift: f64,
    pub centroid_error: f64,
    pub disturbance: f64,
    pub entropy_nats: f64,
    pub validity: f64,
    pub n_steps: usize,
}

impl From<&RunResult> for CsvRow {
    fn from(r: &RunResult) -> Self {
        Self {
            t: r.total_time,
            pointer_centroid: r.pointer_centroid,
            predicted_shift: r.predicted_shift,
            centroid_error: compare_to_prediction(r).centroid_error,
            disturbance: r.disturbance,
            entropy_nats: r.entanglement_entropy,
            validity: r.validity,
            n_steps: r.report.n_steps,
        }
    }
}

impl CsvRow {
    fn fields(&self) -> [String; 8] {
        [
            format_real(self.t),
            format_real(self.pointer_centroid),
            format_real(self.predicted_shift),
            format_real(self.centroid_error),
            format_real(self.disturbance),
            format_real(self.entropy_nats),
            format_real(self.validity),
            self.n_steps.to_string(),
        ]
    }
}

/// Rows of a sweep, failed points as NaN.
pub fn sweep_rows(s: &SweepResult) -> Vec<CsvRow> {
    (0..s.len())
        .map(|i| CsvRow {
            t: s.t_values[i],
            pointer_centroid: s.pointer_centroids[i],
            predicted_shift: s.predicted_shifts[i],
            centroid_error: s.centroid_errors[i],
            disturbance: s.disturbances[i],
            entropy_nats: s.entropies[i],
            validity: s.validities[i],
            n_steps: s.n_steps[i],
        })
        .collect()
}

pub fn csv_string(rows: &[CsvRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(row.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

pub fn read_csv(path: &Path) -> SimResult<Vec<CsvRow>> {
    let text = fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_csv(&text, path)
}

pub fn parse_csv(text: &str, origin: &Path) -> SimResult<Vec<CsvRow>> {
    let bad = |message: String| SimError::Csv { path: origin.to_path_buf(), message };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("header must be {}", CSV_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let real = |i: usize| {
            parse_real(&record[i]).ok_or_else(|| bad(format!("row {}: {} is not a number", line + 1, CSV_HEADER[i])))
        };
        rows.push(CsvRow {
            t: real(0)?,
            pointer_centroid: real(1)?,
            predicted_shift: real(2)?,
            centroid_error: real(3)?,
            disturbance: real(4)?,
            entropy_nats: real(5)?,
            validity: real(6)?,
            n_steps: record[7].parse().map_err(|_| bad(format!("row {}: n_steps is not an integer", line + 1)))?,
        });
    }
    Ok(rows)
}

pub fn write_file(path: &Path, contents: &[u8]) -> SimResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes `rows` (CSV) or `document` (JSON) to `dir/<stem>.<ext>`, plus
/// `dir/manifest.json`. Returns the manifest.
pub fn emit_results(
    rows: &[CsvRow],
    document: &ResultDocument,
    format: Format,
    dir: &Path,
    stem: &str,
    started_unix_ms: u64,
) -> SimResult<RunManifest> {
    let (path, body) = match format {
        Format::Csv => (dir.join(format!("{stem}.csv")), csv_string(rows)),
        Format::Json => (dir.join(format!("{stem}.json")), document.to_json()),
    };
    write_file(&path, body.as_bytes())?;
    let manifest = RunManifest {
        config: document.config.clone(),
        code_version: document.code_version.clone(),
        seed: document.seed,
        started_unix_ms,
        finished_unix_ms: unix_ms(),
        outputs: vec![path],
    };
    manifest.write(&dir.join("manifest.json"))?;
    Ok(manifest)
}
