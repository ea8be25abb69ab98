//! The `protective` command.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use log::{error, info, LevelFilter};
use protective_core::analysis::{fit_power_law, log_spaced, SweepResult, MIN_FIT_POINTS};
use protective_core::measurement::{run, MeasurementConfig};
use protective_core::Error;

use crate::coldatom::{cold_atom_run, ColdAtomParams, FidelityLevel};
use crate::config::{cold_atom_file, parse_config_with, ConfigDocument, ModeName, Overrides, ParsedMeasurement};
use crate::error::{SimError, SimResult};
use crate::output::{emit_results, read_csv, sweep_rows, unix_ms, write_file, CsvRow, Format, ResultDocument, RunManifest};
use crate::parallel::{parallel_sweep, worker_count};

#[derive(Debug, Parser)]
#[command(name = "protective", version, about = "Strong, protective and generalized protective measurement simulator")]
pub struct Cli {
    /// Log progress to stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strong,
    Protective,
    Generalized,
}

impl From<ModeArg> for ModeName {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strong => ModeName::Strong,
            ModeArg::Protective => ModeName::Protective,
            ModeArg::Generalized => ModeName::Generalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Analytic,
    Full,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Overrides the config's RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One measurement.
    Run(RunArgs),
    /// Log-spaced sweep over the total coupling time T.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        points: usize,
        /// Worker threads; defaults to PROTECTIVE_WORKERS or the core count.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Cold-atom Stern-Gerlach scenario.
    Coldatom {
        /// Parameter file; built-in defaults when absent.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "analytic")]
        level: LevelArg,
        /// Directory for `coldatom.json` and the manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-law fit of disturbance against T from a sweep CSV.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Propagation tolerance of the sweep; sets the disturbance noise floor.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> SimResult<()> {
    match command {
        Command::Run(args) => run_command(args),
        Command::Sweep { run, t_min, t_max, points, workers } => {
            sweep_command(run, *t_min, *t_max, *points, workers.unwrap_or_else(worker_count))
        }
        Command::Coldatom { params, level, out } => coldatom_command(params.as_deref(), *level, out.as_deref()),
        Command::Fit { input, tolerance } => fit_command(input, *tolerance),
    }
}

fn load_measurement(args: &RunArgs) -> SimResult<ParsedMeasurement> {
    let overrides = Overrides { mode: args.mode.map(Into::into), rng_seed: args.seed };
    match parse_config_with(&args.config, overrides)? {
        ConfigDocument::Measurement(m) => Ok(m),
        ConfigDocument::ColdAtom(_) => Err(SimError::config(&args.config, "cold-atom parameters: use the coldatom subcommand")),
    }
}

fn snapshot(m: &ParsedMeasurement) -> serde_json::Value {
    serde_json::to_value(&m.file).expect("config serializes")
}

fn run_command(args: &RunArgs) -> SimResult<()> {
    let started = unix_ms();
    let parsed = load_measurement(args)?;
    let config = &parsed.config;
    let result = run(config);
    let rows: Vec<CsvRow> = result.iter().map(CsvRow::from).collect();
    let doc = ResultDocument::new(snapshot(&parsed), config.rng_seed, &[config.total_time], std::slice::from_ref(&result));
    let result = result?;
    emit_results(&rows, &doc, args.format.into(), &args.out, "run", started)?;
    println!(
        "mode {} T {} shift {:.10} predicted {:.10} disturbance {:.3e} entropy {:.3e} validity {:.3e}",
        result.mode.as_str(),
        result.total_time,
        result.shift(),
        result.predicted_shift,
        result.disturbance,
        result.entanglement_entropy,
        result.validity
    );
    Ok(())
}

fn sweep_command(args: &RunArgs, t_min: f64, t_max: f64, points: usize, workers: usize) -> SimResult<()> {
    let started = unix_ms();
    let parsed = load_measurement(args)?;
    let t_values = log_spaced(t_min, t_max, points);
    let (sweep, runs) = sweep_measurement(&parsed.config, &t_values, workers)?;
    let doc = ResultDocument::new(snapshot(&parsed), parsed.config.rng_seed, &t_values, &runs);
    emit_results(&sweep_rows(&sweep), &doc, args.format.into(), &args.out, "sweep", started)?;
    println!("{} points, {} failed", sweep.len(), sweep.failures());
    if let Some(fit) = &sweep.fit {
        println!("disturbance ~ T^{:.4} (r^2 = {:.5}, points {:?})", fit.slope, fit.r_squared, fit.window);
    }
    Ok(())
}

fn sweep_measurement(
    config: &MeasurementConfig,
    t_values: &[f64],
    workers: usize,
) -> SimResult<(SweepResult, Vec<protective_core::Result<protective_core::measurement::RunResult>>)> {
    info!("sweep: {} points on {workers} workers", t_values.len());
    Ok(parallel_sweep(config, t_values, workers)?)
}

fn coldatom_command(params: Option<&Path>, level: LevelArg, out: Option<&Path>) -> SimResult<()> {
    let started = unix_ms();
    let params = match params {
        Some(path) => match parse_config_with(path, Overrides::default())? {
            ConfigDocument::ColdAtom(c) => c.params,
            ConfigDocument::Measurement(_) => {
                return Err(SimError::config(path, "expected a cold-atom parameter file (\"kind\": \"cold_atom\")"))
            }
        },
        None => ColdAtomParams::default(),
    };
    let level = match level {
        LevelArg::Analytic => FidelityLevel::Analytic,
        LevelArg::Full => FidelityLevel::Full,
    };
    let report = cold_atom_run(&params, level)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    print!("{text}");
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = out {
        let path = dir.join("coldatom.json");
        write_file(&path, text.as_bytes())?;
        let manifest = RunManifest {
            config: serde_json::to_value(cold_atom_file(&params)).expect("config serializes"),
            code_version: env!("CARGO_PKG_VERSION").into(),
            seed: 0,
            started_unix_ms: started,
            finished_unix_ms: unix_ms(),
            outputs: vec![path],
        };
        manifest.write(&dir.join("manifest.json"))?;
    }
    Ok(())
}

/// Fit over the longest contiguous run of finite, adiabatic rows above
/// the noise floor.
pub fn fit_rows(rows: &[CsvRow], tolerance: f64) -> Result<protective_core::analysis::ScalingFit, Error> {
    let finite = |r: &CsvRow| r.disturbance.is_finite() && r.validity.is_finite();
    let sweep = SweepResult {
        t_values: rows.iter().map(|r| r.t).collect(),
        pointer_centroids: rows.iter().map(|r| r.pointer_centroid).collect(),
        predicted_shifts: rows.iter().map(|r| r.predicted_shift).collect(),
        centroid_errors: rows.iter().map(|r| r.centroid_error).collect(),
        disturbances: rows.iter().map(|r| r.disturbance).collect(),
        entropies: rows.iter().map(|r| r.entropy_nats).collect(),
        validities: rows.iter().map(|r| r.validity).collect(),
        n_steps: rows.iter().map(|r| r.n_steps).collect(),
        errors: rows.iter().map(|r| (!finite(r)).then(|| Error::Validation("missing row".into()))).collect(),
        fit: None,
        decreasing_in_window: false,
    };
    let window = sweep.fit_window(tolerance);
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::Precondition(format!(
            "only {} contiguous eligible rows (need {MIN_FIT_POINTS}): validity below threshold and disturbance above the noise floor",
            window.len()
        )));
    }
    fit_power_law(&sweep.t_values, &sweep.disturbances, window)
}

fn fit_command(input: &Path, tolerance: f64) -> SimResult<()> {
    let rows = read_csv(input)?;
    let fit = fit_rows(&rows, tolerance)?;
    println!("slope {:.10}", fit.slope);
    println!("intercept {:.10}", fit.intercept);
    println!("r_squared {:.10}", fit.r_squared);
    println!("window {}..{} ({} points)", fit.window.start, fit.window.end, fit.window.len());
    Ok(())
}
