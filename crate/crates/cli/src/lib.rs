// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Batch front end: configuration, orchestration and artifact emission.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 results written
//! but an acceptance bound was violated, 1 any other failure.

pub mod config;

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use matchforge::analysis::{analyze_trace, Window, DEFAULT_PEAK_FRACTION};
use matchforge::circuit::NativeGateSequence;
use matchforge::circuitsim::{simulate_trace, CircuitOrigin, NoiseModel, SimMode, SimOptions};
use matchforge::compiler::{compile_trajectory, distance, qasm_file_name, write_report_csv, CompiledTrajectory};
use matchforge::exact::{evolve_quench, target_unitaries};
use matchforge::freefermion::{bdg_spectrum, build_bdg};
use matchforge::qasm::{from_qasm, to_qasm};
use matchforge::trace::DynamicsTrace;
use matchforge::trotter::trotter_evolution;
use matchforge::{Execution, VERSION};
use serde::Serialize;
use serde_json::json;

pub use config::ExperimentConfig;
use config::OutputFormat;

/// Largest compiled-vs-exact magnetization deviation `crosscheck` accepts.
pub const CROSSCHECK_MAX_DEVIATION: f64 = 0.01;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, configuration or inputs (exit 2).
    Config(String),
    /// Results were written but violate a bound (exit 3).
    Soft(Vec<String>),
    /// Anything else (exit 1).
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Soft(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Soft(v) => write!(f, "acceptance bounds violated: {}", v.join("; ")),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<matchforge::Error> for CliError {
    fn from(e: matchforge::Error) -> Self {
        match e {
            matchforge::Error::Validation(_) | matchforge::Error::Parse { .. } => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "matchforge", version, about = "Constant-depth matchgate compilation and dynamics for 1D spin chains")]
pub struct Cli {
    /// JSON experiment configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for compilation and shot sampling.
    #[arg(long, global = true, env = "MGF_WORKERS")]
    pub workers: Option<usize>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Exact,
    Compiled,
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    Ideal,
    Sampled,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WindowArg {
    Rectangular,
    Hann,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile every time step into a fixed-depth circuit and write the QASM bundle.
    Compile,
    /// Simulate the quench and analyze the magnetization trace.
    Dynamics {
        #[arg(long, value_enum, default_value = "exact")]
        engine: Engine,
        #[arg(long, value_enum, default_value = "ideal")]
        fidelity: Fidelity,
        /// Directory written by `compile`; the compiled engine compiles in-process without it.
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rectangular")]
        window: WindowArg,
    },
    /// Free-fermion spectrum and mode classification.
    Bdg {
        /// Transverse field used for the BdG matrix.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        field: f64,
    },
    /// Compare exact, compiled-ideal and Trotter-ideal dynamics.
    Crosscheck,
}

/// Resolved inputs shared by every subcommand.
pub struct Context {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub workers: usize,
}

impl Context {
    pub fn new(cli: &Cli) -> CliResult<Self> {
        let raw = match &cli.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let mut config = raw.resolve()?;
        if let Some(out) = &cli.out {
            config.output.directory = out.clone();
        }
        if cli.workers == Some(0) {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        let out = config.output.directory.clone();
        fs::create_dir_all(&out)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", out.display())))?;
        Ok(Context { config, out, workers: cli.workers.unwrap_or(0) })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        let path = self.path(name);
        let file =
            File::create(&path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(BufWriter::new(file))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Runtime(e.into()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn wants(&self, f: OutputFormat) -> bool {
        self.config.output.wants(f)
    }

    fn sim_options(&self, fidelity: Fidelity) -> SimOptions {
        let mode = match fidelity {
            Fidelity::Ideal => SimMode::Ideal,
            Fidelity::Sampled => SimMode::Sampled,
            Fidelity::Noisy => SimMode::Noisy,
        };
        let noise = if self.config.noise.enabled { self.config.noise } else { NoiseModel::disabled() };
        SimOptions {
            mode,
            noise,
            shots: self.config.sim.shots,
            seed: self.config.sim.seed,
            execution: Execution::Parallel,
        }
    }

    fn manifest(&self, command: &str, extra: serde_json::Value, outputs: &[String]) -> CliResult<()> {
        let mut m = json!({
            "tool": "matchforge",
            "version": VERSION,
            "command": command,
            "seed": self.config.sim.seed,
            "config": self.config,
            "outputs": outputs,
        });
        if let (Some(obj), serde_json::Value::Object(more)) = (m.as_object_mut(), extra) {
            obj.extend(more);
        }
        self.write_json(MANIFEST, &m)
    }

    fn compile(&self) -> CliResult<CompiledTrajectory> {
        let profile = self.config.profile()?;
        let cfg = self.config.optimizer(Execution::Parallel);
        Ok(compile_trajectory(&profile, self.config.sim.dt, self.config.sim.n_steps, &cfg)?)
    }
}

pub const MANIFEST: &str = "manifest.json";

/// Parse arguments, run the subcommand inside the worker pool and map the
/// outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("matchforge: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let ctx = Context::new(cli)?;
    matchforge::parallel::with_workers(ctx.workers, || match &cli.command {
        Command::Compile => run_compile(&ctx),
        Command::Dynamics { engine, fidelity, bundle, window } => {
            let window = match window {
                WindowArg::Rectangular => Window::Rectangular,
                WindowArg::Hann => Window::Hann,
            };
            run_dynamics(&ctx, *engine, *fidelity, bundle.as_deref(), window)
        }
        Command::Bdg { field } => run_bdg(&ctx, *field),
        Command::Crosscheck => run_crosscheck(&ctx),
    })
}

fn unaccepted(traj: &CompiledTrajectory) -> Vec<String> {
    traj.steps
        .iter()
        .filter(|s| !s.accepted)
        .map(|s| format!("step {} residual {:e} above tolerance", s.step_index, s.residual))
        .collect()
}

pub fn run_compile(ctx: &Context) -> CliResult<()> {
    let traj = ctx.compile()?;
    let mut outputs = Vec::new();
    let mut w = ctx.create("compile_report.csv")?;
    write_report_csv(&traj.steps, &mut w)?;
    w.flush()?;
    outputs.push("compile_report.csv".to_string());
    if ctx.wants(OutputFormat::Qasm) {
        for (step, circuit) in traj.steps.iter().zip(traj.circuits()) {
            let name = qasm_file_name(step.step_index);
            fs::write(ctx.path(&name), to_qasm(&circuit))?;
            outputs.push(name);
        }
    }
    let summary = json!({
        "n_slots": traj.layout.n_slots(),
        "columns": traj.layout.columns,
        "cnots_per_circuit": 2 * traj.layout.n_slots(),
        "max_residual": traj.max_residual(),
        "all_accepted": traj.all_accepted(),
    });
    ctx.manifest("compile", json!({ "compile": summary }), &outputs)?;
    let failures = unaccepted(&traj);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Soft(failures))
    }
}

/// Circuits from a `compile` bundle, checked against the current configuration.
pub fn load_bundle(ctx: &Context, dir: &Path) -> CliResult<Vec<NativeGateSequence>> {
    let manifest_path = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path)
        .map_err(|e| CliError::Config(format!("missing compile bundle at {}: {e}", dir.display())))?;
    let manifest: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("unreadable bundle manifest: {e}")))?;
    let bundled: ExperimentConfig = serde_json::from_value(manifest["config"].clone())
        .map_err(|e| CliError::Config(format!("bundle manifest has no usable config: {e}")))?;
    let (ours, theirs) = (ctx.config.profile()?, bundled.resolve()?.profile()?);
    if ours.couplings != theirs.couplings || ours.field != theirs.field {
        return Err(CliError::Config("bundle was compiled for a different model".into()));
    }
    if bundled.sim.dt != ctx.config.sim.dt || bundled.sim.n_steps < ctx.config.sim.n_steps {
        return Err(CliError::Config("bundle time grid does not cover the configured run".into()));
    }
    (1..=ctx.config.sim.n_steps)
        .map(|k| {
            let path = dir.join(qasm_file_name(k));
            let text =
                fs::read_to_string(&path).map_err(|e| CliError::Config(format!("missing {}: {e}", path.display())))?;
            let seq = from_qasm(&text)?;
            if seq.n_qubits != ours.n_sites {
                return Err(CliError::Config(format!("{} acts on {} qubits", path.display(), seq.n_qubits)));
            }
            Ok(seq)
        })
        .collect()
}

pub fn run_dynamics(
    ctx: &Context,
    engine: Engine,
    fidelity: Fidelity,
    bundle: Option<&Path>,
    window: Window,
) -> CliResult<()> {
    let cfg = &ctx.config;
    let profile = cfg.profile()?;
    let initial = cfg.initial_state();
    let (dt, n_steps) = (cfg.sim.dt, cfg.sim.n_steps);
    let mut soft = Vec::new();
    let trace = match engine {
        Engine::Exact => {
            if fidelity != Fidelity::Ideal {
                return Err(CliError::Config("the exact engine only supports --fidelity ideal".into()));
            }
            evolve_quench(&profile, dt, n_steps, &initial)?
        }
        Engine::Compiled => {
            let circuits = match bundle {
                Some(dir) => load_bundle(ctx, dir)?,
                None => {
                    let traj = ctx.compile()?;
                    soft.extend(unaccepted(&traj));
                    traj.circuits()
                }
            };
            simulate_trace(&circuits, dt, &initial, CircuitOrigin::Compiled, &ctx.sim_options(fidelity))?
        }
        Engine::Trotter => {
            let circuits = trotter_evolution(&profile, dt, n_steps)?.circuits();
            simulate_trace(&circuits, dt, &initial, CircuitOrigin::Trotter, &ctx.sim_options(fidelity))?
        }
    };
    let analysis = analyze_trace(&trace, window, DEFAULT_PEAK_FRACTION)?;
    let mut outputs = Vec::new();
    if ctx.wants(OutputFormat::Csv) {
        let mut w = ctx.create("trace.csv")?;
        trace.write_csv(&mut w)?;
        w.flush()?;
        let mut w = ctx.create("spectrum.csv")?;
        analysis.spectrum.write_csv(&mut w)?;
        w.flush()?;
        outputs.extend(["trace.csv".to_string(), "spectrum.csv".to_string()]);
    }
    if ctx.wants(OutputFormat::Json) {
        ctx.write_json("peaks.json", &analysis.peaks)?;
        let stamp = |entries: serde_json::Value| json!({ "version": VERSION, "seed": trace.seed, "source": trace.source, "entries": entries });
        ctx.write_json("equilibration.json", &stamp(json!(analysis.equilibration)))?;
        ctx.write_json("damping.json", &stamp(json!(analysis.damping)))?;
        outputs.extend(["peaks.json", "equilibration.json", "damping.json"].map(String::from));
    }
    let extra = json!({
        "engine": engine,
        "fidelity": fidelity,
        "source": trace.source,
        "peak_fraction": DEFAULT_PEAK_FRACTION,
        "window": analysis.spectrum.window,
    });
    ctx.manifest("dynamics", extra, &outputs)?;
    if soft.is_empty() {
        Ok(())
    } else {
        Err(CliError::Soft(soft))
    }
}

pub fn run_bdg(ctx: &Context, field: f64) -> CliResult<()> {
    let profile = ctx.config.profile()?;
    let spectrum = bdg_spectrum(&build_bdg(&profile, field)?);
    let mut outputs = Vec::new();
    if ctx.wants(OutputFormat::Csv) {
        let mut w = ctx.create("bdg_spectrum.csv")?;
        spectrum.write_csv(&mut w)?;
        w.flush()?;
        outputs.push("bdg_spectrum.csv".to_string());
    }
    if ctx.wants(OutputFormat::Json) {
        ctx.write_json("bdg_modes.json", &spectrum.summary())?;
        outputs.push("bdg_modes.json".to_string());
    }
    ctx.manifest("bdg", json!({ "field": field }), &outputs)
}

#[derive(Debug, Serialize)]
struct Deviation {
    max: f64,
    mean: f64,
}

fn deviation(a: &DynamicsTrace, b: &DynamicsTrace) -> CliResult<Deviation> {
    Ok(Deviation { max: a.max_deviation(b)?, mean: a.mean_deviation(b)? })
}

/// Every other row, so a trace on `dt / 2` lines up with one on `dt`.
fn decimate(trace: &DynamicsTrace) -> DynamicsTrace {
    let mut t = trace.clone();
    t.times = trace.times.iter().step_by(2).copied().collect();
    t.magnetization = trace.magnetization.iter().map(|row| row.iter().step_by(2).copied().collect()).collect();
    t
}

pub fn run_crosscheck(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let profile = cfg.profile()?;
    let initial = cfg.initial_state();
    let (dt, n_steps) = (cfg.sim.dt, cfg.sim.n_steps);
    let ideal = ctx.sim_options(Fidelity::Ideal);

    let exact = evolve_quench(&profile, dt, n_steps, &initial)?;
    let traj = ctx.compile()?;
    let compiled = simulate_trace(&traj.circuits(), dt, &initial, CircuitOrigin::Compiled, &ideal)?;
    let trotter_circuits = trotter_evolution(&profile, dt, n_steps)?;
    let trotter = simulate_trace(&trotter_circuits.circuits(), dt, &initial, CircuitOrigin::Trotter, &ideal)?;
    let fine = trotter_evolution(&profile, dt / 2.0, 2 * n_steps)?;
    let trotter_fine = decimate(&simulate_trace(&fine.circuits(), dt / 2.0, &initial, CircuitOrigin::Trotter, &ideal)?);

    let compiled_dev = deviation(&compiled, &exact)?;
    let trotter_dev = deviation(&trotter, &exact)?;
    let fine_dev = deviation(&trotter_fine, &exact)?;
    let ratio = if fine_dev.max > 0.0 { Some(trotter_dev.max / fine_dev.max) } else { None };

    let targets = target_unitaries(&profile, dt, n_steps)?;
    let step = trotter_circuits.step.to_matrix()?;
    let mut trotter_u = matchforge::linalg::identity(profile.dim());
    let mut w = ctx.create("distance_vs_step.csv")?;
    writeln!(w, "step,elapsed_time,compiled_distance,trotter_distance")?;
    for (s, target) in traj.steps.iter().zip(&targets) {
        trotter_u = &step * &trotter_u;
        let d = distance(&trotter_u, &target.matrix)?;
        writeln!(w, "{},{},{:e},{:e}", s.step_index, target.time, s.residual, d)?;
    }
    w.flush()?;

    let mut violations = unaccepted(&traj);
    if compiled_dev.max > CROSSCHECK_MAX_DEVIATION {
        violations
            .push(format!("compiled-ideal deviates from exact by {:e} > {CROSSCHECK_MAX_DEVIATION}", compiled_dev.max));
    }
    let report = json!({
        "version": VERSION,
        "seed": cfg.sim.seed,
        "compiled_vs_exact": compiled_dev,
        "trotter_vs_exact": trotter_dev,
        "trotter_half_dt_vs_exact": fine_dev,
        "trotter_dt_halving_ratio": ratio,
        "max_compile_residual": traj.max_residual(),
        "bound": CROSSCHECK_MAX_DEVIATION,
        "passed": violations.is_empty(),
        "violations": violations,
    });
    ctx.write_json("crosscheck.json", &report)?;
    ctx.manifest("crosscheck", json!({}), &["crosscheck.json".to_string(), "distance_vs_step.csv".to_string()])?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Soft(violations))
    }
}
