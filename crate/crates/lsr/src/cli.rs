//! Command-line front end: flat `key = value` configuration, subcommand
//! dispatch, deterministic seeding and CSV + metadata-sidecar output.
//!
//! Exit codes: 0 success, 1 runtime error, 2 configuration/usage error.
//! All randomness flows from a single `--seed`; per-run streams are
//! derived by a documented 64-bit mix of (seed, cell index, run index),
//! so outputs are byte-identical for any `--threads` setting.

use crate::experiments::{
    log_grid, rate_curves, step_grid, success_probability, sweep_over_correlation_time,
    sweep_over_intensity, threshold_map, ExperimentConfig, IntensityFamily, NoiseConfig,
    SimSettings,
};
use crate::model::{fixed_points, PotentialParams};
use crate::noise::{
    estimate_statistics, generate_path, AmplitudeScaling, DichotomousNoiseSpec, MeanMode,
};
use crate::simulate::{
    encode_inputs, integrate, DecodeMode, LogicGate, INPUT_PAIRS,
};
use crate::theory::McOptions;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// A configuration or usage problem (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

/// Fully validated run configuration with documented defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gate: LogicGate,
    pub model: PotentialParams,
    /// "dichotomous" or "gwn".
    pub noise_kind: String,
    pub d: f64,
    pub tau: f64,
    pub asymmetry: f64,
    pub mean_mode: MeanMode,
    pub scaling: AmplitudeScaling,
    pub literal_prefactor: bool,
    pub sim: SimSettings,
    pub n_runs: usize,
    pub seed: u64,
    // sweep-d
    pub sweep_d_min: f64,
    pub sweep_d_max: f64,
    pub sweep_d_points: usize,
    /// "A" or "tau".
    pub sweep_family: String,
    pub sweep_family_values: Vec<f64>,
    // sweep-tau
    pub sweep_tau_min: f64,
    pub sweep_tau_max: f64,
    pub sweep_tau_points: usize,
    pub sweep_d_values: Vec<f64>,
    // map
    pub map_x_l_min: f64,
    pub map_x_l_max: f64,
    pub map_x_u_min: f64,
    pub map_x_u_max: f64,
    pub map_step: f64,
    // rates
    pub rates_i_values: Vec<f64>,
    pub rates_d_min: f64,
    pub rates_d_max: f64,
    pub rates_d_points: usize,
    pub rates_mc: bool,
    pub rates_mc_paths: usize,
    pub rates_mc_dt: f64,
    pub rates_mc_max_time: f64,
    // noise-check
    pub check_samples: usize,
    pub check_dt: f64,
    // trajectory
    pub traj_decimate: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gate: LogicGate::And,
            model: PotentialParams::standard(),
            noise_kind: "dichotomous".into(),
            d: 0.05,
            tau: 0.01,
            asymmetry: 0.0,
            mean_mode: MeanMode::ZeroMean,
            scaling: AmplitudeScaling::Drive,
            literal_prefactor: false,
            sim: SimSettings::default(),
            n_runs: 1000,
            seed: 0,
            sweep_d_min: 1e-4,
            sweep_d_max: 0.2,
            sweep_d_points: 20,
            sweep_family: "tau".into(),
            sweep_family_values: vec![0.001],
            sweep_tau_min: 1e-4,
            sweep_tau_max: 0.1,
            sweep_tau_points: 20,
            sweep_d_values: vec![0.05],
            map_x_l_min: -2.0,
            map_x_l_max: -0.25,
            map_x_u_min: 0.25,
            map_x_u_max: 2.0,
            map_step: 0.25,
            rates_i_values: vec![-0.8, 0.0, 0.8],
            rates_d_min: 0.03,
            rates_d_max: 0.12,
            rates_d_points: 10,
            rates_mc: false,
            rates_mc_paths: 400,
            rates_mc_dt: 0.001,
            rates_mc_max_time: 2000.0,
            check_samples: 1_000_000,
            check_dt: 0.001,
            traj_decimate: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError(format!("key '{key}': cannot parse value '{value}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|s| parse_num::<f64>(key, s))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ConfigError(format!(
            "key '{key}': expected true/false, got '{other}'"
        ))),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment; unknown keys are rejected.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "gate" => {
                self.gate = LogicGate::parse(v)
                    .ok_or_else(|| ConfigError(format!("unknown gate '{v}'")))?
            }
            "model.a" => self.model.a = parse_num(key, v)?,
            "model.b" => self.model.b = parse_num(key, v)?,
            "model.x_l" => self.model.x_l = parse_num(key, v)?,
            "model.x_u" => self.model.x_u = parse_num(key, v)?,
            "noise.kind" => match v {
                "dichotomous" | "gwn" => self.noise_kind = v.into(),
                other => return Err(ConfigError(format!("unknown noise kind '{other}'"))),
            },
            "noise.D" => self.d = parse_num(key, v)?,
            "noise.tau" => self.tau = parse_num(key, v)?,
            "noise.A" => self.asymmetry = parse_num(key, v)?,
            "noise.mean_mode" => {
                self.mean_mode = match v {
                    "zero-mean" => MeanMode::ZeroMean,
                    "equal-rates" => MeanMode::EqualRates,
                    other => return Err(ConfigError(format!("unknown mean mode '{other}'"))),
                }
            }
            "noise.scaling" => {
                self.scaling = match v {
                    "drive" => AmplitudeScaling::Drive,
                    "spectral" => AmplitudeScaling::Spectral,
                    other => return Err(ConfigError(format!("unknown scaling '{other}'"))),
                }
            }
            "noise.literal_prefactor" => self.literal_prefactor = parse_bool(key, v)?,
            "sim.dt" => self.sim.dt = parse_num(key, v)?,
            "sim.segment_duration" => self.sim.segment_duration = parse_num(key, v)?,
            "sim.transient_fraction" => self.sim.transient_fraction = parse_num(key, v)?,
            "sim.amplitude" => self.sim.amplitude = parse_num(key, v)?,
            "sim.decode" => {
                self.sim.decode = match v {
                    "majority" => DecodeMode::Majority,
                    "final" => DecodeMode::FinalSample,
                    other => return Err(ConfigError(format!("unknown decode mode '{other}'"))),
                }
            }
            "runs.n" => self.n_runs = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "sweep.d_min" => self.sweep_d_min = parse_num(key, v)?,
            "sweep.d_max" => self.sweep_d_max = parse_num(key, v)?,
            "sweep.d_points" => self.sweep_d_points = parse_num(key, v)?,
            "sweep.family" => match v {
                "A" | "tau" => self.sweep_family = v.into(),
                other => return Err(ConfigError(format!("unknown sweep family '{other}'"))),
            },
            "sweep.family_values" => self.sweep_family_values = parse_list(key, v)?,
            "sweep.tau_min" => self.sweep_tau_min = parse_num(key, v)?,
            "sweep.tau_max" => self.sweep_tau_max = parse_num(key, v)?,
            "sweep.tau_points" => self.sweep_tau_points = parse_num(key, v)?,
            "sweep.d_values" => self.sweep_d_values = parse_list(key, v)?,
            "map.x_l_min" => self.map_x_l_min = parse_num(key, v)?,
            "map.x_l_max" => self.map_x_l_max = parse_num(key, v)?,
            "map.x_u_min" => self.map_x_u_min = parse_num(key, v)?,
            "map.x_u_max" => self.map_x_u_max = parse_num(key, v)?,
            "map.step" => self.map_step = parse_num(key, v)?,
            "rates.i_values" => self.rates_i_values = parse_list(key, v)?,
            "rates.d_min" => self.rates_d_min = parse_num(key, v)?,
            "rates.d_max" => self.rates_d_max = parse_num(key, v)?,
            "rates.d_points" => self.rates_d_points = parse_num(key, v)?,
            "rates.mc" => self.rates_mc = parse_bool(key, v)?,
            "rates.mc_paths" => self.rates_mc_paths = parse_num(key, v)?,
            "rates.mc_dt" => self.rates_mc_dt = parse_num(key, v)?,
            "rates.mc_max_time" => self.rates_mc_max_time = parse_num(key, v)?,
            "check.samples" => self.check_samples = parse_num(key, v)?,
            "check.dt" => self.check_dt = parse_num(key, v)?,
            "trajectory.decimate" => self.traj_decimate = parse_num(key, v)?,
            "out.dir" => self.out_dir = PathBuf::from(v),
            unknown => return Err(ConfigError(format!("unknown config key '{unknown}'"))),
        }
        Ok(())
    }

    /// Validates cross-field invariants before any simulation starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        fixed_points(&self.model).map_err(|e| ConfigError(e.to_string()))?;
        if self.noise_kind == "dichotomous" {
            self.noise_config()
                .build()
                .map_err(|e| ConfigError(e.to_string()))?;
        } else if !(self.d > 0.0) {
            return Err(ConfigError(format!("noise.D must be positive, got {}", self.d)));
        }
        if !(self.sim.dt > 0.0) {
            return Err(ConfigError(format!("sim.dt must be positive, got {}", self.sim.dt)));
        }
        if self.noise_kind == "dichotomous" && self.sim.dt > self.tau / 2.0 {
            eprintln!(
                "warning: sim.dt = {} exceeds tau/2 = {}; noise switching is \
                 exact but drift error grows",
                self.sim.dt,
                self.tau / 2.0
            );
        }
        if !(0.0..1.0).contains(&self.sim.transient_fraction) {
            return Err(ConfigError(
                "sim.transient_fraction must lie in [0, 1)".into(),
            ));
        }
        if self.n_runs == 0 {
            return Err(ConfigError("runs.n must be >= 1".into()));
        }
        if self.traj_decimate == 0 {
            return Err(ConfigError("trajectory.decimate must be >= 1".into()));
        }
        Ok(())
    }

    /// The macroscopic noise configuration.
    pub fn noise_config(&self) -> NoiseConfig {
        if self.noise_kind == "gwn" {
            NoiseConfig::Gaussian { d: self.d }
        } else {
            NoiseConfig::Dichotomous {
                d: self.d,
                tau: self.tau,
                asymmetry: self.asymmetry,
                mean_mode: self.mean_mode,
                scaling: self.scaling,
                literal_prefactor: self.literal_prefactor,
            }
        }
    }

    /// The gate-experiment view of this configuration.
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            gate: self.gate,
            params: self.model,
            noise: self.noise_config(),
            sim: self.sim,
            n_runs: self.n_runs,
            master_seed: self.seed,
        }
    }

    /// Echoes the full effective configuration (defaults included) as
    /// `key = value` lines, suitable for the metadata sidecar and exact
    /// re-execution.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("gate", self.gate.name().into());
        kv("model.a", self.model.a.to_string());
        kv("model.b", self.model.b.to_string());
        kv("model.x_l", self.model.x_l.to_string());
        kv("model.x_u", self.model.x_u.to_string());
        kv("noise.kind", self.noise_kind.clone());
        kv("noise.D", self.d.to_string());
        kv("noise.tau", self.tau.to_string());
        kv("noise.A", self.asymmetry.to_string());
        kv(
            "noise.mean_mode",
            match self.mean_mode {
                MeanMode::ZeroMean => "zero-mean".into(),
                MeanMode::EqualRates => "equal-rates".into(),
            },
        );
        kv(
            "noise.scaling",
            match self.scaling {
                AmplitudeScaling::Drive => "drive".into(),
                AmplitudeScaling::Spectral => "spectral".into(),
            },
        );
        kv("noise.literal_prefactor", self.literal_prefactor.to_string());
        kv("sim.dt", self.sim.dt.to_string());
        kv("sim.segment_duration", self.sim.segment_duration.to_string());
        kv(
            "sim.transient_fraction",
            self.sim.transient_fraction.to_string(),
        );
        kv("sim.amplitude", self.sim.amplitude.to_string());
        kv(
            "sim.decode",
            match self.sim.decode {
                DecodeMode::Majority => "majority".into(),
                DecodeMode::FinalSample => "final".into(),
            },
        );
        kv("runs.n", self.n_runs.to_string());
        kv("seed", self.seed.to_string());
        kv("sweep.d_min", self.sweep_d_min.to_string());
        kv("sweep.d_max", self.sweep_d_max.to_string());
        kv("sweep.d_points", self.sweep_d_points.to_string());
        kv("sweep.family", self.sweep_family.clone());
        kv("sweep.family_values", join(&self.sweep_family_values));
        kv("sweep.tau_min", self.sweep_tau_min.to_string());
        kv("sweep.tau_max", self.sweep_tau_max.to_string());
        kv("sweep.tau_points", self.sweep_tau_points.to_string());
        kv("sweep.d_values", join(&self.sweep_d_values));
        kv("map.x_l_min", self.map_x_l_min.to_string());
        kv("map.x_l_max", self.map_x_l_max.to_string());
        kv("map.x_u_min", self.map_x_u_min.to_string());
        kv("map.x_u_max", self.map_x_u_max.to_string());
        kv("map.step", self.map_step.to_string());
        kv("rates.i_values", join(&self.rates_i_values));
        kv("rates.d_min", self.rates_d_min.to_string());
        kv("rates.d_max", self.rates_d_max.to_string());
        kv("rates.d_points", self.rates_d_points.to_string());
        kv("rates.mc", self.rates_mc.to_string());
        kv("rates.mc_paths", self.rates_mc_paths.to_string());
        kv("rates.mc_dt", self.rates_mc_dt.to_string());
        kv("rates.mc_max_time", self.rates_mc_max_time.to_string());
        kv("check.samples", self.check_samples.to_string());
        kv("check.dt", self.check_dt.to_string());
        kv("trajectory.decimate", self.traj_decimate.to_string());
        kv("out.dir", self.out_dir.display().to_string());
        s
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses a flat `key = value` config file ('#' starts a comment).
pub fn parse_config_file(path: &Path, cfg: &mut RunConfig) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError(format!(
                "{}:{}: expected 'key = value'",
                path.display(),
                lineno + 1
            ))
        })?;
        cfg.apply(key.trim(), value)?;
    }
    Ok(())
}

#[derive(Parser, Debug)]
#[command(
    name = "lsr",
    about = "Logical stochastic resonance: noise-driven logic gates in a \
             piecewise-linear bistable system",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Simulate one run over the four input pairs and export x(t).
    Trajectory(CommonArgs),
    /// Estimate the success probability of the configured gate.
    Success(CommonArgs),
    /// Sweep the noise intensity D (one curve per family value).
    SweepD(CommonArgs),
    /// Sweep the correlation time tau (one curve per intensity).
    SweepTau(CommonArgs),
    /// Compute a 2-D success-probability map over the thresholds.
    Map(CommonArgs),
    /// Tabulate forward/backward escape rates over D per input level.
    Rates(CommonArgs),
    /// Generate a noise path and verify its (mean, D, tau) statistics.
    NoiseCheck(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline override, e.g. --set noise.tau=0.01 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (falls back to LSR_THREADS, then machine parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gate name: AND, OR, NAND, NOR.
    #[arg(long)]
    gate: Option<String>,
    /// Noise kind: dichotomous or gwn.
    #[arg(long)]
    noise: Option<String>,
    /// Noise intensity D.
    #[arg(long = "D")]
    d: Option<f64>,
    /// Correlation time tau.
    #[arg(long)]
    tau: Option<f64>,
    /// Asymmetry A.
    #[arg(long = "A")]
    asymmetry: Option<f64>,
}

enum RunError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

fn build_config(args: &CommonArgs) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &args.config {
        parse_config_file(path, &mut cfg)?;
    }
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.apply(k.trim(), v)?;
    }
    if let Some(g) = &args.gate {
        cfg.apply("gate", g)?;
    }
    if let Some(n) = &args.noise {
        cfg.apply("noise.kind", n)?;
    }
    if let Some(d) = args.d {
        cfg.apply("noise.D", &d.to_string())?;
    }
    if let Some(tau) = args.tau {
        cfg.apply("noise.tau", &tau.to_string())?;
    }
    if let Some(a) = args.asymmetry {
        cfg.apply("noise.A", &a.to_string())?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn write_output(
    cfg: &RunConfig,
    name: &str,
    subcommand: &str,
    csv: &str,
) -> Result<(), RunError> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| RunError::Runtime(format!("cannot create output dir: {e}")))?;
    let csv_path = cfg.out_dir.join(format!("{name}.csv"));
    std::fs::write(&csv_path, csv)
        .map_err(|e| RunError::Runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    let echo = cfg.echo();
    let mut meta = String::new();
    let _ = writeln!(meta, "subcommand = {subcommand}");
    let _ = writeln!(meta, "output = {name}.csv");
    let _ = writeln!(meta, "config_digest = {:016x}", fnv1a(echo.as_bytes()));
    meta.push_str(&echo);
    let meta_path = cfg.out_dir.join(format!("{name}.meta.txt"));
    std::fs::write(&meta_path, meta)
        .map_err(|e| RunError::Runtime(format!("cannot write {}: {e}", meta_path.display())))?;
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}

fn run_trajectory(cfg: &RunConfig) -> Result<(), RunError> {
    let wells = fixed_points(&cfg.model).map_err(|e| RunError::Config(e.to_string()))?;
    let model = cfg
        .noise_config()
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    let signal = encode_inputs(&INPUT_PAIRS, cfg.sim.amplitude, cfg.sim.segment_duration)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(crate::mix_seed(cfg.seed, 0, 0));
    let traj = integrate(&cfg.model, model, &signal, cfg.sim.dt, wells.x_in, &mut rng)
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let mut csv = String::from("time,x,I,Q\n");
    for k in (0..traj.times.len()).step_by(cfg.traj_decimate) {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            traj.times[k], traj.states[k], traj.inputs[k], traj.noise[k]
        );
    }
    write_output(cfg, "trajectory", "trajectory", &csv)
}

fn run_success(cfg: &RunConfig) -> Result<(), RunError> {
    let (p, stderr) =
        success_probability(&cfg.experiment()).map_err(|e| RunError::Runtime(e.to_string()))?;
    let mut csv = String::from("gate,D,tau,A,P,stderr,n_runs\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{}",
        cfg.gate.name(),
        cfg.d,
        cfg.tau,
        cfg.asymmetry,
        p,
        stderr,
        cfg.n_runs
    );
    eprintln!("P({}) = {p:.4} +- {stderr:.4}", cfg.gate.name());
    write_output(cfg, "success", "success", &csv)
}

fn run_sweep_d(cfg: &RunConfig) -> Result<(), RunError> {
    let d_grid = log_grid(cfg.sweep_d_min, cfg.sweep_d_max, cfg.sweep_d_points);
    let family = if cfg.sweep_family == "A" {
        IntensityFamily::Asymmetry(cfg.sweep_family_values.clone())
    } else {
        IntensityFamily::Tau(cfg.sweep_family_values.clone())
    };
    eprintln!(
        "sweep-d: {} points x {} curves, n_runs = {}",
        d_grid.len(),
        cfg.sweep_family_values.len(),
        cfg.n_runs
    );
    let sweep = sweep_over_intensity(&cfg.experiment(), &d_grid, &family)
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let mut csv = String::from("axis,family,P,stderr\n");
    for pt in &sweep.points {
        let _ = writeln!(csv, "{},{},{},{}", pt.axis, pt.family, pt.p, pt.stderr);
    }
    write_output(cfg, "sweep_d", "sweep-d", &csv)
}

fn run_sweep_tau(cfg: &RunConfig) -> Result<(), RunError> {
    let tau_grid = log_grid(cfg.sweep_tau_min, cfg.sweep_tau_max, cfg.sweep_tau_points);
    eprintln!(
        "sweep-tau: {} points x {} curves, n_runs = {}",
        tau_grid.len(),
        cfg.sweep_d_values.len(),
        cfg.n_runs
    );
    let sweep = sweep_over_correlation_time(&cfg.experiment(), &tau_grid, &cfg.sweep_d_values)
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let mut csv = String::from("axis,family,P,stderr\n");
    for pt in &sweep.points {
        let _ = writeln!(csv, "{},{},{},{}", pt.axis, pt.family, pt.p, pt.stderr);
    }
    write_output(cfg, "sweep_tau", "sweep-tau", &csv)
}

fn run_map(cfg: &RunConfig) -> Result<(), RunError> {
    let x_l_grid = step_grid(cfg.map_x_l_min, cfg.map_x_l_max, cfg.map_step);
    let x_u_grid = step_grid(cfg.map_x_u_min, cfg.map_x_u_max, cfg.map_step);
    eprintln!(
        "map: {} x {} cells, n_runs = {}",
        x_l_grid.len(),
        x_u_grid.len(),
        cfg.n_runs
    );
    let cells = threshold_map(&cfg.experiment(), &x_l_grid, &x_u_grid)
        .map_err(|e| RunError::Runtime(e.to_string()))?;
    let mut csv = String::from("x_l,x_u,P,stderr,degenerate\n");
    for c in &cells {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            c.x_l, c.x_u, c.p, c.stderr, c.degenerate
        );
    }
    write_output(cfg, "map", "map", &csv)
}

fn run_rates(cfg: &RunConfig) -> Result<(), RunError> {
    if cfg.noise_kind != "dichotomous" {
        return Err(RunError::Config(
            "rates requires noise.kind = dichotomous".into(),
        ));
    }
    let d_grid = log_grid(cfg.rates_d_min, cfg.rates_d_max, cfg.rates_d_points);
    let mc = cfg.rates_mc.then_some(McOptions {
        n_paths: cfg.rates_mc_paths,
        dt: cfg.rates_mc_dt,
        max_time: cfg.rates_mc_max_time,
        seed: cfg.seed,
    });
    let rows = rate_curves(
        &cfg.model,
        &cfg.rates_i_values,
        &d_grid,
        &cfg.noise_config(),
        mc,
    )
    .map_err(|e| RunError::Runtime(e.to_string()))?;
    let mut csv = String::from("D,I,tau,A,method,k_f,k_b,stderr\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.d, r.i_level, r.tau, r.asymmetry, r.method, r.k_f, r.k_b, r.stderr
        );
    }
    write_output(cfg, "rates", "rates", &csv)
}

fn run_noise_check(cfg: &RunConfig) -> Result<(), RunError> {
    let spec = DichotomousNoiseSpec::from_macro(
        cfg.d,
        cfg.tau,
        cfg.asymmetry,
        cfg.mean_mode,
        cfg.scaling,
    )
    .map_err(|e| RunError::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(crate::mix_seed(cfg.seed, 0, 0));
    let path = generate_path(&spec, cfg.check_dt, cfg.check_samples, &mut rng);
    let stats =
        estimate_statistics(&path, spec.tau()).map_err(|e| RunError::Runtime(e.to_string()))?;
    let d_ref = spec.intensity();
    let tau_ref = spec.tau();
    eprintln!(
        "noise-check: mean = {:+.5} (target 0), tau_hat = {:.5} ({:+.2}%), \
         D_hat = {:.5} ({:+.2}%)",
        stats.mean,
        stats.tau_hat,
        100.0 * (stats.tau_hat - tau_ref) / tau_ref,
        stats.d_hat,
        100.0 * (stats.d_hat - d_ref) / d_ref
    );
    let mut csv = String::from("mean,D_hat,tau_hat,variance,D_ref,tau_ref,samples,dt\n");
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        stats.mean,
        stats.d_hat,
        stats.tau_hat,
        stats.variance,
        d_ref,
        tau_ref,
        cfg.check_samples,
        cfg.check_dt
    );
    write_output(cfg, "noise_check", "noise-check", &csv)
}

fn dispatch(cmd: &Cmd) -> Result<(), RunError> {
    let args = match cmd {
        Cmd::Trajectory(a)
        | Cmd::Success(a)
        | Cmd::SweepD(a)
        | Cmd::SweepTau(a)
        | Cmd::Map(a)
        | Cmd::Rates(a)
        | Cmd::NoiseCheck(a) => a,
    };
    let cfg = build_config(args)?;
    let threads = args
        .threads
        .or_else(|| {
            std::env::var("LSR_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .filter(|&n| n > 0);
    let body = || match cmd {
        Cmd::Trajectory(_) => run_trajectory(&cfg),
        Cmd::Success(_) => run_success(&cfg),
        Cmd::SweepD(_) => run_sweep_d(&cfg),
        Cmd::SweepTau(_) => run_sweep_tau(&cfg),
        Cmd::Map(_) => run_map(&cfg),
        Cmd::Rates(_) => run_rates(&cfg),
        Cmd::NoiseCheck(_) => run_noise_check(&cfg),
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Runtime(format!("cannot build thread pool: {e}")))?;
            pool.install(body)
        }
        None => body(),
    }
}

/// Runs the CLI on the given argument vector (including the program name)
/// and returns the process exit code: 0 success, 1 runtime error,
/// 2 configuration/usage error.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap reserves exit code 2 for usage errors; --help/--version
            // exit 0.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli.cmd) {
        Ok(()) => 0,
        Err(RunError::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(RunError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            1
        }
    }
}
