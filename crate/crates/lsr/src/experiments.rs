//! Success-probability estimation and parameter sweeps.
//!
//! A run presents the four input pairs in a fresh random order and counts
//! as a success only when every segment decodes to the gate's truth-table
//! output. All sweeps derive their per-run random streams from
//! `(master_seed, cell index, run index)`, so results are identical for
//! any worker-pool size and for sequential execution.

use crate::mix_seed;
use crate::model::{fixed_points, ModelError, PotentialParams};
use crate::noise::{AmplitudeScaling, DichotomousNoiseSpec, MeanMode, NoiseError};
use crate::simulate::{
    encode_inputs, gate_run, DecodeMode, LogicGate, NoiseModel, SimError, INPUT_PAIRS,
};
use crate::theory::{
    escape_rate_monte_carlo, escape_rate_quadrature, Direction, McOptions, TheoryError,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Errors raised while running experiments.
#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("theory error: {0}")]
    Theory(String),
    #[error("invalid experiment setting: {0}")]
    Invalid(String),
}

impl From<TheoryError> for ExperimentError {
    fn from(e: TheoryError) -> Self {
        ExperimentError::Theory(e.to_string())
    }
}

/// Integration and decoding settings shared by all gate experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub dt: f64,
    pub segment_duration: f64,
    pub transient_fraction: f64,
    /// Per-input drive magnitude (logic 1 -> +amplitude).
    pub amplitude: f64,
    pub decode: DecodeMode,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            dt: 0.01,
            segment_duration: 250.0,
            transient_fraction: 0.25,
            amplitude: 0.4,
            decode: DecodeMode::Majority,
        }
    }
}

/// Noise configuration in macroscopic parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseConfig {
    Dichotomous {
        d: f64,
        tau: f64,
        asymmetry: f64,
        mean_mode: MeanMode,
        scaling: AmplitudeScaling,
        /// Multiply the added level by `D` (the literal drive reading).
        literal_prefactor: bool,
    },
    Gaussian {
        d: f64,
    },
}

impl NoiseConfig {
    /// Symmetric zero-mean telegraph noise in the drive scaling.
    pub fn dichotomous(d: f64, tau: f64) -> Self {
        NoiseConfig::Dichotomous {
            d,
            tau,
            asymmetry: 0.0,
            mean_mode: MeanMode::ZeroMean,
            scaling: AmplitudeScaling::Drive,
            literal_prefactor: false,
        }
    }

    /// Returns a copy with the intensity replaced.
    pub fn with_intensity(self, d_new: f64) -> Self {
        match self {
            NoiseConfig::Dichotomous {
                tau,
                asymmetry,
                mean_mode,
                scaling,
                literal_prefactor,
                ..
            } => NoiseConfig::Dichotomous {
                d: d_new,
                tau,
                asymmetry,
                mean_mode,
                scaling,
                literal_prefactor,
            },
            NoiseConfig::Gaussian { .. } => NoiseConfig::Gaussian { d: d_new },
        }
    }

    /// Returns a copy with the correlation time replaced (no-op for GWN).
    pub fn with_tau(self, tau_new: f64) -> Self {
        match self {
            NoiseConfig::Dichotomous {
                d,
                asymmetry,
                mean_mode,
                scaling,
                literal_prefactor,
                ..
            } => NoiseConfig::Dichotomous {
                d,
                tau: tau_new,
                asymmetry,
                mean_mode,
                scaling,
                literal_prefactor,
            },
            g => g,
        }
    }

    /// Returns a copy with the asymmetry replaced (no-op for GWN).
    pub fn with_asymmetry(self, a_new: f64) -> Self {
        match self {
            NoiseConfig::Dichotomous {
                d,
                tau,
                mean_mode,
                scaling,
                literal_prefactor,
                ..
            } => NoiseConfig::Dichotomous {
                d,
                tau,
                asymmetry: a_new,
                mean_mode,
                scaling,
                literal_prefactor,
            },
            g => g,
        }
    }

    /// Builds the simulation-facing noise model.
    pub fn build(&self) -> Result<NoiseModel, NoiseError> {
        Ok(match *self {
            NoiseConfig::Dichotomous {
                d,
                tau,
                asymmetry,
                mean_mode,
                scaling,
                literal_prefactor,
            } => NoiseModel::Dichotomous {
                spec: DichotomousNoiseSpec::from_macro(d, tau, asymmetry, mean_mode, scaling)?,
                gain: if literal_prefactor { d } else { 1.0 },
            },
            NoiseConfig::Gaussian { d } => NoiseModel::Gaussian { d },
        })
    }

    /// The telegraph spec, if this is a dichotomous configuration.
    pub fn spec(&self) -> Option<DichotomousNoiseSpec> {
        match self.build() {
            Ok(NoiseModel::Dichotomous { spec, .. }) => Some(spec),
            _ => None,
        }
    }
}

/// A complete gate experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub gate: LogicGate,
    pub params: PotentialParams,
    pub noise: NoiseConfig,
    pub sim: SimSettings,
    pub n_runs: usize,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// AND gate at the standard operating point.
    pub fn standard_and() -> Self {
        ExperimentConfig {
            gate: LogicGate::And,
            params: PotentialParams::standard(),
            noise: NoiseConfig::dichotomous(0.05, 0.01),
            sim: SimSettings::default(),
            n_runs: 1000,
            master_seed: 0,
        }
    }
}

/// One point of a 1-D sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    /// Swept axis value (D or tau).
    pub axis: f64,
    /// Family parameter the curve belongs to (A, tau or D).
    pub family: f64,
    pub p: f64,
    pub stderr: f64,
}

/// A family of success-probability curves.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// The axis value maximizing P within one family curve (first maximum).
    pub fn argmax_axis(&self, family: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|pt| pt.family == family)
            .max_by(|a, b| a.p.partial_cmp(&b.p).unwrap())
            .map(|pt| pt.axis)
    }
}

/// One cell of a 2-D threshold map.
#[derive(Debug, Clone, Copy)]
pub struct MapCell {
    pub x_l: f64,
    pub x_u: f64,
    pub p: f64,
    pub stderr: f64,
    /// True when the thresholds are not bistable; such cells score P = 0.
    pub degenerate: bool,
}

/// One row of a rate table.
#[derive(Debug, Clone, Copy)]
pub struct RateRow {
    pub d: f64,
    pub i_level: f64,
    pub tau: f64,
    pub asymmetry: f64,
    /// "quadrature" or "monte-carlo".
    pub method: &'static str,
    pub k_f: f64,
    pub k_b: f64,
    /// Monte-Carlo standard error (forward), 0 for quadrature.
    pub stderr: f64,
}

/// Binomial standard error of a proportion.
fn binomial_stderr(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Estimates the success probability with the runs of sweep cell `cell`.
///
/// Each run draws a fresh uniformly random presentation order of the four
/// input pairs from its own seeded stream, so the estimate is independent
/// of scheduling and of the number of worker threads.
pub fn success_probability_cell(
    cfg: &ExperimentConfig,
    cell: u64,
) -> Result<(f64, f64), ExperimentError> {
    if cfg.n_runs == 0 {
        return Err(ExperimentError::Invalid("n_runs must be >= 1".into()));
    }
    let wells = fixed_points(&cfg.params)?;
    let model = cfg.noise.build()?;
    let successes: usize = (0..cfg.n_runs)
        .into_par_iter()
        .map(|run| -> Result<usize, ExperimentError> {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.master_seed, cell, run as u64));
            let mut pairs = INPUT_PAIRS;
            pairs.shuffle(&mut rng);
            let signal = encode_inputs(&pairs, cfg.sim.amplitude, cfg.sim.segment_duration)?;
            let outcome = gate_run(
                &cfg.params,
                model,
                cfg.gate,
                &signal,
                &wells,
                cfg.sim.dt,
                cfg.sim.transient_fraction,
                cfg.sim.decode,
                &mut rng,
            )?;
            Ok(usize::from(outcome.success))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let p = successes as f64 / cfg.n_runs as f64;
    Ok((p, binomial_stderr(p, cfg.n_runs)))
}

/// Estimates the success probability of a single configuration.
pub fn success_probability(cfg: &ExperimentConfig) -> Result<(f64, f64), ExperimentError> {
    success_probability_cell(cfg, 0)
}

/// Family parameter for intensity sweeps.
#[derive(Debug, Clone)]
pub enum IntensityFamily {
    /// One curve per asymmetry value.
    Asymmetry(Vec<f64>),
    /// One curve per correlation time.
    Tau(Vec<f64>),
}

/// Sweeps the noise intensity, one curve per family member.
pub fn sweep_over_intensity(
    cfg: &ExperimentConfig,
    d_grid: &[f64],
    family: &IntensityFamily,
) -> Result<SweepResult, ExperimentError> {
    validate_grid(d_grid, "D grid")?;
    let family_values: &[f64] = match family {
        IntensityFamily::Asymmetry(v) => v,
        IntensityFamily::Tau(v) => v,
    };
    if family_values.is_empty() {
        return Err(ExperimentError::Invalid("empty family".into()));
    }
    let mut points = Vec::with_capacity(d_grid.len() * family_values.len());
    let mut cell = 0u64;
    for &fam in family_values {
        for &d in d_grid {
            let noise = match family {
                IntensityFamily::Asymmetry(_) => cfg.noise.with_intensity(d).with_asymmetry(fam),
                IntensityFamily::Tau(_) => cfg.noise.with_intensity(d).with_tau(fam),
            };
            let cell_cfg = ExperimentConfig { noise, ..*cfg };
            let (p, stderr) = success_probability_cell(&cell_cfg, cell)?;
            points.push(SweepPoint {
                axis: d,
                family: fam,
                p,
                stderr,
            });
            cell += 1;
        }
    }
    Ok(SweepResult { points })
}

/// Sweeps the correlation time, one curve per intensity.
pub fn sweep_over_correlation_time(
    cfg: &ExperimentConfig,
    tau_grid: &[f64],
    d_values: &[f64],
) -> Result<SweepResult, ExperimentError> {
    validate_grid(tau_grid, "tau grid")?;
    if d_values.is_empty() {
        return Err(ExperimentError::Invalid("empty D family".into()));
    }
    let mut points = Vec::with_capacity(tau_grid.len() * d_values.len());
    let mut cell = 0u64;
    for &d in d_values {
        for &tau in tau_grid {
            let noise = cfg.noise.with_intensity(d).with_tau(tau);
            let cell_cfg = ExperimentConfig { noise, ..*cfg };
            let (p, stderr) = success_probability_cell(&cell_cfg, cell)?;
            points.push(SweepPoint {
                axis: tau,
                family: d,
                p,
                stderr,
            });
            cell += 1;
        }
    }
    Ok(SweepResult { points })
}

/// Computes the 2-D success-probability map over threshold grids.
///
/// Non-bistable cells are flagged degenerate and score P = 0 so the map
/// always renders completely.
pub fn threshold_map(
    cfg: &ExperimentConfig,
    x_l_grid: &[f64],
    x_u_grid: &[f64],
) -> Result<Vec<MapCell>, ExperimentError> {
    validate_grid(x_l_grid, "x_l grid")?;
    validate_grid(x_u_grid, "x_u grid")?;
    let mut cells = Vec::with_capacity(x_l_grid.len() * x_u_grid.len());
    let mut cell = 0u64;
    for &x_l in x_l_grid {
        for &x_u in x_u_grid {
            let params = cfg.params.with_thresholds(x_l, x_u);
            let degenerate = fixed_points(&params).is_err();
            if degenerate {
                cells.push(MapCell {
                    x_l,
                    x_u,
                    p: 0.0,
                    stderr: 0.0,
                    degenerate: true,
                });
            } else {
                let cell_cfg = ExperimentConfig { params, ..*cfg };
                let (p, stderr) = success_probability_cell(&cell_cfg, cell)?;
                cells.push(MapCell {
                    x_l,
                    x_u,
                    p,
                    stderr,
                    degenerate: false,
                });
            }
            cell += 1;
        }
    }
    Ok(cells)
}

/// Computes escape-rate curves k_f(D), k_b(D) per input level by
/// quadrature, optionally adding Monte-Carlo oracle rows.
pub fn rate_curves(
    params: &PotentialParams,
    i_values: &[f64],
    d_grid: &[f64],
    noise: &NoiseConfig,
    mc: Option<McOptions>,
) -> Result<Vec<RateRow>, ExperimentError> {
    validate_grid(d_grid, "D grid")?;
    let (tau, asymmetry) = match *noise {
        NoiseConfig::Dichotomous { tau, asymmetry, .. } => (tau, asymmetry),
        NoiseConfig::Gaussian { .. } => {
            return Err(ExperimentError::Invalid(
                "rate curves require dichotomous noise".into(),
            ))
        }
    };
    let mut rows = Vec::new();
    for &i_level in i_values {
        for &d in d_grid {
            let spec = noise
                .with_intensity(d)
                .spec()
                .ok_or_else(|| ExperimentError::Invalid("no telegraph spec".into()))?;
            let k_f = escape_rate_quadrature(params, i_level, &spec, Direction::Forward)?;
            let k_b = escape_rate_quadrature(params, i_level, &spec, Direction::Backward)?;
            rows.push(RateRow {
                d,
                i_level,
                tau,
                asymmetry,
                method: "quadrature",
                k_f,
                k_b,
                stderr: 0.0,
            });
            if let Some(opts) = mc {
                match escape_rate_monte_carlo(params, i_level, &spec, Direction::Forward, opts) {
                    Ok(r) => rows.push(RateRow {
                        d,
                        i_level,
                        tau,
                        asymmetry,
                        method: "monte-carlo",
                        k_f: r.k,
                        k_b: f64::NAN,
                        stderr: r.stderr,
                    }),
                    Err(TheoryError::AllCensored { k_upper, .. }) => rows.push(RateRow {
                        d,
                        i_level,
                        tau,
                        asymmetry,
                        method: "monte-carlo",
                        k_f: k_upper,
                        k_b: f64::NAN,
                        stderr: f64::NAN,
                    }),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok(rows)
}

/// Log-spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Linear grid from `lo` to `hi` with the given step.
pub fn step_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo);
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

fn validate_grid(grid: &[f64], name: &str) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::Invalid(format!("{name} is empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::Invalid(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}
