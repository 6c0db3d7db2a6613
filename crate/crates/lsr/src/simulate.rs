//! Logic-input encoding, forward integration and output decoding.
//!
//! A run presents the four binary input pairs in some order as a
//! piecewise-constant drive `I(t)`, integrates the noisy dynamics with an
//! explicit Euler scheme (the noise level itself is advanced by the exact
//! Markov transition probability each step) and decodes one output bit per
//! segment by majority vote over the post-transient samples:
//! `x > x_top` reads as logical 1.

use crate::model::{drift, PotentialParams, WellStructure};
use crate::noise::{gwn_increment, DichotomousNoiseSpec};
use rand::Rng;
use thiserror::Error;

/// Errors raised during simulation and decoding.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    /// |x| exceeded the blow-up guard; the step size is too large.
    #[error("numerical blow-up: |x| = {x:.3e} at step {step} (reduce dt)")]
    NumericalBlowup { x: f64, step: usize },
    /// A segment contained no post-transient samples to vote on.
    #[error("segment {0} has no post-transient samples")]
    EmptySegment(usize),
    /// Invalid simulation setting.
    #[error("invalid simulation setting: {0}")]
    InvalidSetting(String),
}

/// Supported logic gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicGate {
    And,
    Or,
    Nand,
    Nor,
}

impl LogicGate {
    /// Truth-table output for an input pair.
    pub fn expected(&self, b1: u8, b2: u8) -> u8 {
        let and = b1 & b2 & 1;
        let or = (b1 | b2) & 1;
        match self {
            LogicGate::And => and,
            LogicGate::Or => or,
            LogicGate::Nand => 1 - and,
            LogicGate::Nor => 1 - or,
        }
    }

    /// Parses a gate name (case-insensitive).
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AND" => Some(LogicGate::And),
            "OR" => Some(LogicGate::Or),
            "NAND" => Some(LogicGate::Nand),
            "NOR" => Some(LogicGate::Nor),
            _ => None,
        }
    }

    /// Canonical name.
    pub fn name(&self) -> &'static str {
        match self {
            LogicGate::And => "AND",
            LogicGate::Or => "OR",
            LogicGate::Nand => "NAND",
            LogicGate::Nor => "NOR",
        }
    }
}

/// One constant-input segment of a logic signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// The binary input pair.
    pub bits: (u8, u8),
    /// Drive level `I = I_1 + I_2` with bit 1 -> +amplitude, 0 -> -amplitude.
    pub level: f64,
}

/// A piecewise-constant logic input signal.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicSignal {
    /// Ordered segments.
    pub segments: Vec<Segment>,
    /// Per-input magnitude.
    pub amplitude: f64,
    /// Duration of each segment in time units.
    pub segment_duration: f64,
}

/// The four input pairs in canonical order.
pub const INPUT_PAIRS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Encodes a sequence of input pairs into a [`LogicSignal`].
pub fn encode_inputs(
    pairs: &[(u8, u8)],
    amplitude: f64,
    segment_duration: f64,
) -> Result<LogicSignal, SimError> {
    if !(amplitude > 0.0) {
        return Err(SimError::InvalidSetting(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    if !(segment_duration > 0.0) {
        return Err(SimError::InvalidSetting(format!(
            "segment_duration must be positive, got {segment_duration}"
        )));
    }
    let bit_level = |b: u8| if b & 1 == 1 { amplitude } else { -amplitude };
    let segments = pairs
        .iter()
        .map(|&(b1, b2)| Segment {
            bits: (b1, b2),
            level: bit_level(b1) + bit_level(b2),
        })
        .collect();
    Ok(LogicSignal {
        segments,
        amplitude,
        segment_duration,
    })
}

/// The stochastic forcing added to the drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Telegraph noise; `gain` scales the level added to the drift
    /// (1 by default; set to `D` to recover the literal `D*Q(t)` reading).
    Dichotomous {
        spec: DichotomousNoiseSpec,
        gain: f64,
    },
    /// Gaussian white noise of intensity `D`.
    Gaussian { d: f64 },
}

/// A sampled trajectory. Sample `k` holds the state after `k+1` Euler
/// steps, at time `(k+1)*dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Input level in force during each step.
    pub inputs: Vec<f64>,
    /// Noise value added during each step (telegraph level or scaled
    /// Gaussian increment per unit time).
    pub noise: Vec<f64>,
    pub dt: f64,
    pub x0: f64,
}

/// A decoded run: one bit per segment plus the expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedRun {
    pub decoded: Vec<u8>,
    pub expected: Vec<u8>,
    pub success: bool,
}

/// How a segment's samples become a bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// Bit 1 when the strict majority of post-transient samples exceed
    /// the barrier.
    Majority,
    /// Bit read from the final sample of the segment only.
    FinalSample,
}

const BLOWUP_GUARD: f64 = 1e3;

/// Internal single-source stepper shared by the recording integrator and
/// the lean gate-run path, so both produce bit-identical states.
struct Stepper<'a> {
    params: &'a PotentialParams,
    model: NoiseModel,
    dt: f64,
    x: f64,
    /// Current telegraph level (unused in the Gaussian model).
    q: f64,
    stay1: f64,
    stay2: f64,
}

impl<'a> Stepper<'a> {
    fn new<R: Rng>(
        params: &'a PotentialParams,
        model: NoiseModel,
        dt: f64,
        x0: f64,
        rng: &mut R,
    ) -> Self {
        let (q, stay1, stay2) = match model {
            NoiseModel::Dichotomous { spec, .. } => {
                let gamma = spec.gamma();
                let e = (-gamma * dt).exp();
                (
                    spec.stationary_draw(rng),
                    (spec.alpha + spec.beta * e) / gamma,
                    (spec.beta + spec.alpha * e) / gamma,
                )
            }
            NoiseModel::Gaussian { .. } => (0.0, 1.0, 1.0),
        };
        Stepper {
            params,
            model,
            dt,
            x: x0,
            q,
            stay1,
            stay2,
        }
    }

    /// Advances one Euler step under input `level`; returns the noise
    /// contribution used this step (for recording).
    #[inline]
    fn step<R: Rng>(&mut self, level: f64, rng: &mut R) -> f64 {
        match self.model {
            NoiseModel::Dichotomous { spec, gain } => {
                let qeff = gain * self.q;
                self.x += (drift(self.x, self.params) + level + qeff) * self.dt;
                let stay = if self.q == spec.delta1 {
                    self.stay1
                } else {
                    self.stay2
                };
                if rng.gen::<f64>() > stay {
                    self.q = if self.q == spec.delta1 {
                        spec.delta2
                    } else {
                        spec.delta1
                    };
                }
                qeff
            }
            NoiseModel::Gaussian { d } => {
                let dw = gwn_increment(d, self.dt, rng);
                self.x += (drift(self.x, self.params) + level) * self.dt + dw;
                dw / self.dt
            }
        }
    }
}

/// Number of Euler steps per segment.
fn steps_per_segment(signal: &LogicSignal, dt: f64) -> usize {
    (signal.segment_duration / dt).round() as usize
}

/// Integrates the driven system and records the full trajectory.
pub fn integrate<R: Rng>(
    params: &PotentialParams,
    model: NoiseModel,
    signal: &LogicSignal,
    dt: f64,
    x0: f64,
    rng: &mut R,
) -> Result<Trajectory, SimError> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidSetting(format!("dt must be positive, got {dt}")));
    }
    let m = steps_per_segment(signal, dt);
    let n = m * signal.segments.len();
    let mut traj = Trajectory {
        times: Vec::with_capacity(n),
        states: Vec::with_capacity(n),
        inputs: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
        dt,
        x0,
    };
    let mut stepper = Stepper::new(params, model, dt, x0, rng);
    let mut step_idx = 0usize;
    for seg in &signal.segments {
        for _ in 0..m {
            let qeff = stepper.step(seg.level, rng);
            step_idx += 1;
            if stepper.x.abs() > BLOWUP_GUARD {
                return Err(SimError::NumericalBlowup {
                    x: stepper.x,
                    step: step_idx,
                });
            }
            traj.times.push(step_idx as f64 * dt);
            traj.states.push(stepper.x);
            traj.inputs.push(seg.level);
            traj.noise.push(qeff);
        }
    }
    Ok(traj)
}

/// Decodes a recorded trajectory segment by segment.
pub fn decode_output(
    traj: &Trajectory,
    signal: &LogicSignal,
    wells: &WellStructure,
    transient_fraction: f64,
    mode: DecodeMode,
) -> Result<Vec<u8>, SimError> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(SimError::InvalidSetting(format!(
            "transient_fraction must lie in [0, 1), got {transient_fraction}"
        )));
    }
    let m = steps_per_segment(signal, traj.dt);
    let skip = (transient_fraction * m as f64).floor() as usize;
    let mut bits = Vec::with_capacity(signal.segments.len());
    for (s, _) in signal.segments.iter().enumerate() {
        let lo = s * m + skip;
        let hi = (s + 1) * m;
        if lo >= hi || hi > traj.states.len() {
            return Err(SimError::EmptySegment(s));
        }
        let bit = match mode {
            DecodeMode::Majority => {
                let above = traj.states[lo..hi]
                    .iter()
                    .filter(|&&x| x > wells.x_top)
                    .count();
                u8::from(2 * above > hi - lo)
            }
            DecodeMode::FinalSample => u8::from(traj.states[hi - 1] > wells.x_top),
        };
        bits.push(bit);
    }
    Ok(bits)
}

/// Integrates and decodes one gate run without recording the trajectory.
///
/// Produces exactly the bits that [`integrate`] + [`decode_output`] would,
/// while streaming the majority count, so large sweeps stay allocation-free.
pub fn gate_run<R: Rng>(
    params: &PotentialParams,
    model: NoiseModel,
    gate: LogicGate,
    signal: &LogicSignal,
    wells: &WellStructure,
    dt: f64,
    transient_fraction: f64,
    mode: DecodeMode,
    rng: &mut R,
) -> Result<DecodedRun, SimError> {
    let m = steps_per_segment(signal, dt);
    let skip = (transient_fraction * m as f64).floor() as usize;
    if skip >= m {
        return Err(SimError::EmptySegment(0));
    }
    let mut stepper = Stepper::new(params, model, dt, wells.x_in, rng);
    let mut decoded = Vec::with_capacity(signal.segments.len());
    let mut expected = Vec::with_capacity(signal.segments.len());
    let mut step_idx = 0usize;
    for seg in &signal.segments {
        let mut above = 0usize;
        let mut last = stepper.x;
        for k in 0..m {
            stepper.step(seg.level, rng);
            step_idx += 1;
            if stepper.x.abs() > BLOWUP_GUARD {
                return Err(SimError::NumericalBlowup {
                    x: stepper.x,
                    step: step_idx,
                });
            }
            if k >= skip && stepper.x > wells.x_top {
                above += 1;
            }
            last = stepper.x;
        }
        let bit = match mode {
            DecodeMode::Majority => u8::from(2 * above > m - skip),
            DecodeMode::FinalSample => u8::from(last > wells.x_top),
        };
        decoded.push(bit);
        expected.push(gate.expected(seg.bits.0, seg.bits.1));
    }
    let success = decoded == expected;
    Ok(DecodedRun {
        decoded,
        expected,
        success,
    })
}
