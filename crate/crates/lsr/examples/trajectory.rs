//! Simulate one gate run over the four input pairs and print a decimated
//! x(t) stream together with the decoded output bits.
//!
//! Run with: cargo run --release --example trajectory

use lsr::model::{fixed_points, PotentialParams};
use lsr::noise::{AmplitudeScaling, DichotomousNoiseSpec, MeanMode};
use lsr::simulate::{
    decode_output, encode_inputs, integrate, DecodeMode, LogicGate, NoiseModel, INPUT_PAIRS,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = PotentialParams::standard();
    let wells = fixed_points(&params).expect("standard parameters are bistable");
    let spec = DichotomousNoiseSpec::from_macro(
        0.05, // noise intensity D
        0.01, // correlation time tau
        0.0,  // symmetric levels
        MeanMode::ZeroMean,
        AmplitudeScaling::Drive,
    )
    .expect("valid noise parameters");
    let signal = encode_inputs(&INPUT_PAIRS, 0.4, 250.0).expect("valid signal");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let traj = integrate(
        &params,
        NoiseModel::Dichotomous { spec, gain: 1.0 },
        &signal,
        0.01,
        wells.x_in,
        &mut rng,
    )
    .expect("integration stays bounded");
    println!("time,x,I");
    for k in (0..traj.times.len()).step_by(100) {
        println!("{:.2},{:.4},{}", traj.times[k], traj.states[k], traj.inputs[k]);
    }
    let bits = decode_output(&traj, &signal, &wells, 0.25, DecodeMode::Majority)
        .expect("non-empty segments");
    let expected: Vec<u8> = INPUT_PAIRS
        .iter()
        .map(|&(b1, b2)| LogicGate::And.expected(b1, b2))
        .collect();
    eprintln!("decoded AND bits: {bits:?} (expected {expected:?})");
}
