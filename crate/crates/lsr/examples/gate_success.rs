//! Estimate the success probability of the AND gate at a few noise
//! intensities, demonstrating the resonance window.
//!
//! Run with: cargo run --release --example gate_success

use lsr::experiments::{success_probability, ExperimentConfig, NoiseConfig};

fn main() {
    let base = ExperimentConfig {
        n_runs: 300,
        master_seed: 1,
        ..ExperimentConfig::standard_and()
    };
    println!("D,P(AND),stderr");
    for d in [0.0003, 0.01, 0.03, 0.05, 0.07, 0.1, 0.2] {
        let cfg = ExperimentConfig {
            noise: NoiseConfig::dichotomous(d, 0.01),
            ..base
        };
        let (p, stderr) = success_probability(&cfg).expect("valid configuration");
        println!("{d},{p:.3},{stderr:.3}");
    }
    eprintln!("the gate works reliably only inside an optimal noise window");
}
