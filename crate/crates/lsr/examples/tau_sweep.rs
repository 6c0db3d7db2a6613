//! Sweep the noise correlation time at fixed intensity: P(AND) rises,
//! peaks and falls — resonance in the correlation time as well.
//!
//! Run with: cargo run --release --example tau_sweep

use lsr::experiments::{log_grid, sweep_over_correlation_time, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig {
        n_runs: 200,
        master_seed: 5,
        ..ExperimentConfig::standard_and()
    };
    let tau_grid = log_grid(1e-4, 1e-1, 12);
    let sweep =
        sweep_over_correlation_time(&cfg, &tau_grid, &[0.05]).expect("valid sweep");
    println!("tau,D,P,stderr");
    for pt in &sweep.points {
        println!("{:.6},{},{:.3},{:.3}", pt.axis, pt.family, pt.p, pt.stderr);
    }
    eprintln!("best tau at D = 0.05: {:.5}", sweep.argmax_axis(0.05).unwrap());
}
