//! Sweep the noise intensity D for two correlation times and print the
//! P(AND) resonance curves. The optimal window shifts right as the
//! correlation time grows.
//!
//! Run with: cargo run --release --example intensity_sweep

use lsr::experiments::{
    log_grid, sweep_over_intensity, ExperimentConfig, IntensityFamily,
};

fn main() {
    let cfg = ExperimentConfig {
        n_runs: 200,
        master_seed: 3,
        ..ExperimentConfig::standard_and()
    };
    let d_grid = log_grid(1e-4, 0.2, 12);
    let family = IntensityFamily::Tau(vec![0.001, 0.01]);
    let sweep = sweep_over_intensity(&cfg, &d_grid, &family).expect("valid sweep");
    println!("D,tau,P,stderr");
    for pt in &sweep.points {
        println!("{:.6},{},{:.3},{:.3}", pt.axis, pt.family, pt.p, pt.stderr);
    }
    for tau in [0.001, 0.01] {
        eprintln!(
            "tau = {tau}: best D = {:.4}",
            sweep.argmax_axis(tau).unwrap()
        );
    }
}
