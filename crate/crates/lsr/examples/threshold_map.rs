//! Map the success probability over the two thresholds (x_l, x_u) for the
//! AND and OR gates at the same noise operating point: moving the
//! thresholds switches which gate the system computes.
//!
//! Run with: cargo run --release --example threshold_map

use lsr::experiments::{step_grid, threshold_map, ExperimentConfig, NoiseConfig};
use lsr::simulate::LogicGate;

fn main() {
    let x_l_grid = step_grid(-2.0, -0.25, 0.25);
    let x_u_grid = step_grid(0.25, 2.0, 0.25);
    for gate in [LogicGate::And, LogicGate::Or] {
        let cfg = ExperimentConfig {
            gate,
            noise: NoiseConfig::dichotomous(0.05, 0.01),
            n_runs: 100,
            master_seed: 11,
            ..ExperimentConfig::standard_and()
        };
        let cells = threshold_map(&cfg, &x_l_grid, &x_u_grid).expect("valid map");
        println!("# gate = {}", gate.name());
        println!("x_l,x_u,P,degenerate");
        for c in &cells {
            println!("{},{},{:.2},{}", c.x_l, c.x_u, c.p, c.degenerate);
        }
        let at = |xl: f64, xu: f64| {
            cells
                .iter()
                .find(|c| (c.x_l - xl).abs() < 1e-9 && (c.x_u - xu).abs() < 1e-9)
                .unwrap()
                .p
        };
        eprintln!(
            "{}: P at (-1.5, 0.5) = {:.2}, P at (-0.5, 1.5) = {:.2}",
            gate.name(),
            at(-1.5, 0.5),
            at(-0.5, 1.5)
        );
    }
}
