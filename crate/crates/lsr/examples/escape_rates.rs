//! Tabulate forward and backward escape rates versus noise intensity for
//! the three logic input levels, comparing the exact quadrature with the
//! steepest-descent asymptotics and a Monte-Carlo spot check.
//!
//! Run with: cargo run --release --example escape_rates

use lsr::model::PotentialParams;
use lsr::noise::{AmplitudeScaling, DichotomousNoiseSpec, MeanMode};
use lsr::theory::{
    escape_rate_monte_carlo, escape_rate_quadrature, escape_rate_steepest_descent, Direction,
    McOptions,
};

fn spec(d: f64) -> DichotomousNoiseSpec {
    DichotomousNoiseSpec::from_macro(d, 0.01, 0.0, MeanMode::ZeroMean, AmplitudeScaling::Drive)
        .expect("valid noise parameters")
}

fn main() {
    let params = PotentialParams::standard();
    println!("D,I,k_f_quadrature,k_b_quadrature,k_f_steepest_descent");
    for &i_level in &[-0.8, 0.0, 0.8] {
        for &d in &[0.04, 0.05, 0.07, 0.1] {
            let s = spec(d);
            let k_f = escape_rate_quadrature(&params, i_level, &s, Direction::Forward).unwrap();
            let k_b = escape_rate_quadrature(&params, i_level, &s, Direction::Backward).unwrap();
            let k_sd = escape_rate_steepest_descent(&params, i_level, &s, Direction::Forward)
                .map(|k| format!("{k:.4e}"))
                .unwrap_or_else(|_| "n/a".into());
            println!("{d},{i_level},{k_f:.4e},{k_b:.4e},{k_sd}");
        }
    }
    // Monte-Carlo arbitration at one fast cell.
    let s = spec(0.07);
    let kq = escape_rate_quadrature(&params, 0.8, &s, Direction::Forward).unwrap();
    let mc = escape_rate_monte_carlo(
        &params,
        0.8,
        &s,
        Direction::Forward,
        McOptions {
            n_paths: 300,
            dt: 0.001,
            max_time: 500.0,
            seed: 7,
        },
    )
    .unwrap();
    eprintln!(
        "I = 0.8, D = 0.07: quadrature k_f = {kq:.4e}, Monte Carlo = {:.4e} +- {:.1e} \
         ({} escapes / {} paths)",
        mc.k, mc.stderr, mc.escapes, mc.paths
    );
}
