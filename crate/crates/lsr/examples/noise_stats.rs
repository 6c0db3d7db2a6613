//! Generate a telegraph-noise path and verify that its empirical mean,
//! intensity and correlation time recover the specification, plus a
//! density sanity check of the metastable well.
//!
//! Run with: cargo run --release --example noise_stats

use lsr::model::PotentialParams;
use lsr::noise::{estimate_statistics, generate_path, DichotomousNoiseSpec};
use lsr::theory::{stationary_density, Well};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // Levels +-1 at tau = 0.01 (D = 0.01, symmetric).
    let spec = DichotomousNoiseSpec::new(-1.0, 1.0, 50.0, 50.0).expect("valid spec");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let path = generate_path(&spec, 0.001, 1_000_000, &mut rng);
    let stats = estimate_statistics(&path, spec.tau()).expect("fit succeeds");
    println!("spec:      D = {:.5}, tau = {:.5}", spec.intensity(), spec.tau());
    println!(
        "estimated: D = {:.5}, tau = {:.5}, mean = {:+.5}",
        stats.d_hat, stats.tau_hat, stats.mean
    );

    // The same levels confine the left well of the standard model between
    // the stable roots of the two flows: support [-4, -2].
    let params = PotentialParams::standard();
    let table = stationary_density(&params, 0.0, &spec, Well::Left, 2000)
        .expect("confined regime");
    println!(
        "stationary density support: [{:.3}, {:.3}]",
        table.support.0, table.support.1
    );
    let peak = table
        .p
        .iter()
        .zip(&table.grid)
        .max_by(|a, b| a.0.partial_cmp(b.0).unwrap())
        .unwrap();
    println!("density peak {:.3} at x = {:.3}", peak.0, peak.1);
}
