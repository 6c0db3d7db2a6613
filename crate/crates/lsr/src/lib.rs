//! Logical stochastic resonance (LSR) in a thresholded piecewise-linear
//! bistable system driven by asymmetric dichotomous (telegraph) noise.
//!
//! The library simulates the overdamped dynamics
//!
//! ```text
//! dx/dt = -a*x + b*g(x) + I(t) + Q(t)
//! ```
//!
//! where `g` clips `x` to the thresholds `[x_l, x_u]`, `I(t)` is a
//! piecewise-constant logic input stream and `Q(t)` is a two-level Markov
//! (telegraph) noise. In a window of noise intensities the system decodes
//! the logic inputs reliably — a noise-enabled logic gate.
//!
//! Modules:
//! - [`model`]: the bistable potential, drift and fixed points
//! - [`noise`]: telegraph-noise sampling, parametrizations, Gaussian mode
//! - [`simulate`]: logic encoding, Euler integration, output decoding
//! - [`theory`]: stationary density and escape rates (quadrature,
//!   steepest descent, Monte-Carlo first passage)
//! - [`experiments`]: success probability and parameter sweeps
//! - [`cli`]: configuration parsing and the command-line front end

pub mod cli;
pub mod experiments;
pub mod model;
pub mod noise;
pub mod simulate;
pub mod theory;

/// Mixes a master seed with a cell index and a run index into a single
/// 64-bit stream seed. Two rounds of the splitmix64 finalizer keep distinct
/// (seed, cell, run) triples statistically independent, so parallel and
/// sequential execution of the same experiment draw identical randomness.
pub fn mix_seed(master: u64, cell: u64, run: u64) -> u64 {
    let mut z = master
        ^ cell.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ run.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}
