//! Stationary density and escape rates for the telegraph-driven system.
//!
//! Three independent routes to the forward/backward escape rates:
//!
//! 1. **Quadrature** — the exact mean-first-passage-time (MFPT) solution of
//!    the two-state backward master equation, integrated cell by cell with
//!    an integrating factor. The stationary density of the metastable well
//!    (the confined analogue of the same two-state balance) is also
//!    exposed.
//! 2. **Steepest descent** — the small-`tau` asymptotic rate formula with
//!    the action integral evaluated numerically.
//! 3. **Monte Carlo** — direct first-passage sampling with a
//!    censoring-aware exponential estimator; serves as the arbitration
//!    oracle for the other two.
//!
//! Backward rates reuse the forward machinery through the mirror map
//! `x -> -x`, which swaps the thresholds (negated), negates the input and
//! exchanges the (negated) noise levels together with their rates.

use crate::mix_seed;
use crate::model::{drift, fixed_points, PotentialParams};
use crate::noise::DichotomousNoiseSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Errors raised by the theory module.
#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    /// The requested well is not metastable under both noise flows.
    #[error("no metastable state: {0}")]
    NoMetastableState(String),
    /// The density normalization failed numerically.
    #[error("singular density: {0}")]
    SingularDensity(String),
    /// The steepest-descent action integral does not converge.
    #[error("divergent action integral near x = {location}: {reason}")]
    DivergentAction { location: f64, reason: String },
    /// No Monte-Carlo path escaped within the time budget; `k_upper` is a
    /// 95% Poisson upper bound on the rate.
    #[error("all {paths} paths censored at t = {max_time}; k < {k_upper:.3e}")]
    AllCensored {
        paths: usize,
        max_time: f64,
        k_upper: f64,
    },
    /// Parameter combination outside the method's domain.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    /// Propagated model error.
    #[error("model error: {0}")]
    Model(String),
}

/// Escape direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Left well to right well.
    Forward,
    /// Right well to left well.
    Backward,
}

/// Which well a density is built around.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Well {
    Left,
    Right,
}

/// A tabulated stationary density over its metastable support.
#[derive(Debug, Clone)]
pub struct DensityTable {
    /// Support interval (density is zero outside).
    pub support: (f64, f64),
    /// Midpoint-inset abscissae, strictly increasing.
    pub grid: Vec<f64>,
    /// Normalized density values, all non-negative.
    pub p: Vec<f64>,
    /// Normalization constant applied to the raw density.
    pub norm: f64,
}

/// A Monte-Carlo rate estimate.
#[derive(Debug, Clone, Copy)]
pub struct McRate {
    /// Estimated escape rate (escapes / total simulated time).
    pub k: f64,
    /// Standard error `k / sqrt(escapes)`.
    pub stderr: f64,
    /// Number of paths that escaped.
    pub escapes: usize,
    /// Number of simulated paths.
    pub paths: usize,
    /// Sum of simulated times (escaped + censored).
    pub total_time: f64,
}

/// Applies the mirror map to (params, input, spec): dynamics of `-x`.
fn mirror(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
) -> (PotentialParams, f64, DichotomousNoiseSpec) {
    (
        PotentialParams {
            a: params.a,
            b: params.b,
            x_l: -params.x_u,
            x_u: -params.x_l,
        },
        -i_level,
        DichotomousNoiseSpec {
            delta1: -spec.delta2,
            delta2: -spec.delta1,
            alpha: spec.beta,
            beta: spec.alpha,
        },
    )
}

/// Mean drift including the constant input.
#[inline]
fn h(x: f64, params: &PotentialParams, i_level: f64) -> f64 {
    drift(x, params) + i_level
}

/// Stationary density of the metastable well per the two-state balance:
/// `p(x) = N / |u v| * exp(-Int_{x_b}^{x} (beta/v + alpha/u) dy)` with
/// `u = h + delta2`, `v = h + delta1` and `x_b` the well bottom of the
/// mean drift. The support is the interval between the stable roots of
/// `v` and `u` around the chosen well; both must exist (confined regime),
/// otherwise [`TheoryError::NoMetastableState`] is returned.
pub fn stationary_density(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
    well: Well,
    grid_size: usize,
) -> Result<DensityTable, TheoryError> {
    params
        .validate()
        .map_err(|e| TheoryError::Model(e.to_string()))?;
    if grid_size < 16 {
        return Err(TheoryError::UnsupportedRegime(format!(
            "grid_size {grid_size} too small"
        )));
    }
    // Reduce the right well to the left well of the mirrored system.
    if well == Well::Right {
        let (mp, mi, ms) = mirror(params, i_level, spec);
        let mut table = stationary_density(&mp, mi, &ms, Well::Left, grid_size)?;
        table.support = (-table.support.1, -table.support.0);
        table.grid.reverse();
        for g in &mut table.grid {
            *g = -*g;
        }
        table.p.reverse();
        return Ok(table);
    }
    // Left well: both flows must have their stable root on the left branch.
    let (a, b, xl) = (params.a, params.b, params.x_l);
    let root_v = (b * xl + i_level + spec.delta1) / a;
    let root_u = (b * xl + i_level + spec.delta2) / a;
    if root_u >= xl || root_v >= xl {
        return Err(TheoryError::NoMetastableState(format!(
            "flow roots ({root_v:.4}, {root_u:.4}) not confined below x_l = {xl}"
        )));
    }
    let (s_lo, s_hi) = (root_v, root_u);
    let x_b = (b * xl + i_level) / a; // well bottom of the mean drift
    let n = grid_size;
    let dx = (s_hi - s_lo) / n as f64;
    // Half-cell inset keeps the singular endpoints off the grid.
    let grid: Vec<f64> = (0..n).map(|i| s_lo + dx * (i as f64 + 0.5)).collect();
    let w: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let hx = h(x, params, i_level);
            spec.beta / (hx + spec.delta1) + spec.alpha / (hx + spec.delta2)
        })
        .collect();
    // Cumulative trapezoid of w from the left edge of the grid.
    let mut cum = vec![0.0; n];
    for i in 1..n {
        cum[i] = cum[i - 1] + 0.5 * (w[i - 1] + w[i]) * dx;
    }
    let ib = (((x_b - s_lo) / dx - 0.5).round() as isize).clamp(0, n as isize - 1) as usize;
    let cb = cum[ib];
    let mut p: Vec<f64> = grid
        .iter()
        .zip(&cum)
        .map(|(&x, &c)| {
            let hx = h(x, params, i_level);
            let prod = (hx + spec.delta1) * (hx + spec.delta2);
            (-(c - cb)).exp() / prod.abs()
        })
        .collect();
    // Trapezoidal normalization over the inset grid.
    let mut norm = 0.0;
    for i in 1..n {
        norm += 0.5 * (p[i - 1] + p[i]) * dx;
    }
    if !norm.is_finite() || norm <= 0.0 || p.iter().any(|v| !v.is_finite()) {
        return Err(TheoryError::SingularDensity(format!(
            "normalization integral = {norm}"
        )));
    }
    for v in &mut p {
        *v /= norm;
    }
    Ok(DensityTable {
        support: (s_lo, s_hi),
        grid,
        p,
        norm,
    })
}

/// Default quadrature grid size for MFPT integration.
pub const DEFAULT_MFPT_GRID: usize = 200_000;

/// Exact MFPT of the forward escape (left well to the absorbing barrier
/// `x = x_top` of the zero-input mean drift) for a particle started at the
/// left well bottom `x_in`.
///
/// Solves the two-state backward equation with an integrating factor on a
/// half-cell-inset grid from the stable root `x1` of the slow flow
/// `v = h + delta1` up to the barrier. Returns `f64::INFINITY` when the
/// fast flow `u = h + delta2` is confining (no escape at all).
fn mfpt_forward(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
    n: usize,
) -> Result<f64, TheoryError> {
    let wells = fixed_points(params).map_err(|e| TheoryError::Model(e.to_string()))?;
    let (alpha, beta) = (spec.alpha, spec.beta);
    let gamma = spec.gamma();
    let x0 = wells.x_in;
    let b_abs = wells.x_top;
    // Left-branch stable root of the slow flow.
    let x1 = (params.b * params.x_l + i_level + spec.delta1) / params.a;
    if x1 >= params.x_l {
        return Err(TheoryError::UnsupportedRegime(format!(
            "slow-flow root {x1:.4} not on the left branch (x_l = {})",
            params.x_l
        )));
    }
    let dx = (b_abs - x1) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| x1 + dx * (i as f64 + 0.5)).collect();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for &x in &xs {
        let hx = h(x, params, i_level);
        let vx = hx + spec.delta1;
        let ux = hx + spec.delta2;
        if ux <= 0.0 {
            // The fast flow is also confining: no escape, infinite MFPT.
            return Ok(f64::INFINITY);
        }
        if vx >= 0.0 {
            return Err(TheoryError::UnsupportedRegime(format!(
                "slow flow non-negative at x = {x:.4}; barrier crossed by both levels"
            )));
        }
        u.push(ux);
        v.push(vx);
    }
    // Integrating-factor recursion for Phi(x) with Phi(x1) = 1/beta:
    // Phi' = w Phi + r, w = beta/v + alpha/u, r = 1/u - 1/v.
    let w: Vec<f64> = (0..n).map(|i| beta / v[i] + alpha / u[i]).collect();
    let r: Vec<f64> = (0..n).map(|i| 1.0 / u[i] - 1.0 / v[i]).collect();
    let mut phi = vec![0.0; n];
    phi[0] = 1.0 / beta;
    for i in 0..n - 1 {
        let wm = 0.5 * (w[i] + w[i + 1]);
        let rm = 0.5 * (r[i] + r[i + 1]);
        phi[i + 1] = if wm != 0.0 {
            let e = (wm * dx).exp();
            (phi[i] + rm / wm) * e - rm / wm
        } else {
            phi[i] + rm * dx
        };
    }
    let i0 = (((x0 - x1) / dx) as isize).clamp(0, n as isize - 1) as usize;
    let mut t2 = 0.0;
    for i in i0..n {
        t2 += (1.0 + alpha * phi[i]) / u[i];
    }
    t2 *= dx;
    let t = t2 + (alpha / gamma) * phi[i0];
    if !t.is_finite() || t <= 0.0 {
        return Err(TheoryError::SingularDensity(format!(
            "MFPT integration produced T = {t}"
        )));
    }
    Ok(t)
}

/// Escape rate by exact MFPT quadrature. Returns 0 for a confining noise
/// (no escape possible at this intensity).
pub fn escape_rate_quadrature(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
    direction: Direction,
) -> Result<f64, TheoryError> {
    escape_rate_quadrature_grid(params, i_level, spec, direction, DEFAULT_MFPT_GRID)
}

/// As [`escape_rate_quadrature`] with an explicit grid size.
pub fn escape_rate_quadrature_grid(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
    direction: Direction,
    n: usize,
) -> Result<f64, TheoryError> {
    let t = match direction {
        Direction::Forward => mfpt_forward(params, i_level, spec, n)?,
        Direction::Backward => {
            let (mp, mi, ms) = mirror(params, i_level, spec);
            mfpt_forward(&mp, mi, &ms, n)?
        }
    };
    Ok(if t.is_finite() { 1.0 / t } else { 0.0 })
}

/// Steepest-descent (small-`tau` asymptotic) escape rate:
/// `k = sqrt(-f'(x_in) f'(x_top)) / (2 pi (1 + tau f'(x_top)))
///      * exp(-dphi / tau)` with the action
/// `dphi = Int_{x_in(I)}^{x_top(I)} h / (u v) dx` between the stable root
/// and the barrier root of the mean drift under the given input.
pub fn escape_rate_steepest_descent(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
    direction: Direction,
) -> Result<f64, TheoryError> {
    if direction == Direction::Backward {
        let (mp, mi, ms) = mirror(params, i_level, spec);
        return escape_rate_steepest_descent(&mp, mi, &ms, Direction::Forward);
    }
    params
        .validate()
        .map_err(|e| TheoryError::Model(e.to_string()))?;
    let (a, b) = (params.a, params.b);
    let x_in_i = (b * params.x_l + i_level) / a;
    let x_top_i = -i_level / (b - a);
    if x_in_i >= params.x_l || x_top_i < params.x_l || x_top_i > params.x_u {
        return Err(TheoryError::NoMetastableState(format!(
            "mean drift has no barrier under input I = {i_level}"
        )));
    }
    let fp_in = -a;
    let fp_top = b - a;
    let tau = spec.tau();
    let n = 100_000;
    let dx = (x_top_i - x_in_i) / n as f64;
    let mut dphi = 0.0;
    for i in 0..n {
        let x = x_in_i + dx * (i as f64 + 0.5);
        let hx = h(x, params, i_level);
        let u = hx + spec.delta2;
        let v = hx + spec.delta1;
        let prod = u * v;
        if prod >= 0.0 {
            return Err(TheoryError::DivergentAction {
                location: x,
                reason: "noise flow root inside the action range".into(),
            });
        }
        dphi += hx / prod;
    }
    dphi *= dx;
    let pref = (-fp_in * fp_top).sqrt() / (2.0 * std::f64::consts::PI * (1.0 + tau * fp_top));
    Ok(pref * (-dphi / tau).exp())
}

/// Options for the Monte-Carlo first-passage oracle.
#[derive(Debug, Clone, Copy)]
pub struct McOptions {
    pub n_paths: usize,
    pub dt: f64,
    /// Censoring horizon per path.
    pub max_time: f64,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            n_paths: 1000,
            dt: 0.001,
            max_time: 2000.0,
            seed: 0,
        }
    }
}

/// Monte-Carlo first-passage rate: Euler paths from the source well
/// bottom until the barrier `x_top` is crossed, censored at `max_time`.
///
/// With exponential escape statistics the censoring-aware maximum-
/// likelihood estimate is `k = escapes / total simulated time`, which
/// reduces to `1/mean(FPT)` without censoring and remains unbiased with
/// it. Errors with [`TheoryError::AllCensored`] when nothing escapes,
/// reporting the 95% Poisson upper bound `3/total_time`.
pub fn escape_rate_monte_carlo(
    params: &PotentialParams,
    i_level: f64,
    spec: &DichotomousNoiseSpec,
    direction: Direction,
    opts: McOptions,
) -> Result<McRate, TheoryError> {
    if direction == Direction::Backward {
        let (mp, mi, ms) = mirror(params, i_level, spec);
        return escape_rate_monte_carlo(&mp, mi, &ms, Direction::Forward, opts);
    }
    let wells = fixed_points(params).map_err(|e| TheoryError::Model(e.to_string()))?;
    if opts.n_paths < 1 {
        return Err(TheoryError::UnsupportedRegime("n_paths < 1".into()));
    }
    let gamma = spec.gamma();
    let e = (-gamma * opts.dt).exp();
    let stay1 = (spec.alpha + spec.beta * e) / gamma;
    let stay2 = (spec.beta + spec.alpha * e) / gamma;
    let max_steps = (opts.max_time / opts.dt).round() as u64;
    let results: Vec<(f64, bool)> = (0..opts.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, 0, path as u64));
            let mut x = wells.x_in;
            let mut q = spec.stationary_draw(&mut rng);
            let mut escaped = false;
            let mut steps = 0u64;
            while steps < max_steps {
                x += (h(x, params, i_level) + q) * opts.dt;
                steps += 1;
                if x >= wells.x_top {
                    escaped = true;
                    break;
                }
                let stay = if q == spec.delta1 { stay1 } else { stay2 };
                if rng.gen::<f64>() > stay {
                    q = if q == spec.delta1 {
                        spec.delta2
                    } else {
                        spec.delta1
                    };
                }
            }
            (steps as f64 * opts.dt, escaped)
        })
        .collect();
    let total_time: f64 = results.iter().map(|r| r.0).sum();
    let escapes = results.iter().filter(|r| r.1).count();
    if escapes == 0 {
        return Err(TheoryError::AllCensored {
            paths: opts.n_paths,
            max_time: opts.max_time,
            k_upper: 3.0 / total_time,
        });
    }
    let k = escapes as f64 / total_time;
    Ok(McRate {
        k,
        stderr: k / (escapes as f64).sqrt(),
        escapes,
        paths: opts.n_paths,
        total_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{AmplitudeScaling, DichotomousNoiseSpec, MeanMode};
    use approx::assert_abs_diff_eq;

    fn spec_drive(d: f64, tau: f64) -> DichotomousNoiseSpec {
        DichotomousNoiseSpec::from_macro(d, tau, 0.0, MeanMode::ZeroMean, AmplitudeScaling::Drive)
            .unwrap()
    }

    fn unit_levels() -> DichotomousNoiseSpec {
        // Levels +-1 at tau = 0.01.
        DichotomousNoiseSpec::new(-1.0, 1.0, 50.0, 50.0).unwrap()
    }

    #[test]
    fn density_support_reference() {
        let p = PotentialParams::standard();
        let t = stationary_density(&p, 0.0, &unit_levels(), Well::Left, 4096).unwrap();
        assert_abs_diff_eq!(t.support.0, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.support.1, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn density_normalizes_and_is_nonnegative() {
        let p = PotentialParams::standard();
        let t = stationary_density(&p, 0.0, &unit_levels(), Well::Left, 8192).unwrap();
        let dx = t.grid[1] - t.grid[0];
        let mut integral = 0.0;
        for i in 1..t.p.len() {
            integral += 0.5 * (t.p[i - 1] + t.p[i]) * dx;
        }
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-6);
        assert!(t.p.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn density_mirror_symmetry() {
        // Mirrored parameters must produce the mirrored density.
        let p = PotentialParams::standard();
        let s = unit_levels();
        let left = stationary_density(&p, 0.3, &s, Well::Left, 4096).unwrap();
        let pm = PotentialParams { a: 1.0, b: 2.0, x_l: -0.5, x_u: 1.5 };
        let sm = DichotomousNoiseSpec::new(-1.0, 1.0, 50.0, 50.0).unwrap();
        let right = stationary_density(&pm, -0.3, &sm, Well::Right, 4096).unwrap();
        assert_abs_diff_eq!(left.support.0, -right.support.1, epsilon = 1e-12);
        assert_abs_diff_eq!(left.support.1, -right.support.0, epsilon = 1e-12);
        for (i, &x) in left.grid.iter().enumerate() {
            let j = right.grid.len() - 1 - i;
            assert_abs_diff_eq!(x, -right.grid[j], epsilon = 1e-9);
            assert_abs_diff_eq!(left.p[i], right.p[j], epsilon = 1e-6 * left.p[i].max(1.0));
        }
    }

    #[test]
    fn density_rejects_escaping_regime() {
        // Levels +-5: the fast flow crosses the threshold, no confinement.
        let p = PotentialParams::standard();
        let s = spec_drive(0.05, 0.01);
        assert!(matches!(
            stationary_density(&p, 0.0, &s, Well::Left, 1024),
            Err(TheoryError::NoMetastableState(_))
        ));
    }

    #[test]
    fn quadrature_reference_rates() {
        // Frozen values from an independent implementation of the same
        // MFPT construction (validated against first-passage sampling).
        let p = PotentialParams::standard();
        let cases = [
            (0.8, 0.04, 6.8918e-3),
            (0.8, 0.05, 2.1339e-2),
            (0.8, 0.07, 6.1791e-2),
            (0.0, 0.05, 2.3570e-5),
            (0.0, 0.07, 2.6381e-3),
            (-0.8, 0.07, 1.1766e-5),
        ];
        for (i_level, d, expect) in cases {
            let k = escape_rate_quadrature(&p, i_level, &spec_drive(d, 0.01), Direction::Forward)
                .unwrap();
            assert!(
                (k - expect).abs() / expect < 1e-2,
                "I={i_level}, D={d}: k={k:.4e} vs {expect:.4e}"
            );
        }
    }

    #[test]
    fn quadrature_backward_reference_rates() {
        let p = PotentialParams::standard();
        let cases = [(0.8, 3.32e-2), (0.0, 2.48e-1), (-0.8, 7.27e-1)];
        for (i_level, expect) in cases {
            let k =
                escape_rate_quadrature(&p, i_level, &spec_drive(0.07, 0.01), Direction::Backward)
                    .unwrap();
            assert!(
                (k - expect).abs() / expect < 2e-2,
                "I={i_level}: k_b={k:.4e} vs {expect:.4e}"
            );
        }
    }

    #[test]
    fn quadrature_confining_noise_gives_zero() {
        let p = PotentialParams::standard();
        // Levels +-1 cannot cross the threshold gap: rate exactly 0.
        let k = escape_rate_quadrature(&p, 0.0, &unit_levels(), Direction::Forward).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn quadrature_grid_convergence() {
        let p = PotentialParams::standard();
        let s = spec_drive(0.05, 0.01);
        let k1 =
            escape_rate_quadrature_grid(&p, 0.0, &s, Direction::Forward, DEFAULT_MFPT_GRID)
                .unwrap();
        let k2 =
            escape_rate_quadrature_grid(&p, 0.0, &s, Direction::Forward, 2 * DEFAULT_MFPT_GRID)
                .unwrap();
        assert!((k1 - k2).abs() / k2 < 1e-2, "k({DEFAULT_MFPT_GRID})={k1:.5e} vs doubled {k2:.5e}");
    }

    #[test]
    fn steepest_descent_tracks_quadrature() {
        // Asymptotic formula: require factor-2 agreement where the barrier
        // of the mean drift exists and the action is moderate.
        let p = PotentialParams::standard();
        for (i_level, d) in [(0.8, 0.04), (0.8, 0.05), (0.0, 0.04), (0.0, 0.05), (0.0, 0.07)] {
            let s = spec_drive(d, 0.01);
            let kq = escape_rate_quadrature(&p, i_level, &s, Direction::Forward).unwrap();
            let ks = escape_rate_steepest_descent(&p, i_level, &s, Direction::Forward).unwrap();
            let ratio = ks / kq;
            assert!(
                (0.5..2.0).contains(&ratio),
                "I={i_level}, D={d}: ratio {ratio:.3}"
            );
        }
    }

    #[test]
    fn steepest_descent_action_is_nonnegative_uphill() {
        let p = PotentialParams::standard();
        for d in [0.04, 0.05, 0.07, 0.1] {
            let s = spec_drive(d, 0.01);
            for i_level in [0.0, 0.4, 0.8] {
                let k = escape_rate_steepest_descent(&p, i_level, &s, Direction::Forward).unwrap();
                let tau = s.tau();
                let pref = (p.a * (p.b - p.a)).sqrt()
                    / (2.0 * std::f64::consts::PI * (1.0 + tau * (p.b - p.a)));
                // exp(-dphi/tau) <= 1 iff dphi >= 0.
                assert!(k <= pref * (1.0 + 1e-12), "I={i_level}, D={d}");
            }
        }
    }

    #[test]
    fn steepest_descent_rejects_missing_barrier() {
        // I = -0.8 removes the barrier of the mean drift entirely.
        let p = PotentialParams::standard();
        let s = spec_drive(0.05, 0.01);
        assert!(matches!(
            escape_rate_steepest_descent(&p, -0.8, &s, Direction::Forward),
            Err(TheoryError::NoMetastableState(_))
        ));
    }

    #[test]
    fn monte_carlo_matches_quadrature_fast_cell() {
        let p = PotentialParams::standard();
        let s = spec_drive(0.07, 0.01);
        let kq = escape_rate_quadrature(&p, 0.8, &s, Direction::Forward).unwrap();
        let mc = escape_rate_monte_carlo(
            &p,
            0.8,
            &s,
            Direction::Forward,
            McOptions {
                n_paths: 400,
                dt: 0.001,
                max_time: 500.0,
                seed: 3,
            },
        )
        .unwrap();
        assert!(
            (mc.k - kq).abs() / kq < 0.2,
            "MC {:.3e} vs quadrature {kq:.3e}",
            mc.k
        );
    }

    #[test]
    fn monte_carlo_reports_all_censored() {
        let p = PotentialParams::standard();
        let res = escape_rate_monte_carlo(
            &p,
            0.0,
            &unit_levels(),
            Direction::Forward,
            McOptions {
                n_paths: 20,
                dt: 0.01,
                max_time: 10.0,
                seed: 1,
            },
        );
        assert!(matches!(res, Err(TheoryError::AllCensored { .. })));
    }

    #[test]
    fn monte_carlo_is_thread_invariant() {
        // Per-path seeding makes the estimate independent of scheduling.
        let p = PotentialParams::standard();
        let s = spec_drive(0.07, 0.01);
        let opts = McOptions {
            n_paths: 100,
            dt: 0.002,
            max_time: 200.0,
            seed: 9,
        };
        let a = escape_rate_monte_carlo(&p, 0.8, &s, Direction::Forward, opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| escape_rate_monte_carlo(&p, 0.8, &s, Direction::Forward, opts))
            .unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.escapes, b.escapes);
    }

    #[test]
    fn forward_backward_asymmetry_under_positive_input() {
        let p = PotentialParams::standard();
        let s = spec_drive(0.07, 0.01);
        let kf = escape_rate_quadrature(&p, 0.8, &s, Direction::Forward).unwrap();
        let kb = escape_rate_quadrature(&p, 0.8, &s, Direction::Backward).unwrap();
        assert!(kf > kb, "k_f {kf:.3e} should exceed k_b {kb:.3e} at I = 0.8");
    }
}
