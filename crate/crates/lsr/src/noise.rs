//! Asymmetric dichotomous (telegraph) noise.
//!
//! `Q(t)` jumps between two levels `delta1 < 0 < delta2` with transition
//! rates `alpha` (from `delta2` to `delta1`) and `beta` (from `delta1` to
//! `delta2`). Its correlation time is `tau = 1/(alpha+beta)` and, in the
//! zero-mean convention, its intensity is `D = tau*|delta1|*delta2` and its
//! asymmetry `A = (delta2 - |delta1|)/(delta2 + |delta1|)`.
//!
//! Sampling uses the exact two-state Markov transition probabilities per
//! time step (no small-`dt` approximation), so generated paths are
//! `dt`-robust. A Gaussian-white-noise increment is provided for the
//! comparison experiments.
//!
//! Note on the conditional-probability formulas: several published
//! statements of the two-state master-equation solution contain sign or
//! transcription slips (e.g. both conditional probabilities tending to the
//! same stationary limit). This module implements the standard solution,
//! under which the stationary occupancies are `alpha/gamma` for `delta1`
//! and `beta/gamma` for `delta2`.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Errors raised by the noise module.
#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    /// |A| >= 1 leaves the level ratio undefined.
    #[error("invalid asymmetry A = {0}; require |A| < 1")]
    InvalidAsymmetry(f64),
    /// A parameter violated its positivity/sign constraint.
    #[error("invalid noise parameter: {0}")]
    InvalidParameter(String),
    /// The autocovariance fit could not be performed.
    #[error("autocorrelation fit failed: {0}")]
    FitFailed(String),
}

/// How the transition rates accompany asymmetric levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMode {
    /// Rates chosen so the stationary mean vanishes:
    /// `alpha*delta1 + beta*delta2 = 0`.
    ZeroMean,
    /// `alpha = beta = 1/(2 tau)` regardless of the levels.
    EqualRates,
}

/// How the level magnitudes scale with `(D, tau)`.
///
/// `Spectral` fixes the product `|delta1|*delta2 = D/tau`, so `D` equals
/// the integrated autocorrelation of the zero-mean process. `Drive` fixes
/// the geometric-mean level itself to `D/tau` (product `(D/tau)^2`), which
/// is the convention under which the logic-gate resonance windows of this
/// model sit at the conventional `D` values (optimal window near
/// `D ~ 0.05` at `tau = 0.01`). Both coincide at `D = tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeScaling {
    /// `|delta1|*delta2 = D/tau` (autocorrelation-faithful).
    Spectral,
    /// geometric mean of the levels `= D/tau`.
    Drive,
}

/// A fully determined telegraph-noise specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomousNoiseSpec {
    /// Lower level (negative).
    pub delta1: f64,
    /// Upper level (positive).
    pub delta2: f64,
    /// Transition rate `delta2 -> delta1`.
    pub alpha: f64,
    /// Transition rate `delta1 -> delta2`.
    pub beta: f64,
}

impl DichotomousNoiseSpec {
    /// Builds a spec from explicit levels and rates, validating signs.
    pub fn new(delta1: f64, delta2: f64, alpha: f64, beta: f64) -> Result<Self, NoiseError> {
        if !(delta1 < 0.0 && delta2 > 0.0) {
            return Err(NoiseError::InvalidParameter(format!(
                "levels must satisfy delta1 < 0 < delta2, got ({delta1}, {delta2})"
            )));
        }
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(NoiseError::InvalidParameter(format!(
                "rates must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(DichotomousNoiseSpec {
            delta1,
            delta2,
            alpha,
            beta,
        })
    }

    /// Builds a spec from the macroscopic parameters `(D, tau, A)`.
    pub fn from_macro(
        d: f64,
        tau: f64,
        a_sym: f64,
        mean_mode: MeanMode,
        scaling: AmplitudeScaling,
    ) -> Result<Self, NoiseError> {
        let (delta1, delta2) = derive_amplitudes_scaled(d, tau, a_sym, scaling)?;
        let (alpha, beta) = derive_rates(delta1, delta2, tau, mean_mode)?;
        DichotomousNoiseSpec::new(delta1, delta2, alpha, beta)
    }

    /// Total switching rate `gamma = alpha + beta`.
    pub fn gamma(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Correlation time `tau = 1/gamma`.
    pub fn tau(&self) -> f64 {
        1.0 / self.gamma()
    }

    /// Noise intensity `D = tau*|delta1|*delta2` (zero-mean convention).
    pub fn intensity(&self) -> f64 {
        self.tau() * self.delta1.abs() * self.delta2
    }

    /// Asymmetry `A = (delta2 - |delta1|)/(delta2 + |delta1|)`.
    pub fn asymmetry(&self) -> f64 {
        (self.delta2 - self.delta1.abs()) / (self.delta2 + self.delta1.abs())
    }

    /// Stationary mean `(alpha*delta1 + beta*delta2)/gamma`.
    pub fn stationary_mean(&self) -> f64 {
        (self.alpha * self.delta1 + self.beta * self.delta2) / self.gamma()
    }

    /// Draws an initial level from the stationary occupancies.
    pub fn stationary_draw<R: Rng>(&self, rng: &mut R) -> f64 {
        if rng.gen::<f64>() < self.alpha / self.gamma() {
            self.delta1
        } else {
            self.delta2
        }
    }
}

/// Solves `(D, tau, A)` for the level magnitudes in the autocorrelation
/// convention: `|delta1| = sqrt((D/tau)(1-A)/(1+A))`,
/// `delta2 = sqrt((D/tau)(1+A)/(1-A))`, so that
/// `tau*|delta1|*delta2 = D` and the level ratio encodes `A` exactly.
pub fn derive_amplitudes(d: f64, tau: f64, a_sym: f64) -> Result<(f64, f64), NoiseError> {
    derive_amplitudes_scaled(d, tau, a_sym, AmplitudeScaling::Spectral)
}

/// As [`derive_amplitudes`], with an explicit [`AmplitudeScaling`] choice.
pub fn derive_amplitudes_scaled(
    d: f64,
    tau: f64,
    a_sym: f64,
    scaling: AmplitudeScaling,
) -> Result<(f64, f64), NoiseError> {
    if a_sym.abs() >= 1.0 {
        return Err(NoiseError::InvalidAsymmetry(a_sym));
    }
    if !(d > 0.0 && tau > 0.0) {
        return Err(NoiseError::InvalidParameter(format!(
            "need D > 0 and tau > 0, got D={d}, tau={tau}"
        )));
    }
    let scale = match scaling {
        AmplitudeScaling::Spectral => (d / tau).sqrt(),
        AmplitudeScaling::Drive => d / tau,
    };
    let ratio = ((1.0 + a_sym) / (1.0 - a_sym)).sqrt();
    Ok((-scale / ratio, scale * ratio))
}

/// Chooses transition rates for given levels and correlation time.
pub fn derive_rates(
    delta1: f64,
    delta2: f64,
    tau: f64,
    mode: MeanMode,
) -> Result<(f64, f64), NoiseError> {
    if !(delta1 < 0.0 && delta2 > 0.0 && tau > 0.0) {
        return Err(NoiseError::InvalidParameter(format!(
            "need delta1 < 0 < delta2 and tau > 0, got ({delta1}, {delta2}, {tau})"
        )));
    }
    let gamma = 1.0 / tau;
    Ok(match mode {
        MeanMode::ZeroMean => {
            // alpha*delta1 + beta*delta2 = 0 with alpha + beta = gamma.
            let alpha = gamma * delta2 / (delta2 - delta1);
            (alpha, gamma - alpha)
        }
        MeanMode::EqualRates => (0.5 * gamma, 0.5 * gamma),
    })
}

/// Probability of remaining at `current` over a step of length `dt`.
///
/// Standard two-state Markov solution:
/// `P(stay at delta1) = alpha/gamma + (beta/gamma) e^{-gamma dt}` and
/// `P(stay at delta2) = beta/gamma + (alpha/gamma) e^{-gamma dt}`.
pub fn stay_probability(current: f64, dt: f64, spec: &DichotomousNoiseSpec) -> f64 {
    let gamma = spec.gamma();
    let e = (-gamma * dt).exp();
    if current == spec.delta1 {
        (spec.alpha + spec.beta * e) / gamma
    } else {
        (spec.beta + spec.alpha * e) / gamma
    }
}

/// Advances the noise by one step of length `dt`: draws one uniform number
/// and switches level when it exceeds the exact stay probability.
#[inline]
pub fn step_noise<R: Rng>(current: f64, dt: f64, spec: &DichotomousNoiseSpec, rng: &mut R) -> f64 {
    let stay = stay_probability(current, dt, spec);
    let r: f64 = rng.gen();
    if r > stay {
        if current == spec.delta1 {
            spec.delta2
        } else {
            spec.delta1
        }
    } else {
        current
    }
}

/// Gaussian-white-noise increment: `N(0, 2 D dt)`, matching the
/// autocorrelation convention `<xi(t) xi(t')> = 2 D delta(t - t')`.
#[inline]
pub fn gwn_increment<R: Rng>(d: f64, dt: f64, rng: &mut R) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    (2.0 * d * dt).sqrt() * z
}

/// A sampled noise path with its sampling step.
#[derive(Debug, Clone)]
pub struct NoisePath {
    /// Sampled levels; every entry equals `delta1` or `delta2` exactly.
    pub values: Vec<f64>,
    /// Sampling step.
    pub dt: f64,
}

/// Generates `n` samples of the telegraph process starting from a
/// stationary draw.
pub fn generate_path<R: Rng>(
    spec: &DichotomousNoiseSpec,
    dt: f64,
    n: usize,
    rng: &mut R,
) -> NoisePath {
    let mut values = Vec::with_capacity(n);
    let mut q = spec.stationary_draw(rng);
    // Precompute the two stay probabilities for the hot loop.
    let gamma = spec.gamma();
    let e = (-gamma * dt).exp();
    let stay1 = (spec.alpha + spec.beta * e) / gamma;
    let stay2 = (spec.beta + spec.alpha * e) / gamma;
    for _ in 0..n {
        values.push(q);
        let stay = if q == spec.delta1 { stay1 } else { stay2 };
        if rng.gen::<f64>() > stay {
            q = if q == spec.delta1 {
                spec.delta2
            } else {
                spec.delta1
            };
        }
    }
    NoisePath { values, dt }
}

/// Empirical statistics of a noise path.
#[derive(Debug, Clone, Copy)]
pub struct NoiseStatistics {
    /// Sample mean.
    pub mean: f64,
    /// Intensity estimate `tau_hat * autocovariance(0)`.
    pub d_hat: f64,
    /// Correlation time from a log-linear fit of the autocovariance.
    pub tau_hat: f64,
    /// Lag-0 autocovariance (sample variance).
    pub variance: f64,
}

/// Estimates mean, correlation time and intensity from a sampled path.
///
/// The autocovariance is fitted over lags `[0, 5 tau]` by least squares on
/// its logarithm, exploiting the exponential correlation of the telegraph
/// process. Intended as a generator self-test; the fit needs a zero-mean
/// spec and at least ~1e5 samples for the stated tolerances.
pub fn estimate_statistics(
    path: &NoisePath,
    tau_guess: f64,
) -> Result<NoiseStatistics, NoiseError> {
    let n = path.values.len();
    if n < 1000 {
        return Err(NoiseError::FitFailed(format!("path too short: {n} samples")));
    }
    let mean = path.values.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = path.values.iter().map(|v| v - mean).collect();
    let max_lag = ((5.0 * tau_guess / path.dt).ceil() as usize).clamp(2, n / 10);
    let mut cov = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let m = n - lag;
        let c: f64 = (0..m).map(|i| centered[i] * centered[i + lag]).sum::<f64>() / m as f64;
        cov.push(c);
    }
    if cov[0] <= 0.0 {
        return Err(NoiseError::FitFailed(
            "non-positive variance at lag 0".into(),
        ));
    }
    // Weighted log-linear least squares on the positive covariances:
    // ln c_k = ln c_0 - (dt/tau) k. The log of a noisy covariance has
    // variance ~ var(c_k)/c_k^2, so weights proportional to c_k^2 keep the
    // noisy small-covariance tail from biasing the slope.
    let pts: Vec<(f64, f64, f64)> = cov
        .iter()
        .enumerate()
        .take_while(|(_, c)| **c > 0.0)
        .map(|(k, c)| (k as f64, c.ln(), c * c))
        .collect();
    if pts.len() < 3 {
        return Err(NoiseError::FitFailed(
            "fewer than 3 positive autocovariance lags".into(),
        ));
    }
    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xm: f64 = pts.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let ym: f64 = pts.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.0 - xm)).sum();
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    if slope >= 0.0 {
        return Err(NoiseError::FitFailed(format!(
            "non-decaying autocovariance (slope {slope})"
        )));
    }
    let tau_hat = -path.dt / slope;
    Ok(NoiseStatistics {
        mean,
        d_hat: tau_hat * cov[0],
        tau_hat,
        variance: cov[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn symmetric_spec() -> DichotomousNoiseSpec {
        DichotomousNoiseSpec::from_macro(
            0.01,
            0.01,
            0.0,
            MeanMode::ZeroMean,
            AmplitudeScaling::Spectral,
        )
        .unwrap()
    }

    #[test]
    fn amplitudes_symmetric_reference() {
        let (d1, d2) = derive_amplitudes(0.01, 0.01, 0.0).unwrap();
        assert_abs_diff_eq!(d1, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn amplitudes_asymmetric_reference() {
        // A = 1/3 gives level ratio 2 with unit product.
        let (d1, d2) = derive_amplitudes(0.01, 0.01, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(d1, -1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn amplitudes_reject_unit_asymmetry() {
        assert_eq!(
            derive_amplitudes(1.0, 1.0, 1.0),
            Err(NoiseError::InvalidAsymmetry(1.0))
        );
        assert_eq!(
            derive_amplitudes(1.0, 1.0, -1.0),
            Err(NoiseError::InvalidAsymmetry(-1.0))
        );
    }

    #[test]
    fn macro_round_trip() {
        for &(d, tau, a) in &[(0.01, 0.01, 0.0), (0.05, 0.003, 1.0 / 3.0), (0.2, 0.1, -0.7)] {
            let spec = DichotomousNoiseSpec::from_macro(
                d,
                tau,
                a,
                MeanMode::ZeroMean,
                AmplitudeScaling::Spectral,
            )
            .unwrap();
            assert_abs_diff_eq!(spec.intensity(), d, epsilon = 1e-12);
            assert_abs_diff_eq!(spec.tau(), tau, epsilon = 1e-12);
            assert_abs_diff_eq!(spec.asymmetry(), a, epsilon = 1e-12);
            assert_abs_diff_eq!(spec.stationary_mean(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn drive_scaling_levels() {
        let (d1, d2) =
            derive_amplitudes_scaled(0.05, 0.01, 0.0, AmplitudeScaling::Drive).unwrap();
        assert_abs_diff_eq!(d1, -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 5.0, epsilon = 1e-12);
        // Scalings coincide at D = tau.
        let (s1, s2) =
            derive_amplitudes_scaled(0.01, 0.01, 0.2, AmplitudeScaling::Spectral).unwrap();
        let (v1, v2) = derive_amplitudes_scaled(0.01, 0.01, 0.2, AmplitudeScaling::Drive).unwrap();
        assert_abs_diff_eq!(s1, v1, epsilon = 1e-12);
        assert_abs_diff_eq!(s2, v2, epsilon = 1e-12);
    }

    #[test]
    fn rates_reference_values() {
        let (a, b) = derive_rates(-1.0, 1.0, 0.01, MeanMode::ZeroMean).unwrap();
        assert_abs_diff_eq!(a, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 50.0, epsilon = 1e-9);
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        let (a, b) = derive_rates(-inv_sqrt2, 2f64.sqrt(), 0.01, MeanMode::ZeroMean).unwrap();
        assert_abs_diff_eq!(a, 200.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 100.0 / 3.0, epsilon = 1e-9);
        let (a, b) = derive_rates(-inv_sqrt2, 2f64.sqrt(), 0.01, MeanMode::EqualRates).unwrap();
        assert_abs_diff_eq!(a, 50.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 50.0, epsilon = 1e-9);
    }

    #[test]
    fn stay_probability_limits() {
        let spec = symmetric_spec();
        assert_abs_diff_eq!(stay_probability(spec.delta1, 0.0, &spec), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(stay_probability(spec.delta2, 0.0, &spec), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            stay_probability(spec.delta1, 1e9, &spec),
            0.5,
            epsilon = 1e-12
        );
        // dt = tau: 0.5 + 0.5 e^{-1}
        assert_abs_diff_eq!(
            stay_probability(spec.delta1, 0.01, &spec),
            0.5 + 0.5 * (-1f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empirical_stay_frequency_matches_closed_form() {
        let spec = symmetric_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let path = generate_path(&spec, 0.01, 1_000_000, &mut rng);
        let mut stays = 0u64;
        let mut from1 = 0u64;
        for w in path.values.windows(2) {
            if w[0] == spec.delta1 {
                from1 += 1;
                if w[1] == spec.delta1 {
                    stays += 1;
                }
            }
        }
        let freq = stays as f64 / from1 as f64;
        assert!((freq - 0.68394).abs() < 0.002, "stay frequency {freq}");
    }

    #[test]
    fn level_purity_and_occupancy() {
        let spec = DichotomousNoiseSpec::from_macro(
            0.01,
            0.01,
            1.0 / 3.0,
            MeanMode::ZeroMean,
            AmplitudeScaling::Spectral,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let path = generate_path(&spec, 0.001, 1_000_000, &mut rng);
        let n1 = path
            .values
            .iter()
            .filter(|&&v| {
                assert!(v == spec.delta1 || v == spec.delta2, "impure level {v}");
                v == spec.delta1
            })
            .count();
        let p1 = n1 as f64 / path.values.len() as f64;
        let expect = spec.alpha / spec.gamma();
        // 3-sigma binomial band, inflated by the correlation time
        // (effective sample count ~ n*dt/(2 tau)).
        let n_eff = path.values.len() as f64 * 0.001 / (2.0 * spec.tau());
        let band = 3.0 * (expect * (1.0 - expect) / n_eff).sqrt();
        assert!((p1 - expect).abs() < band, "occupancy {p1} vs {expect}");
    }

    #[test]
    fn markov_property_at_lag_one() {
        // Switch frequency out of delta1 must not depend on the state two
        // steps back.
        let spec = symmetric_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let path = generate_path(&spec, 0.005, 1_000_000, &mut rng);
        let mut counts = [[0u64; 2]; 2]; // [prev-but-one == delta1][switched]
        for w in path.values.windows(3) {
            if w[1] == spec.delta1 {
                let prev1 = usize::from(w[0] == spec.delta1);
                let switched = usize::from(w[2] != spec.delta1);
                counts[prev1][switched] += 1;
            }
        }
        let f = |c: [u64; 2]| c[1] as f64 / (c[0] + c[1]) as f64;
        let (fa, fb) = (f(counts[0]), f(counts[1]));
        let n = (counts[0][0] + counts[0][1]).min(counts[1][0] + counts[1][1]) as f64;
        let p = 0.5 * (fa + fb);
        let band = 3.0 * (2.0 * p * (1.0 - p) / n).sqrt();
        assert!((fa - fb).abs() < band, "lag-2 dependence: {fa} vs {fb}");
    }

    #[test]
    fn path_is_reproducible() {
        let spec = symmetric_spec();
        let a = generate_path(&spec, 0.001, 10_000, &mut ChaCha8Rng::seed_from_u64(3));
        let b = generate_path(&spec, 0.001, 10_000, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn statistics_recover_spec() {
        let spec = symmetric_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let path = generate_path(&spec, 0.001, 1_000_000, &mut rng);
        let stats = estimate_statistics(&path, 0.01).unwrap();
        assert!(stats.mean.abs() < 0.01, "mean {}", stats.mean);
        assert!(
            (stats.tau_hat - 0.01).abs() / 0.01 < 0.05,
            "tau_hat {}",
            stats.tau_hat
        );
        assert!(
            (stats.d_hat - 0.01).abs() / 0.01 < 0.05,
            "D_hat {}",
            stats.d_hat
        );
    }

    #[test]
    fn statistics_flag_degenerate_path() {
        let path = NoisePath {
            values: vec![1.0; 10_000],
            dt: 0.001,
        };
        assert!(estimate_statistics(&path, 0.01).is_err());
    }

    #[test]
    fn gwn_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(gwn_increment(0.0, 0.01, &mut rng), 0.0);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| gwn_increment(0.5, 0.01, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * (0.01f64 / n as f64).sqrt());
        assert!((var - 0.01).abs() / 0.01 < 0.01, "variance {var}");
    }
}
