//! Piecewise-linear bistable model: drift, potential and fixed points.
//!
//! The drift is `f(x) = -a*x + b*g(x)` with the clipping nonlinearity
//! `g(x) = x_l` for `x < x_l`, `g(x) = x` inside `[x_l, x_u]` and
//! `g(x) = x_u` for `x > x_u`. For `b > a > 0` and `x_l < 0 < x_u` this
//! yields two stable fixed points `x_in = b*x_l/a < x_l` and
//! `x_out = b*x_u/a > x_u` separated by the unstable point `x_top = 0`.

use thiserror::Error;

/// Parameters of the piecewise-linear double-well model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    /// Linear restoring coefficient (must be positive).
    pub a: f64,
    /// Threshold-gain coefficient (must exceed `a` for bistability).
    pub b: f64,
    /// Lower threshold.
    pub x_l: f64,
    /// Upper threshold.
    pub x_u: f64,
}

/// The three fixed points of the noiseless drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellStructure {
    /// Left stable fixed point (logical 0 well).
    pub x_in: f64,
    /// Unstable fixed point separating the wells.
    pub x_top: f64,
    /// Right stable fixed point (logical 1 well).
    pub x_out: f64,
}

/// Errors raised by the model module.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    /// The parameters do not produce two stable wells separated by a barrier.
    #[error("degenerate wells: {0}")]
    DegenerateWells(String),
}

impl PotentialParams {
    /// Standard parameter set used throughout: `a=1, b=2` with AND-gate
    /// thresholds `(-1.5, 0.5)`.
    pub fn standard() -> Self {
        PotentialParams {
            a: 1.0,
            b: 2.0,
            x_l: -1.5,
            x_u: 0.5,
        }
    }

    /// Same gains with the thresholds `(-0.5, 1.5)` that realize an OR gate.
    pub fn or_thresholds() -> Self {
        PotentialParams {
            a: 1.0,
            b: 2.0,
            x_l: -0.5,
            x_u: 1.5,
        }
    }

    /// Returns this parameter set with the thresholds replaced.
    pub fn with_thresholds(mut self, x_l: f64, x_u: f64) -> Self {
        self.x_l = x_l;
        self.x_u = x_u;
        self
    }

    /// Validates the structural invariants (`x_l < x_u`, `0 < a < b`).
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.x_l < self.x_u) {
            return Err(ModelError::DegenerateWells(format!(
                "x_l ({}) must be below x_u ({})",
                self.x_l, self.x_u
            )));
        }
        if !(self.a > 0.0 && self.b > self.a) {
            return Err(ModelError::DegenerateWells(format!(
                "need 0 < a < b, got a={}, b={}",
                self.a, self.b
            )));
        }
        Ok(())
    }
}

/// The clipping nonlinearity `g(x)`.
#[inline]
pub fn clip(x: f64, p: &PotentialParams) -> f64 {
    x.clamp(p.x_l, p.x_u)
}

/// Drift `f(x) = -a*x + b*g(x)`; continuous and piecewise linear.
#[inline]
pub fn drift(x: f64, p: &PotentialParams) -> f64 {
    -p.a * x + p.b * clip(x, p)
}

/// Potential `U(x) = -∫ f`, gauged so that `U(0) = 0`.
///
/// Piecewise quadratic, continuous at both thresholds.
pub fn potential(x: f64, p: &PotentialParams) -> f64 {
    let (a, b, xl, xu) = (p.a, p.b, p.x_l, p.x_u);
    // Mid piece: U(x) = -(b - a) x^2 / 2, already 0 at x = 0.
    let mid = |x: f64| -0.5 * (b - a) * x * x;
    if x < xl {
        // U = a x^2/2 - b x_l x + C, matched to the mid piece at x_l.
        let c = mid(xl) - (0.5 * a * xl * xl - b * xl * xl);
        0.5 * a * x * x - b * xl * x + c
    } else if x > xu {
        let c = mid(xu) - (0.5 * a * xu * xu - b * xu * xu);
        0.5 * a * x * x - b * xu * x + c
    } else {
        mid(x)
    }
}

/// Computes the well structure in closed form.
///
/// The drift is linear on each piece, so the roots are exact:
/// `x_in = b*x_l/a` (left piece), `x_top = 0` (mid piece),
/// `x_out = b*x_u/a` (right piece). Errors with
/// [`ModelError::DegenerateWells`] when any root falls outside its
/// defining piece, i.e. the configuration is not bistable.
pub fn fixed_points(p: &PotentialParams) -> Result<WellStructure, ModelError> {
    p.validate()?;
    let x_in = p.b * p.x_l / p.a;
    let x_out = p.b * p.x_u / p.a;
    let x_top = 0.0;
    if !(x_in < p.x_l) {
        return Err(ModelError::DegenerateWells(format!(
            "left root {} is not below x_l = {}",
            x_in, p.x_l
        )));
    }
    if !(x_out > p.x_u) {
        return Err(ModelError::DegenerateWells(format!(
            "right root {} is not above x_u = {}",
            x_out, p.x_u
        )));
    }
    if !(p.x_l <= x_top && x_top <= p.x_u) {
        return Err(ModelError::DegenerateWells(format!(
            "barrier root 0 outside [{}, {}]",
            p.x_l, p.x_u
        )));
    }
    Ok(WellStructure { x_in, x_top, x_out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn drift_zeroes_at_fixed_points() {
        let p = PotentialParams::standard();
        assert_eq!(drift(-3.0, &p), 0.0);
        assert_eq!(drift(0.0, &p), 0.0);
        assert_eq!(drift(1.0, &p), 0.0);
    }

    #[test]
    fn drift_at_lower_threshold() {
        // -1*(-1.5) + 2*(-1.5) = -1.5
        let p = PotentialParams::standard();
        assert_abs_diff_eq!(drift(-1.5, &p), -1.5, epsilon = 1e-15);
    }

    #[test]
    fn drift_is_continuous_at_thresholds() {
        let p = PotentialParams::standard();
        for t in [p.x_l, p.x_u] {
            let eps = 1e-9;
            assert!((drift(t - eps, &p) - drift(t + eps, &p)).abs() < 1e-6);
        }
    }

    #[test]
    fn potential_reference_values() {
        let p = PotentialParams::standard();
        assert_eq!(potential(0.0, &p), 0.0);
        assert_abs_diff_eq!(potential(1.0, &p), -0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(potential(-3.0, &p), -2.25, epsilon = 1e-12);
    }

    #[test]
    fn potential_matches_numerical_integral_of_drift() {
        // Independent check: integrate -drift from 0 by fine trapezoid.
        let p = PotentialParams::standard();
        for &target in &[-3.0, -1.0, 1.0, 2.5, -4.5] {
            let n = 200_000;
            let dx = target / n as f64;
            let mut u = 0.0;
            for i in 0..n {
                let x0 = i as f64 * dx;
                u -= 0.5 * (drift(x0, &p) + drift(x0 + dx, &p)) * dx;
            }
            assert_abs_diff_eq!(potential(target, &p), u, epsilon = 1e-6);
        }
    }

    #[test]
    fn fixed_points_standard() {
        let w = fixed_points(&PotentialParams::standard()).unwrap();
        assert_eq!((w.x_in, w.x_top, w.x_out), (-3.0, 0.0, 1.0));
    }

    #[test]
    fn fixed_points_or_thresholds() {
        let w = fixed_points(&PotentialParams::or_thresholds()).unwrap();
        assert_eq!((w.x_in, w.x_top, w.x_out), (-1.0, 0.0, 3.0));
    }

    #[test]
    fn fixed_points_rejects_inverted_thresholds() {
        let p = PotentialParams::standard().with_thresholds(0.5, -0.5);
        assert!(matches!(
            fixed_points(&p),
            Err(ModelError::DegenerateWells(_))
        ));
    }

    #[test]
    fn fixed_points_rejects_monostable_gain() {
        // b <= a has no clipped stable roots.
        let mut p = PotentialParams::standard();
        p.b = 0.5;
        assert!(fixed_points(&p).is_err());
    }

    #[test]
    fn fixed_points_rejects_one_sided_thresholds() {
        // Both thresholds positive: barrier root 0 falls outside the mid piece.
        let p = PotentialParams::standard().with_thresholds(0.25, 0.75);
        assert!(fixed_points(&p).is_err());
    }

    proptest! {
        #[test]
        fn potential_is_antiderivative_of_minus_drift(x in -6.0..6.0f64) {
            let p = PotentialParams::standard();
            let h = 1e-5;
            let fd = (potential(x + h, &p) - potential(x - h, &p)) / (2.0 * h);
            // Centered difference of U equals -f away from kinks; at kinks
            // the one-sided slopes differ by O(h), still within tolerance.
            prop_assert!((fd + drift(x, &p)).abs() < 1e-4);
        }

        #[test]
        fn wells_alternate_stability(xl in -2.5..-0.3f64, xu in 0.3..2.5f64) {
            let p = PotentialParams { a: 1.0, b: 2.0, x_l: xl, x_u: xu };
            let w = fixed_points(&p).unwrap();
            prop_assert!(w.x_in < p.x_l && p.x_l <= w.x_top);
            prop_assert!(w.x_top <= p.x_u && p.x_u < w.x_out);
            for z in [w.x_in, w.x_top, w.x_out] {
                prop_assert!(drift(z, &p).abs() < 1e-12);
            }
            let eps = 1e-6;
            // stable, unstable, stable
            prop_assert!(drift(w.x_in + eps, &p) < 0.0);
            prop_assert!(drift(w.x_top + eps, &p) > 0.0);
            prop_assert!(drift(w.x_out + eps, &p) < 0.0);
        }
    }
}
