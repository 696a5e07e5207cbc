//! Doppler-averaged double scattering in a semi-infinite medium.
//!
//! Both the scalar and the vector coefficients reduce to
//!
//! ```text
//! γ = ½ ∫₀^{π/2} dθ sinθ W(θ) ∫₀^∞ dx e^{−x(1+cosθ)} J₀(q x sinθ) e^{−2a²x²sin²θ}
//! ```
//!
//! where θ is the angle between the inter-atomic vector and the surface
//! normal, x the inter-atomic distance in units of ℓ, q = kℓΔθ the reduced
//! detection angle (zero for the background) and a = kv̄/Γ. The angular
//! weight W is 1 for scalar waves and (9/4)·P̄(θ) for a polarisation
//! channel, P̄ being the azimuth-averaged contraction factor.

use std::f64::consts::FRAC_PI_2;

use crate::error::{CbsError, Result};
use crate::numerics::{
    bessel_j0, bessel_j0_zero, integrate_estimates, integrate_with_breaks, Estimate, QuadratureSpec,
};

/// exp(−LOG_CUTOFF) is below double precision relative to the integrand peak.
const LOG_CUTOFF: f64 = 36.84;

/// Cap on the number of Bessel-zero breakpoints in one radial integral.
const MAX_ZERO_BREAKS: usize = 2000;

/// Reduced parameters of one double-scattering integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleScattering {
    /// q = kℓΔθ; zero gives the incoherent background weighting.
    pub reduced_angle: f64,
    /// a = kv̄/Γ.
    pub kv_over_gamma: f64,
}

impl DoubleScattering {
    pub fn new(reduced_angle: f64, kv_over_gamma: f64) -> Result<Self> {
        if !(reduced_angle.is_finite() && reduced_angle >= 0.0) {
            return Err(CbsError::invalid("reduced_angle", "must be finite and non-negative"));
        }
        if !(kv_over_gamma.is_finite() && kv_over_gamma >= 0.0) {
            return Err(CbsError::invalid("kv_over_gamma", "must be finite and non-negative"));
        }
        Ok(DoubleScattering {
            reduced_angle,
            kv_over_gamma,
        })
    }

    /// Radial cut-off along direction θ beyond which the integrand is
    /// negligible.
    fn radial_extent(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let by_extinction = LOG_CUTOFF / (1.0 + c);
        let doppler = self.kv_over_gamma * s;
        if doppler > 0.0 {
            by_extinction.min((LOG_CUTOFF / (2.0 * doppler * doppler)).sqrt())
        } else {
            by_extinction
        }
    }

    /// Radial integral at fixed θ, with breakpoints at the Bessel zeros.
    pub fn radial(&self, theta: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        let (s, c) = theta.sin_cos();
        let extent = self.radial_extent(theta);
        let freq = self.reduced_angle * s;
        let a2 = 2.0 * self.kv_over_gamma * self.kv_over_gamma * s * s;
        let mut points = vec![0.0];
        if freq > 0.0 {
            for n in 1..=MAX_ZERO_BREAKS {
                let x = bessel_j0_zero(n) / freq;
                if x >= extent {
                    break;
                }
                points.push(x);
            }
        }
        points.push(extent);
        let f = |x: f64| (-x * (1.0 + c) - a2 * x * x).exp() * bessel_j0(freq * x);
        match integrate_with_breaks(f, &points, spec) {
            Ok(e) => Ok(e),
            Err(err) => err.best_estimate().ok_or(CbsError::Quadrature(err)),
        }
    }

    /// Polar breakpoints at the Doppler and detection-angle scales.
    fn polar_breaks(&self) -> Vec<f64> {
        let mut points = vec![0.0, FRAC_PI_2];
        for scale in [self.kv_over_gamma, self.reduced_angle] {
            if scale > 0.0 {
                for c in [0.1, 1.0, 10.0] {
                    let t = c / scale;
                    if t < FRAC_PI_2 * 0.999 {
                        points.push(t);
                    }
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    /// Evaluates the integral with angular weight `weight(θ)`.
    pub fn integrate<W>(&self, weight: W, spec: &QuadratureSpec) -> Result<Estimate>
    where
        W: Fn(f64) -> f64,
    {
        spec.validate()?;
        let inner_spec = spec.inner();
        let mut failure = None;
        let outer = |theta: f64| {
            let w = 0.5 * theta.sin() * weight(theta);
            if w == 0.0 {
                return (0.0, 0.0);
            }
            match self.radial(theta, &inner_spec) {
                Ok(e) => (w * e.value, (w * e.error).abs()),
                Err(err) => {
                    failure.get_or_insert(err);
                    (f64::NAN, 0.0)
                }
            }
        };
        let result = integrate_estimates(outer, &self.polar_breaks(), spec);
        if let Some(err) = failure {
            return Err(err);
        }
        Ok(result?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn background_without_doppler_is_half_ln2() {
        let g = DoubleScattering::new(0.0, 0.0).unwrap();
        let e = g.integrate(|_| 1.0, &spec()).unwrap();
        assert!((e.value - 0.5 * std::f64::consts::LN_2).abs() < 1e-10);
    }

    #[test]
    fn radial_integral_matches_closed_form() {
        // Without Doppler or angle the radial integral is 1/(1+cosθ).
        let g = DoubleScattering::new(0.0, 0.0).unwrap();
        for theta in [0.0, 0.4, 1.2, FRAC_PI_2] {
            let e = g.radial(theta, &spec()).unwrap();
            assert!((e.value - 1.0 / (1.0 + theta.cos())).abs() < 1e-12, "{theta}");
        }
    }

    #[test]
    fn radial_bessel_transform_matches_closed_form() {
        // ∫₀^∞ e^{−px} J₀(bx) dx = 1/√(p²+b²).
        let g = DoubleScattering::new(7.0, 0.0).unwrap();
        let theta = 0.9_f64;
        let e = g.radial(theta, &spec()).unwrap();
        let p = 1.0 + theta.cos();
        let b = 7.0 * theta.sin();
        assert!((e.value - 1.0 / (p * p + b * b).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn weight_is_linear() {
        let g = DoubleScattering::new(3.0, 2.0).unwrap();
        let one = g.integrate(|_| 1.0, &spec()).unwrap().value;
        let three = g.integrate(|_| 3.0, &spec()).unwrap().value;
        assert!((three - 3.0 * one).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_inputs() {
        assert!(DoubleScattering::new(-1.0, 0.0).is_err());
        assert!(DoubleScattering::new(0.0, f64::NAN).is_err());
    }
}
