//! Scalar double-scattering bistatic coefficients, the high-temperature
//! asymptote of the coherent peak and its angular width.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::double::DoubleScattering;
use crate::error::{CbsError, Result};
use crate::numerics::{bessel_i0_scaled, QuadratureSpec};

/// Below this kv̄/Γ the asymptotic profile is not trustworthy.
pub const ASYMPTOTE_MIN_KV: f64 = 5.0;

/// One evaluation point of the coherent coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarCbsQuery {
    /// Angle from exact backscattering, in radians.
    pub delta_theta: f64,
    /// kv̄/Γ.
    pub kv_over_gamma: f64,
    /// kℓ.
    pub k_ell: f64,
}

impl ScalarCbsQuery {
    pub fn new(delta_theta: f64, kv_over_gamma: f64, k_ell: f64) -> Result<Self> {
        let q = ScalarCbsQuery {
            delta_theta,
            kv_over_gamma,
            k_ell,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_theta.is_finite() && self.delta_theta >= 0.0) {
            return Err(CbsError::invalid("delta_theta", "must be finite and non-negative"));
        }
        if !(self.kv_over_gamma.is_finite() && self.kv_over_gamma >= 0.0) {
            return Err(CbsError::invalid("kv_over_gamma", "must be finite and non-negative"));
        }
        if !(self.k_ell.is_finite() && self.k_ell > 0.0) {
            return Err(CbsError::invalid("k_ell", "must be finite and positive"));
        }
        Ok(())
    }

    /// The same query at another detection angle.
    pub fn at_angle(&self, delta_theta: f64) -> Self {
        ScalarCbsQuery { delta_theta, ..*self }
    }

    pub(crate) fn reduced(&self) -> Result<DoubleScattering> {
        self.validate()?;
        DoubleScattering::new(self.k_ell * self.delta_theta, self.kv_over_gamma)
    }
}

/// Coherent bistatic coefficient γ_C for scalar waves.
pub fn gamma_c_scalar(q: &ScalarCbsQuery, spec: &QuadratureSpec) -> Result<f64> {
    Ok(q.reduced()?.integrate(|_| 1.0, spec)?.value)
}

/// Incoherent bistatic coefficient, ln2/2.
pub fn gamma_b_scalar() -> f64 {
    0.5 * LN_2
}

/// The incoherent coefficient by quadrature of the same integrand with no
/// Doppler shift and no detection angle.
pub fn gamma_b_scalar_quadrature(spec: &QuadratureSpec) -> Result<f64> {
    Ok(DoubleScattering::new(0.0, 0.0)?.integrate(|_| 1.0, spec)?.value)
}

/// Enhancement γ_C/γ_B.
pub fn contrast_scalar(q: &ScalarCbsQuery, spec: &QuadratureSpec) -> Result<f64> {
    Ok(gamma_c_scalar(q, spec)? / gamma_b_scalar())
}

/// γ_C over a grid of detection angles, evaluated in parallel. Each entry
/// fails independently.
pub fn gamma_c_profile(base: &ScalarCbsQuery, angles: &[f64], spec: &QuadratureSpec) -> Vec<Result<f64>> {
    angles
        .par_iter()
        .map(|&dt| gamma_c_scalar(&base.at_angle(dt), spec))
        .collect()
}

/// π^{3/2}/(2^{5/2} ln2): the peak contrast times kv̄/Γ at high temperature.
pub fn asymptotic_constant() -> f64 {
    PI.powf(1.5) / (2f64.powf(2.5) * LN_2)
}

/// Line shape F(x) = e^{−x²} I₀(x²) of the high-temperature peak.
pub fn profile_shape(x: f64) -> f64 {
    bessel_i0_scaled(x * x)
}

/// Reduced angle x = ΔθΓℓ/(4v̄) = kℓΔθ/(4 kv̄/Γ).
pub fn scaled_angle(delta_theta: f64, kv_over_gamma: f64, k_ell: f64) -> f64 {
    k_ell * delta_theta / (4.0 * kv_over_gamma)
}

/// High-temperature contrast γ_C/γ_B at reduced angle x.
pub fn asymptotic_profile(x: f64, kv_over_gamma: f64) -> f64 {
    asymptotic_constant() / kv_over_gamma * profile_shape(x)
}

/// Whether kv̄/Γ is large enough for [`asymptotic_profile`].
pub fn asymptote_is_reliable(kv_over_gamma: f64) -> bool {
    kv_over_gamma >= ASYMPTOTE_MIN_KV
}

/// Angular width of the peak, (4/kℓ)(kv̄/Γ), in radians.
pub fn peak_width(kv_over_gamma: f64, k_ell: f64) -> f64 {
    4.0 * kv_over_gamma / k_ell
}
