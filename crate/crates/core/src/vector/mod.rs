//! Polarisation and atomic level structure: contraction factors, single
//! scattering and vector double-scattering coefficients.

mod channel;
mod factors;

pub use channel::{ChannelPreset, Polarization, PolarizationChannel};
pub use factors::{
    azimuthal_factor_b, azimuthal_factor_c, gamma_single, polarization_factor_b, polarization_factor_c,
    polarization_factor_s, ProjectorInput,
};

use crate::double::DoubleScattering;
use crate::error::Result;
use crate::numerics::QuadratureSpec;
use crate::physics::Weights;
use crate::scalar::ScalarCbsQuery;

/// Ratio between the vector and scalar angular weights: W = (9/4)·P̄.
pub const VECTOR_WEIGHT: f64 = 9.0 / 4.0;

/// Coherent coefficient γ_C for a polarisation channel and transition.
pub fn gamma_c_vector(
    q: &ScalarCbsQuery,
    channel: &PolarizationChannel,
    weights: &Weights,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let weight = |theta: f64| VECTOR_WEIGHT * azimuthal_factor_c(channel, theta, weights);
    Ok(q.reduced()?.integrate(weight, spec)?.value)
}

/// Incoherent coefficient γ_B for a polarisation channel and transition.
pub fn gamma_b_vector(channel: &PolarizationChannel, weights: &Weights, spec: &QuadratureSpec) -> Result<f64> {
    let weight = |theta: f64| VECTOR_WEIGHT * azimuthal_factor_b(channel, theta, weights);
    Ok(DoubleScattering::new(0.0, 0.0)?.integrate(weight, spec)?.value)
}

/// Enhancement γ_C/γ_B, without single scattering.
pub fn contrast_vector(
    q: &ScalarCbsQuery,
    channel: &PolarizationChannel,
    weights: &Weights,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(gamma_c_vector(q, channel, weights, spec)? / gamma_b_vector(channel, weights, spec)?)
}

/// Enhancement γ_C/(γ_B + γ_S), including single scattering in the
/// background.
pub fn contrast_with_single(
    q: &ScalarCbsQuery,
    channel: &PolarizationChannel,
    weights: &Weights,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let b = gamma_b_vector(channel, weights, spec)? + gamma_single(channel, weights);
    Ok(gamma_c_vector(q, channel, weights, spec)? / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::double::DoubleScattering;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn query(kv: f64) -> ScalarCbsQuery {
        ScalarCbsQuery::new(0.0, kv, 1e4).unwrap()
    }

    #[test]
    fn zero_temperature_helicity_contrasts() {
        let ch = PolarizationChannel::helicity_preserving();
        let d1 = contrast_vector(&query(0.0), &ch, &Weights::D1, &spec()).unwrap();
        let d2 = contrast_vector(&query(0.0), &ch, &Weights::D2, &spec()).unwrap();
        assert!((d1 - 5.0 / 12.0).abs() < 1e-8, "{d1}");
        assert!((d2 - 53.0 / 165.0).abs() < 1e-8, "{d2}");
    }

    #[test]
    fn dipole_has_full_contrast() {
        for p in ChannelPreset::NAMED {
            let ch = PolarizationChannel::preset(p).unwrap();
            let c = contrast_vector(&query(0.0), &ch, &Weights::DIPOLE, &spec()).unwrap();
            assert!((c - 1.0).abs() < 1e-9, "{p}");
        }
    }

    #[test]
    fn high_temperature_constants() {
        let ch = PolarizationChannel::helicity_preserving();
        let kv = 100.0;
        let d1 = contrast_vector(&query(kv), &ch, &Weights::D1, &spec()).unwrap() * kv;
        let d1_const = 3.0 * PI.powf(1.5) / (32.0 * 2f64.sqrt());
        assert!((d1 / d1_const - 1.0).abs() < 0.02, "{d1}");
        let d2 = contrast_vector(&query(kv), &ch, &Weights::D2, &spec()).unwrap() * kv;
        assert!((d2 / 0.241_613_334_4 - 1.0).abs() < 0.02, "{d2}");
    }

    #[test]
    fn coherent_bounded_by_incoherent_in_every_preset() {
        for w in [Weights::D1, Weights::D2] {
            for p in ChannelPreset::NAMED {
                let ch = PolarizationChannel::preset(p).unwrap();
                let c = gamma_c_vector(&query(0.0), &ch, &w, &spec()).unwrap();
                let b = gamma_b_vector(&ch, &w, &spec()).unwrap();
                assert!(c <= b + 1e-12, "{p}: {c} > {b}");
            }
        }
    }

    #[test]
    fn forced_isotropic_factor_recovers_scalar() {
        let q = ScalarCbsQuery::new(2e-4, 3.0, 1e4).unwrap();
        let vector = q
            .reduced()
            .unwrap()
            .integrate(|_| VECTOR_WEIGHT * 4.0 / 9.0, &spec())
            .unwrap()
            .value;
        let scalar = crate::scalar::gamma_c_scalar(&q, &spec()).unwrap();
        assert!((vector - scalar).abs() < 1e-14);
        let b = DoubleScattering::new(0.0, 0.0)
            .unwrap()
            .integrate(|_| VECTOR_WEIGHT * 4.0 / 9.0, &spec())
            .unwrap()
            .value;
        assert!((b - crate::scalar::gamma_b_scalar()).abs() < 1e-10);
    }

    #[test]
    fn single_scattering_lowers_linear_contrast() {
        let ch = PolarizationChannel::preset(ChannelPreset::LinearParallel).unwrap();
        let without = contrast_vector(&query(0.0), &ch, &Weights::D1, &spec()).unwrap();
        let with = contrast_with_single(&query(0.0), &ch, &Weights::D1, &spec()).unwrap();
        assert!(with < without);
        let hh = PolarizationChannel::helicity_preserving();
        let a = contrast_vector(&query(0.0), &hh, &Weights::D1, &spec()).unwrap();
        let b = contrast_with_single(&query(0.0), &hh, &Weights::D1, &spec()).unwrap();
        assert!((a - b).abs() < 1e-15);
    }
}
