//! Zeeman-averaged polarisation factors of single and double scattering.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::channel::{dot, PolarizationChannel};
use crate::error::{CbsError, Result};
use crate::physics::Weights;

/// Unit vector joining the two atoms of a double-scattering path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorInput {
    r_hat: [f64; 3],
}

impl ProjectorInput {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        let n = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(CbsError::invalid("r_hat", "must be a finite non-zero vector"));
        }
        Ok(ProjectorInput {
            r_hat: [r[0] / n, r[1] / n, r[2] / n],
        })
    }

    /// Polar angle θ from the inward normal (+z) and azimuth φ.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        ProjectorInput {
            r_hat: [st * cp, st * sp, ct],
        }
    }

    pub fn r_hat(&self) -> [f64; 3] {
        self.r_hat
    }

    /// Δ_ij = δ_ij − r̂_i r̂_j.
    pub fn projector(&self) -> [[f64; 3]; 3] {
        let r = self.r_hat;
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f64::from(u8::from(i == j)) - r[i] * r[j];
            }
        }
        m
    }

    /// a·Δ·b = a·b − (a·r̂)(b·r̂), bilinear.
    fn contract(&self, a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
        let r = self.r_hat;
        let ar = a[0] * r[0] + a[1] * r[1] + a[2] * r[2];
        let br = b[0] * r[0] + b[1] * r[1] + b[2] * r[2];
        dot(a, b) - ar * br
    }
}

struct Vectors {
    e: [Complex64; 3],
    ec: [Complex64; 3],
    d: [Complex64; 3],
    dc: [Complex64; 3],
}

fn vectors(channel: &PolarizationChannel) -> Vectors {
    Vectors {
        e: *channel.incident.components(),
        ec: *channel.incident.conj().components(),
        d: *channel.detected.components(),
        dc: *channel.detected.conj().components(),
    }
}

/// Coherent (interference) factor P_C.
pub fn polarization_factor_c(channel: &PolarizationChannel, r: &ProjectorInput, w: &Weights) -> f64 {
    let v = vectors(channel);
    let t1 = (w.w1 * w.w1 + w.w3 * w.w3) * r.contract(&v.dc, &v.e).norm_sqr();
    let t2 = 2.0 * w.w1 * w.w3 * (r.contract(&v.e, &v.ec) * r.contract(&v.d, &v.dc)).re;
    let t3 = (w.w1 + w.w3)
        * w.w2
        * (dot(&v.e, &v.d) * r.contract(&v.ec, &v.dc) + dot(&v.ec, &v.dc) * r.contract(&v.e, &v.d)).re;
    let t4 = 2.0 * w.w2 * w.w2 * dot(&v.d, &v.e).norm_sqr();
    t1 + t2 + t3 + t4
}

/// Incoherent (ladder) factor P_B.
pub fn polarization_factor_b(channel: &PolarizationChannel, r: &ProjectorInput, w: &Weights) -> f64 {
    let v = vectors(channel);
    let t1 = (w.w1 * w.w1 + w.w2 * w.w2) * r.contract(&v.dc, &v.e).norm_sqr();
    let t2 = 2.0 * w.w1 * w.w2 * r.contract(&v.d, &v.e).norm_sqr();
    let t3 = (w.w1 + w.w2) * w.w3 * (r.contract(&v.ec, &v.e) + r.contract(&v.dc, &v.d)).re;
    let t4 = 2.0 * w.w3 * w.w3;
    t1 + t2 + t3 + t4
}

/// Single-scattering factor P_S.
pub fn polarization_factor_s(channel: &PolarizationChannel, w: &Weights) -> f64 {
    let v = vectors(channel);
    w.w1 * dot(&v.dc, &v.e).norm_sqr() + w.w2 * dot(&v.d, &v.e).norm_sqr() + w.w3
}

/// Single-scattering bistatic coefficient γ_S = (3/4)P_S.
pub fn gamma_single(channel: &PolarizationChannel, w: &Weights) -> f64 {
    0.75 * polarization_factor_s(channel, w)
}

/// Points of the azimuthal rule. The factors are trigonometric polynomials
/// of degree at most four in φ, which a uniform rule of this size
/// integrates exactly.
const AZIMUTH_POINTS: usize = 16;

fn azimuth_average(theta: f64, f: impl Fn(&ProjectorInput) -> f64) -> f64 {
    let step = 2.0 * PI / AZIMUTH_POINTS as f64;
    let sum: f64 = (0..AZIMUTH_POINTS)
        .map(|i| f(&ProjectorInput::from_angles(theta, step * i as f64)))
        .sum();
    sum / AZIMUTH_POINTS as f64
}

/// P_C averaged over the azimuth of r̂ at polar angle θ.
pub fn azimuthal_factor_c(channel: &PolarizationChannel, theta: f64, w: &Weights) -> f64 {
    azimuth_average(theta, |r| polarization_factor_c(channel, r, w))
}

/// P_B averaged over the azimuth of r̂ at polar angle θ.
pub fn azimuthal_factor_b(channel: &PolarizationChannel, theta: f64, w: &Weights) -> f64 {
    azimuth_average(theta, |r| polarization_factor_b(channel, r, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::channel::{ChannelPreset, Polarization};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const TABULATED: [Weights; 3] = [Weights::DIPOLE, Weights::D1, Weights::D2];

    fn random_polarization(rng: &mut ChaCha8Rng) -> Polarization {
        let c = [0; 3].map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        Polarization::normalized(c).unwrap()
    }

    fn random_channel(rng: &mut ChaCha8Rng) -> PolarizationChannel {
        PolarizationChannel::custom(random_polarization(rng), random_polarization(rng))
    }

    fn random_direction(rng: &mut ChaCha8Rng) -> ProjectorInput {
        ProjectorInput::from_angles(rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI))
    }

    /// P_S as the full index contraction ε′*_i ε_j ε′_k ε*_l T_ijkl with the
    /// isotropic rank-4 tensor T = w₁δ_ij δ_kl + w₃δ_ik δ_jl + w₂δ_il δ_jk.
    fn p_s_tensor(ch: &PolarizationChannel, w: &Weights) -> f64 {
        let e = ch.incident.components();
        let d = ch.detected.components();
        let delta = |a: usize, b: usize| f64::from(u8::from(a == b));
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let t = w.w1 * delta(i, j) * delta(k, l)
                            + w.w3 * delta(i, k) * delta(j, l)
                            + w.w2 * delta(i, l) * delta(j, k);
                        sum += d[i].conj() * e[j] * d[k] * e[l].conj() * t;
                    }
                }
            }
        }
        sum.re
    }

    #[test]
    fn projector_is_symmetric_idempotent_trace_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let m = random_direction(&mut rng).projector();
            let trace: f64 = (0..3).map(|i| m[i][i]).sum();
            assert!((trace - 2.0).abs() < 1e-14);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(m[i][j], m[j][i]);
                    let sq: f64 = (0..3).map(|k| m[i][k] * m[k][j]).sum();
                    assert!((sq - m[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn helicity_preserving_closed_forms() {
        let ch = PolarizationChannel::helicity_preserving();
        for theta in [0.0, 0.2, 0.7, 1.1, PI / 2.0] {
            let s = theta.sin().powi(2);
            for phi in [0.0, 1.3, 4.0] {
                let r = ProjectorInput::from_angles(theta, phi);
                let c1 = polarization_factor_c(&ch, &r, &Weights::D1);
                let b1 = polarization_factor_b(&ch, &r, &Weights::D1);
                let c2 = polarization_factor_c(&ch, &r, &Weights::D2);
                let b2 = polarization_factor_b(&ch, &r, &Weights::D2);
                assert!((c1 - s * s / 9.0).abs() < 1e-14);
                assert!((b1 - 2.0 * s / 9.0).abs() < 1e-14);
                assert!((c2 - s / 144.0 * (25.0 * s - 12.0)).abs() < 1e-14);
                assert!((b2 - s / 144.0 * (20.0 + 9.0 * s)).abs() < 1e-14);
            }
        }
        let r = ProjectorInput::from_angles(PI / 2.0, 0.0);
        assert!((polarization_factor_c(&ch, &r, &Weights::D1) - 1.0 / 9.0).abs() < 1e-15);
        let small = ProjectorInput::from_angles(0.2, 0.0);
        assert!(polarization_factor_c(&ch, &small, &Weights::D2) < 0.0);
    }

    #[test]
    fn incoherent_factor_is_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let ch = random_channel(&mut rng);
            let r = random_direction(&mut rng);
            for w in TABULATED {
                assert!(polarization_factor_b(&ch, &r, &w) >= -1e-14);
            }
        }
    }

    #[test]
    fn coherent_equals_incoherent_only_for_the_dipole() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut max_diff = [0.0_f64; 3];
        for _ in 0..500 {
            let ch = random_channel(&mut rng);
            let r = random_direction(&mut rng);
            for (k, w) in TABULATED.iter().enumerate() {
                let diff = (polarization_factor_c(&ch, &r, w) - polarization_factor_b(&ch, &r, w)).abs();
                max_diff[k] = max_diff[k].max(diff);
            }
        }
        assert!(max_diff[0] < 1e-14);
        assert!(max_diff[1] > 1e-3);
        assert!(max_diff[2] > 1e-3);
    }

    #[test]
    fn single_scattering_values() {
        let hh = PolarizationChannel::helicity_preserving();
        let ll = PolarizationChannel::preset(ChannelPreset::LinearParallel).unwrap();
        let lp = PolarizationChannel::preset(ChannelPreset::LinearPerpendicular).unwrap();
        assert!(gamma_single(&hh, &Weights::D1).abs() < 1e-15);
        assert!(gamma_single(&hh, &Weights::D2).abs() < 1e-15);
        assert!((polarization_factor_s(&ll, &Weights::D1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((gamma_single(&ll, &Weights::D1) - 0.25).abs() < 1e-15);
        assert!(polarization_factor_s(&lp, &Weights::DIPOLE).abs() < 1e-15);
        assert!((gamma_single(&ll, &Weights::DIPOLE) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn single_scattering_matches_tensor_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let ch = random_channel(&mut rng);
            for w in TABULATED {
                assert!((polarization_factor_s(&ch, &w) - p_s_tensor(&ch, &w)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn azimuth_rule_is_exact() {
        // A finer rule must agree to rounding for every channel type.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let ch = random_channel(&mut rng);
            let theta = rng.random_range(0.0..PI / 2.0);
            let fine: f64 = (0..256)
                .map(|i| {
                    let r = ProjectorInput::from_angles(theta, 2.0 * PI * i as f64 / 256.0);
                    polarization_factor_c(&ch, &r, &Weights::D2)
                })
                .sum::<f64>()
                / 256.0;
            assert!((azimuthal_factor_c(&ch, theta, &Weights::D2) - fine).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn single_scattering_is_rotation_invariant(seed in any::<u64>(), angle in 0.0..(2.0 * PI)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ch = random_channel(&mut rng);
            let rotated = ch.rotated_about_z(angle);
            for w in TABULATED {
                prop_assert!((gamma_single(&ch, &w) - gamma_single(&rotated, &w)).abs() < 1e-13);
            }
        }
    }
}
