//! Temporal-domain contrast model for slowly moving atoms.
//!
//! Each scattering sequence of N atoms separated by a fixed delay τ keeps a
//! contrast c(N) = exp[−(kv̄τ)²(N³ − N)/3]; sequences are weighted
//! diffusively by N^{−3/2}.

use serde::{Deserialize, Serialize};

use crate::error::{CbsError, Result};
use crate::numerics::{gamma_fn, power_tail, zeta_fn};

/// Orders summed explicitly before the analytic tail takes over.
pub const DEFAULT_MAX_ORDER: u64 = 10_000_000;

/// Stop once the next numerator term is below this fraction of the partial sum.
const TERM_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColdParams {
    /// kv̄τ
    pub kv_tau: f64,
    pub max_order: u64,
}

impl ColdParams {
    pub fn new(kv_tau: f64) -> Result<Self> {
        Self::with_max_order(kv_tau, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(kv_tau: f64, max_order: u64) -> Result<Self> {
        if !(kv_tau >= 0.0) || !kv_tau.is_finite() {
            return Err(CbsError::invalid("kv_tau", "must be finite and ≥ 0"));
        }
        if max_order < 1 {
            return Err(CbsError::invalid("max_order", "must be at least 1"));
        }
        Ok(ColdParams { kv_tau, max_order })
    }
}

/// Contrast c(N) of a single sequence of `order` atoms.
pub fn sequence_contrast(order: u64, kv_tau: f64) -> f64 {
    let n = order as f64;
    (-(kv_tau * kv_tau) * (n * n * n - n) / 3.0).exp()
}

/// Full contrast C = Σ c(N) N^{−3/2} / Σ N^{−3/2}.
///
/// Both sums run until the numerator term drops below 10⁻¹⁰ of the partial
/// sum (or `max_order` is hit). The remaining tail is Σ_{N>M} N^{−3/2}
/// from Euler–Maclaurin, weighted by c(M+1) in the numerator. Because c is
/// non-increasing that weighting is an upper bound on the true numerator
/// tail, and it makes C(0) = 1 exactly.
pub fn full_contrast(params: &ColdParams) -> Result<f64> {
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    let mut last = params.max_order;
    for n in 1..=params.max_order {
        let weight = (n as f64).powf(-1.5);
        let term = sequence_contrast(n, params.kv_tau) * weight;
        numerator += term;
        denominator += weight;
        if term < TERM_CUTOFF * numerator {
            last = n;
            break;
        }
    }
    let tail = power_tail(1.5, last + 1)?;
    numerator += sequence_contrast(last + 1, params.kv_tau) * tail;
    denominator += tail;
    Ok(numerator / denominator)
}

/// 2Γ(5/6) / (3^{1/6} ζ(3/2)).
pub fn asymptotic_prefactor() -> f64 {
    let gamma = gamma_fn(5.0 / 6.0).expect("5/6 is in the gamma domain");
    let zeta = zeta_fn(1.5).expect("3/2 is in the zeta domain");
    2.0 * gamma / (3f64.powf(1.0 / 6.0) * zeta)
}

/// Small-velocity law C ≃ 1 − 2Γ(5/6)/(3^{1/6}ζ(3/2)) · (kv̄/Γ)^{1/3}.
///
/// Only meaningful for kv̄/Γ ≪ 1; see [`asymptotic_is_reliable`].
pub fn asymptotic_contrast(kv_over_gamma: f64) -> f64 {
    1.0 - asymptotic_prefactor() * kv_over_gamma.cbrt()
}

/// The asymptotic law assumes kv̄/Γ ≪ 1; above 0.1 it should not be trusted.
pub fn asymptotic_is_reliable(kv_over_gamma: f64) -> bool {
    kv_over_gamma <= 0.1
}
