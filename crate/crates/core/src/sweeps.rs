//! Parameter sweeps that pair quadrature with Monte Carlo: the peak
//! contrast against temperature and the angular profile of the peak.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mc::{run_tally, Estimator, McConfig, DEFAULT_CHUNK};
use crate::numerics::QuadratureSpec;
use crate::scalar::{asymptotic_profile, contrast_scalar, ScalarCbsQuery};

/// Monte Carlo settings shared by the rows of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepMc {
    pub samples: u64,
    pub seed: u64,
    pub threads: usize,
    pub chunk_size: u64,
    pub estimator: Estimator,
}

impl Default for SweepMc {
    fn default() -> Self {
        SweepMc {
            samples: 1_000_000,
            seed: 1,
            threads: 0,
            chunk_size: DEFAULT_CHUNK,
            estimator: Estimator::default(),
        }
    }
}

/// A value with its standard error, or the reason it is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Value { value: f64, error: f64 },
    Missing(String),
}

impl Cell {
    fn exact(r: Result<f64>) -> Self {
        match r {
            Ok(value) => Cell::Value { value, error: 0.0 },
            Err(e) => Cell::Missing(e.to_string()),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value { value, .. } => Some(*value),
            Cell::Missing(_) => None,
        }
    }

    pub fn error(&self) -> Option<f64> {
        match self {
            Cell::Value { error, .. } => Some(*error),
            Cell::Missing(_) => None,
        }
    }
}

/// One temperature of the peak-contrast sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRow {
    pub kv_over_gamma: f64,
    pub quadrature: Cell,
    pub asymptote: f64,
    pub monte_carlo: Cell,
}

/// Peak contrast C(0) of double scattering against kv̄/Γ, by quadrature, by
/// the high-temperature asymptote and by Monte Carlo. Row i uses seed
/// `mc.seed + i`; a failing row does not stop the sweep.
pub fn peak_vs_temperature(
    kv_grid: &[f64],
    detuning: f64,
    k_ell: f64,
    mc: &SweepMc,
    spec: &QuadratureSpec,
) -> Vec<PeakRow> {
    kv_grid
        .iter()
        .enumerate()
        .map(|(i, &kv)| {
            let quadrature = Cell::exact(ScalarCbsQuery::new(0.0, kv, k_ell).and_then(|q| contrast_scalar(&q, spec)));
            let mut config = McConfig::scalar_semi_infinite(kv, detuning, k_ell);
            config.samples = mc.samples;
            config.seed = mc.seed.wrapping_add(i as u64);
            config.threads = mc.threads;
            config.chunk_size = mc.chunk_size;
            config.estimator = mc.estimator;
            config.max_order = 2;
            let monte_carlo = match run_tally(&config) {
                Ok(t) => {
                    let c = t.contrast(2, 0);
                    Cell::Value {
                        value: c.mean,
                        error: c.error,
                    }
                }
                Err(e) => Cell::Missing(e.to_string()),
            };
            PeakRow {
                kv_over_gamma: kv,
                quadrature,
                asymptote: asymptotic_profile(0.0, kv),
                monte_carlo,
            }
        })
        .collect()
}

/// One detection angle of the profile sweep. All contrasts of double and
/// triple scattering share the double-scattering background, except
/// `triple_own`, which is normalised to the triple-scattering background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub dtheta: f64,
    pub quadrature: Cell,
    pub double: Cell,
    pub triple: Cell,
    pub triple_own: Cell,
}

/// Angular profile C(Δθ) by quadrature and by Monte Carlo for double and
/// triple scattering, from one transport run over the whole grid.
pub fn angular_profile(
    dtheta: &[f64],
    kv_over_gamma: f64,
    detuning: f64,
    k_ell: f64,
    mc: &SweepMc,
    spec: &QuadratureSpec,
) -> Result<Vec<ProfileRow>> {
    let mut config = McConfig::scalar_semi_infinite(kv_over_gamma, detuning, k_ell);
    config.samples = mc.samples;
    config.seed = mc.seed;
    config.threads = mc.threads;
    config.chunk_size = mc.chunk_size;
    config.estimator = mc.estimator;
    config.max_order = 3;
    config.dtheta = dtheta.to_vec();
    let tally = run_tally(&config)?;
    let b2 = tally.incoherent(2);
    Ok(dtheta
        .iter()
        .enumerate()
        .map(|(j, &dt)| {
            let quadrature =
                Cell::exact(ScalarCbsQuery::new(dt, kv_over_gamma, k_ell).and_then(|q| contrast_scalar(&q, spec)));
            let d = tally.contrast(2, j);
            let c3 = tally.coherent(3, j);
            // Orders 2 and 3 come from the same walks; treating them as
            // independent overstates this error slightly.
            let triple = c3.mean / b2.mean;
            let triple_err = triple.abs() * ((c3.error / c3.mean).powi(2) + (b2.error / b2.mean).powi(2)).sqrt();
            let own = tally.contrast(3, j);
            ProfileRow {
                dtheta: dt,
                quadrature,
                double: Cell::Value {
                    value: d.mean,
                    error: d.error,
                },
                triple: Cell::Value {
                    value: triple,
                    error: if triple_err.is_finite() { triple_err } else { 0.0 },
                },
                triple_own: Cell::Value {
                    value: own.mean,
                    error: own.error,
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepMc {
        SweepMc {
            samples: 20_000,
            ..SweepMc::default()
        }
    }

    #[test]
    fn peak_rows_carry_all_three_estimates() {
        let rows = peak_vs_temperature(&[0.0, 40.0], 50.0, 1e4, &small(), &QuadratureSpec::default());
        assert!((rows[0].quadrature.value().unwrap() - 1.0).abs() < 1e-9);
        assert!((rows[1].asymptote - 0.0355).abs() < 5e-5);
        assert!(rows.iter().all(|r| r.monte_carlo.value().is_some()));
    }

    #[test]
    fn invalid_rows_are_recorded_not_fatal() {
        let rows = peak_vs_temperature(&[-1.0, 1.0], 50.0, 1e4, &small(), &QuadratureSpec::default());
        assert!(matches!(rows[0].quadrature, Cell::Missing(_)));
        assert!(matches!(rows[0].monte_carlo, Cell::Missing(_)));
        assert!(rows[1].quadrature.value().is_some());
    }

    #[test]
    fn profile_at_zero_angle_is_the_peak() {
        let spec = QuadratureSpec::default();
        let rows = angular_profile(&[0.0, 4e-3], 10.0, 50.0, 1e4, &small(), &spec).unwrap();
        let q0 = contrast_scalar(&ScalarCbsQuery::new(0.0, 10.0, 1e4).unwrap(), &spec).unwrap();
        assert_eq!(rows[0].quadrature.value().unwrap(), q0);
        assert!(rows[1].quadrature.value().unwrap() < q0);
    }
}
