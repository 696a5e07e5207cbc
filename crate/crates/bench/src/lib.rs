//! Shared fixtures for the criterion benchmarks.

use hotcbs::{McConfig, ScalarCbsQuery};

/// Angular-profile operating point: kv̄ = 10Γ, kℓ = 10⁴, one peak width off axis.
pub fn profile_query() -> ScalarCbsQuery {
    ScalarCbsQuery::new(4e-3, 10.0, 1e4).expect("valid query")
}

/// A small double/triple scattering run used to time the transport loop.
pub fn small_mc_config(samples: u64) -> McConfig {
    let mut config = McConfig::scalar_semi_infinite(10.0, 50.0, 1e4);
    config.samples = samples;
    config.max_order = 3;
    config.threads = 1;
    config
}

/// Cylindrical cell with radius and thickness in units of ℓ.
pub fn cell(radius: f64, thickness: f64) -> hotcbs::CellGeometry {
    hotcbs::CellGeometry::cylinder(radius, thickness).expect("valid cell")
}
