//! Weak localization of light in hot atomic vapours.
//!
//! The crate evaluates the coherent backscattering (CBS) peak of light
//! multiply scattered by a thermal gas of atoms driven far from resonance:
//!
//! * [`physics`]: single-atom and effective-medium quantities (t-matrix,
//!   mean free path, refractive index, group-delay factor, regime checks).
//! * [`numerics`]: special functions and adaptive quadrature.
//! * [`cold`]: the temporal-domain contrast model for slow atoms.
//! * [`scalar`]: scalar double-scattering bistatic coefficients, their
//!   high-temperature asymptote and peak width.
//! * [`vector`]: polarisation channels, Zeeman-averaged contraction factors
//!   and the vector double/single scattering coefficients.
//! * [`geometry`]: finite cylindrical cells and the contrast amplification
//!   factor.
//! * [`mc`]: Monte Carlo transport with per-order coherent tallies.
//! * [`sweeps`]: temperature and angle sweeps pairing quadrature with
//!   Monte Carlo.
//!
//! Units are scale free throughout: frequencies in units of the linewidth
//! Γ, lengths in units of the mean free path ℓ (or 1/k where stated), and
//! densities as ρk⁻³.

// Series coefficients keep all their tabulated digits, and `!(x > 0.0)`
// is used so that NaN fails validation.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod cold;
pub mod double;
pub mod error;
pub mod geometry;
pub mod mc;
pub mod numerics;
pub mod physics;
pub mod scalar;
pub mod sweeps;
pub mod vector;

pub use error::{CbsError, Result};
pub use geometry::{CellGeometry, Extent, TransverseKernel};
pub use mc::{BistaticResult, Estimator, McConfig};
pub use numerics::{Estimate, QuadratureSpec};
pub use physics::{HalfInt, RegimeReport, ScatteringKind, Transition, VaporParams, Weights};
pub use scalar::ScalarCbsQuery;
pub use vector::{ChannelPreset, Polarization, PolarizationChannel};
