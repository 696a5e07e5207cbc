//! Special functions and integration rules shared by the quadrature modules.

mod quadrature;
mod special;

pub use quadrature::{
    integrate, integrate_1d, integrate_estimates, integrate_quasi_random, integrate_with_breaks, Axis, Estimate,
    QuadratureError, QuadratureSpec, Upper,
};
pub use special::{bessel_i0, bessel_i0_scaled, bessel_j0, bessel_j0_zero, gamma_fn, power_tail, zeta_fn};
