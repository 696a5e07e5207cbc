//! Double scattering at exact backscattering from a cylindrical cell of
//! radius ℛ and thickness ℒ, lit along its axis.
//!
//! The four-variable cell integral over (z₁, z₂, Θ, Δρ) is reduced exactly:
//! the Θ integral becomes a transverse kernel K(Δρ), the depth pair becomes
//! w = |z₁−z₂| with weight e^{−w} − e^{−(2ℒ−w)}, and (Δρ, w) go to polar
//! coordinates (r, θ) around the coincident-atom point, which removes the
//! 1/r² singularity:
//!
//! ```text
//! γ = 9/(16π) ∫₀^{π/2} dθ sinθ P̄(θ) ∫₀^{r_max} dr e^{−r} Z(r cosθ) K(r sinθ) e^{−2a²r²sin²θ}
//! ```
//!
//! The literal four-variable integrand is kept for cross-checks.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CbsError, Result};
use crate::numerics::{
    integrate, integrate_estimates, integrate_quasi_random, integrate_with_breaks, Axis, Estimate, QuadratureSpec,
};
use crate::physics::Weights;
use crate::scalar::ScalarCbsQuery;
use crate::vector::{azimuthal_factor_b, azimuthal_factor_c, gamma_b_vector, gamma_c_vector, PolarizationChannel};

const LOG_CUTOFF: f64 = 36.84;

/// A length that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    Finite(f64),
    Infinite,
}

impl Extent {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Extent::Infinite)
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Extent::Finite(v) => v,
            Extent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(v) => write!(f, "{v}"),
            Extent::Infinite => f.write_str("inf"),
        }
    }
}

/// How the transverse (Θ) integral of the cell is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransverseKernel {
    /// K(d) = 4 arccos(d/2ℛ): the Δρ limit ℛ√(2(1+cosΘ)) taken literally.
    #[default]
    ArcCosine,
    /// K(d) = 2 A_overlap(d)/ℛ²: the exact overlap of two disks of radius ℛ
    /// whose centres are d apart, per unit area.
    DiskOverlap,
}

impl TransverseKernel {
    fn eval(&self, d: f64, radius: f64) -> f64 {
        if radius.is_infinite() {
            return 2.0 * PI;
        }
        let u = d / (2.0 * radius);
        if u >= 1.0 {
            return 0.0;
        }
        match self {
            TransverseKernel::ArcCosine => 4.0 * u.acos(),
            TransverseKernel::DiskOverlap => 4.0 * u.acos() - 4.0 * u * (1.0 - u * u).sqrt(),
        }
    }
}

/// Cell shape in units of ℓ. Both extents infinite is the semi-infinite
/// medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub radius: Extent,
    pub thickness: Extent,
    #[serde(default)]
    pub kernel: TransverseKernel,
}

impl CellGeometry {
    pub fn semi_infinite() -> Self {
        CellGeometry {
            radius: Extent::Infinite,
            thickness: Extent::Infinite,
            kernel: TransverseKernel::default(),
        }
    }

    pub fn cylinder(radius: f64, thickness: f64) -> Result<Self> {
        let g = CellGeometry {
            radius: Extent::Finite(radius),
            thickness: Extent::Finite(thickness),
            kernel: TransverseKernel::default(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_kernel(mut self, kernel: TransverseKernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn is_semi_infinite(&self) -> bool {
        self.radius.is_infinite() && self.thickness.is_infinite()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("radius", self.radius), ("thickness", self.thickness)] {
            if let Extent::Finite(v) = e {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CbsError::invalid(name, format!("must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Depth weight of a pair of atoms a distance w apart along the axis.
    fn depth_weight(&self, w: f64) -> f64 {
        match self.thickness {
            Extent::Infinite => (-w).exp(),
            Extent::Finite(l) => (-w).exp() - (-(2.0 * l - w)).exp(),
        }
    }
}

/// Which bistatic coefficient a cell integral computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Signal {
    Coherent,
    Background,
}

struct CellIntegral<'a> {
    geom: CellGeometry,
    kv_over_gamma: f64,
    weights: &'a Weights,
    channel: &'a PolarizationChannel,
    signal: Signal,
}

impl CellIntegral<'_> {
    fn factor(&self, theta: f64) -> f64 {
        match self.signal {
            Signal::Coherent => azimuthal_factor_c(self.channel, theta, self.weights),
            Signal::Background => azimuthal_factor_b(self.channel, theta, self.weights),
        }
    }

    fn radial_limit(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let mut r = LOG_CUTOFF;
        if let Extent::Finite(l) = self.geom.thickness {
            if c > 0.0 {
                r = r.min(l / c);
            }
        }
        if let Extent::Finite(rad) = self.geom.radius {
            if s > 0.0 {
                r = r.min(2.0 * rad / s);
            }
        }
        let doppler = self.kv_over_gamma * s;
        if doppler > 0.0 {
            r = r.min((LOG_CUTOFF / (2.0 * doppler * doppler)).sqrt());
        }
        r
    }

    fn radial(&self, theta: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        let (s, c) = theta.sin_cos();
        let a2 = 2.0 * self.kv_over_gamma * self.kv_over_gamma * s * s;
        let radius = self.geom.radius.as_f64();
        let f = |r: f64| (-r - a2 * r * r).exp() * self.geom.depth_weight(r * c) * self.geom.kernel.eval(r * s, radius);
        let upper = self.radial_limit(theta);
        match integrate_with_breaks(f, &[0.0, upper], spec) {
            Ok(e) => Ok(e),
            Err(err) => err.best_estimate().ok_or(CbsError::Quadrature(err)),
        }
    }

    fn polar_breaks(&self) -> Vec<f64> {
        let mut points = vec![0.0, FRAC_PI_2];
        if let (Extent::Finite(r), Extent::Finite(l)) = (self.geom.radius, self.geom.thickness) {
            points.push((2.0 * r / l).atan());
        }
        if self.kv_over_gamma > 0.0 {
            for c in [0.1, 1.0, 10.0] {
                let t = c / self.kv_over_gamma;
                if t < FRAC_PI_2 * 0.999 {
                    points.push(t);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    fn evaluate(&self, spec: &QuadratureSpec) -> Result<Estimate> {
        spec.validate()?;
        let inner_spec = spec.inner();
        let prefactor = 9.0 / (16.0 * PI);
        let mut failure = None;
        let outer = |theta: f64| {
            let w = prefactor * theta.sin() * self.factor(theta);
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

    /// Literal integrand over the unit-scaled box (z₁, z₂, Θ, u), with
    /// Δρ = u·ℛ√(2(1+cosΘ)).
    fn literal(&self, x: &[f64]) -> f64 {
        let (z1, z2, big_theta, u) = (x[0], x[1], x[2], x[3]);
        let radius = self.geom.radius.as_f64();
        let rho_max = radius * (2.0 * (1.0 + big_theta.cos())).max(0.0).sqrt();
        let rho = u * rho_max;
        if rho == 0.0 {
            return 0.0;
        }
        let dz = (z1 - z2).abs();
        let r2 = rho * rho + dz * dz;
        if r2 < f64::MIN_POSITIVE {
            return 0.0;
        }
        let r = r2.sqrt();
        let theta = rho.atan2(dz);
        let doppler = (-2.0 * self.kv_over_gamma * self.kv_over_gamma * rho * rho).exp();
        9.0 / (16.0 * PI) * rho * rho_max * (-(z1 + z2 + r)).exp() / r2 * doppler * self.factor(theta)
    }

    fn literal_domain(&self) -> Result<[Axis; 4]> {
        match (self.geom.radius, self.geom.thickness) {
            (Extent::Finite(_), Extent::Finite(l)) => Ok([
                Axis::finite(0.0, l),
                Axis::finite(0.0, l),
                Axis::finite(0.0, 2.0 * PI),
                Axis::finite(0.0, 1.0),
            ]),
            _ => Err(CbsError::invalid(
                "geometry",
                "the four-variable integrand needs a finite radius and thickness",
            )),
        }
    }
}

fn validate_kv(kv_over_gamma: f64) -> Result<()> {
    if kv_over_gamma.is_finite() && kv_over_gamma >= 0.0 {
        Ok(())
    } else {
        Err(CbsError::invalid("kv_over_gamma", "must be finite and non-negative"))
    }
}

fn cell<'a>(
    geom: &CellGeometry,
    kv_over_gamma: f64,
    weights: &'a Weights,
    channel: &'a PolarizationChannel,
    signal: Signal,
) -> Result<CellIntegral<'a>> {
    geom.validate()?;
    validate_kv(kv_over_gamma)?;
    Ok(CellIntegral {
        geom: *geom,
        kv_over_gamma,
        weights,
        channel,
        signal,
    })
}

/// Coherent coefficient γ_C(ℛ, ℒ) at exact backscattering.
pub fn gamma_c_cell(
    geom: &CellGeometry,
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if geom.is_semi_infinite() {
        let q = ScalarCbsQuery::new(0.0, kv_over_gamma, 1.0)?;
        return gamma_c_vector(&q, channel, weights, spec);
    }
    Ok(cell(geom, kv_over_gamma, weights, channel, Signal::Coherent)?
        .evaluate(spec)?
        .value)
}

/// Incoherent coefficient γ_B(ℛ, ℒ).
pub fn gamma_b_cell(
    geom: &CellGeometry,
    weights: &Weights,
    channel: &PolarizationChannel,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if geom.is_semi_infinite() {
        return gamma_b_vector(channel, weights, spec);
    }
    Ok(cell(geom, 0.0, weights, channel, Signal::Background)?
        .evaluate(spec)?
        .value)
}

/// Cell coefficient from the literal four-variable integrand by nested
/// quadrature (quasi-random past the evaluation budget). `kv_over_gamma`
/// is ignored for the background.
pub fn gamma_cell_literal(
    geom: &CellGeometry,
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    coherent: bool,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let (kv, signal) = signal_of(kv_over_gamma, coherent);
    let c = cell(geom, kv, weights, channel, signal)?;
    let domain = c.literal_domain()?;
    Ok(integrate(|x| c.literal(x), &domain, spec)?)
}

/// Cell coefficient from the literal four-variable integrand by randomised
/// quasi-Monte Carlo.
pub fn gamma_cell_quasi_random(
    geom: &CellGeometry,
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    coherent: bool,
    points: usize,
    seed: u64,
) -> Result<Estimate> {
    let (kv, signal) = signal_of(kv_over_gamma, coherent);
    let c = cell(geom, kv, weights, channel, signal)?;
    let domain = c.literal_domain()?;
    Ok(integrate_quasi_random(|x| c.literal(x), &domain, points, 16, seed)?)
}

fn signal_of(kv_over_gamma: f64, coherent: bool) -> (f64, Signal) {
    if coherent {
        (kv_over_gamma, Signal::Coherent)
    } else {
        (0.0, Signal::Background)
    }
}

/// Cell coefficients normalised to the semi-infinite medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRatios {
    pub gamma_c_ratio: f64,
    pub gamma_b_ratio: f64,
    pub amplification: f64,
}

/// Semi-infinite reference values (γ_C(∞), γ_B(∞)).
fn references(
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let inf = CellGeometry::semi_infinite();
    Ok((
        gamma_c_cell(&inf, kv_over_gamma, weights, channel, spec)?,
        gamma_b_cell(&inf, weights, channel, spec)?,
    ))
}

fn ratios_against(
    geom: &CellGeometry,
    reference: (f64, f64),
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    spec: &QuadratureSpec,
) -> Result<CellRatios> {
    if geom.is_semi_infinite() {
        return Ok(CellRatios {
            gamma_c_ratio: 1.0,
            gamma_b_ratio: 1.0,
            amplification: 1.0,
        });
    }
    let c = gamma_c_cell(geom, kv_over_gamma, weights, channel, spec)? / reference.0;
    let b = gamma_b_cell(geom, weights, channel, spec)? / reference.1;
    Ok(CellRatios {
        gamma_c_ratio: c,
        gamma_b_ratio: b,
        amplification: c / b,
    })
}

/// γ_C and γ_B ratios to the semi-infinite medium and their quotient 𝒜.
pub fn cell_ratios(
    geom: &CellGeometry,
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    spec: &QuadratureSpec,
) -> Result<CellRatios> {
    geom.validate()?;
    validate_kv(kv_over_gamma)?;
    if geom.is_semi_infinite() {
        return ratios_against(geom, (1.0, 1.0), kv_over_gamma, weights, channel, spec);
    }
    let reference = references(kv_over_gamma, weights, channel, spec)?;
    ratios_against(geom, reference, kv_over_gamma, weights, channel, spec)
}

/// Amplification factor 𝒜 = [γ_C(ℛ,ℒ)/γ_C(∞)] / [γ_B(ℛ,ℒ)/γ_B(∞)].
pub fn amplification(
    geom: &CellGeometry,
    kv_over_gamma: f64,
    weights: &Weights,
    channel: &PolarizationChannel,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(cell_ratios(geom, kv_over_gamma, weights, channel, spec)?.amplification)
}

/// Grid axes of a geometry map, in units of ℓ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub thicknesses: Vec<f64>,
}

impl GridSpec {
    /// `n` logarithmically spaced values per axis over [min, max].
    pub fn log_spaced(min: f64, max: f64, n: usize) -> Result<Self> {
        let axis = log_space(min, max, n)?;
        Ok(GridSpec {
            radii: axis.clone(),
            thicknesses: axis,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("radii", &self.radii), ("thicknesses", &self.thicknesses)] {
            if axis.is_empty() {
                return Err(CbsError::invalid(name, "grid axis is empty"));
            }
            if axis.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(CbsError::invalid(name, "grid values must be positive"));
            }
        }
        Ok(())
    }
}

/// Logarithmically spaced values from `min` to `max` inclusive.
pub fn log_space(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || n == 0 {
        return Err(CbsError::invalid("grid", "need 0 < min ≤ max and at least one point"));
    }
    if n == 1 {
        return Ok(vec![min]);
    }
    // Interior points are rounded to 15 significant digits so that decades
    // land on round numbers (0.5 rather than 0.49999999999999994).
    let snap = |v: f64| format!("{v:.14e}").parse::<f64>().unwrap_or(v);
    let ratio = max / min;
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                min
            } else if i + 1 == n {
                max
            } else {
                snap(min * ratio.powf(i as f64 / (n - 1) as f64))
            }
        })
        .collect())
}

/// One grid cell of a geometry map; failed evaluations are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub radius: f64,
    pub thickness: f64,
    pub ratios: Option<CellRatios>,
    pub error: Option<String>,
}

/// Physical parameters shared by every cell of a map.
#[derive(Debug, Clone, Copy)]
pub struct MapParams<'a> {
    pub kv_over_gamma: f64,
    pub weights: &'a Weights,
    pub channel: &'a PolarizationChannel,
    pub kernel: TransverseKernel,
    pub spec: &'a QuadratureSpec,
}

/// Evaluates the ratios over a grid in parallel, radius-major. The
/// semi-infinite references are computed once; a failing cell is recorded
/// and the rest of the map proceeds.
pub fn geometry_map(grid: &GridSpec, params: &MapParams<'_>) -> Result<Vec<MapCell>> {
    grid.validate()?;
    validate_kv(params.kv_over_gamma)?;
    let reference = references(params.kv_over_gamma, params.weights, params.channel, params.spec)?;
    let pairs: Vec<(f64, f64)> = grid
        .radii
        .iter()
        .flat_map(|&r| grid.thicknesses.iter().map(move |&l| (r, l)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(radius, thickness)| {
            let outcome = CellGeometry::cylinder(radius, thickness).and_then(|g| {
                ratios_against(
                    &g.with_kernel(params.kernel),
                    reference,
                    params.kv_over_gamma,
                    params.weights,
                    params.channel,
                    params.spec,
                )
            });
            match outcome {
                Ok(r) => MapCell {
                    radius,
                    thickness,
                    ratios: Some(r),
                    error: None,
                },
                Err(e) => MapCell {
                    radius,
                    thickness,
                    ratios: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Column names of the CSV map.
pub const MAP_COLUMNS: [&str; 5] = [
    "R_over_ell",
    "L_over_ell",
    "gammaC_ratio",
    "gammaB_ratio",
    "amplification",
];

/// Writes the header and one row per cell; failed cells have empty value
/// fields.
pub fn write_map_csv<W: Write>(cells: &[MapCell], out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", MAP_COLUMNS.join(","))?;
    for c in cells {
        match c.ratios {
            Some(r) => writeln!(
                out,
                "{},{},{},{},{}",
                c.radius, c.thickness, r.gamma_c_ratio, r.gamma_b_ratio, r.amplification
            )?,
            None => writeln!(out, "{},{},,,", c.radius, c.thickness)?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hh() -> PolarizationChannel {
        PolarizationChannel::helicity_preserving()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn semi_infinite_amplification_is_exactly_one() {
        let a = amplification(&CellGeometry::semi_infinite(), 40.0, &Weights::D1, &hh(), &spec()).unwrap();
        assert_eq!(a, 1.0);
    }

    #[test]
    fn infinite_radius_and_thickness_reproduce_the_half_space() {
        // Only one extent infinite runs the cell quadrature, not the dispatch.
        let g = CellGeometry {
            radius: Extent::Infinite,
            thickness: Extent::Finite(1e3),
            kernel: TransverseKernel::ArcCosine,
        };
        let cell = gamma_c_cell(&g, 5.0, &Weights::D1, &hh(), &spec()).unwrap();
        let q = ScalarCbsQuery::new(0.0, 5.0, 1.0).unwrap();
        let half = gamma_c_vector(&q, &hh(), &Weights::D1, &spec()).unwrap();
        assert!((cell / half - 1.0).abs() < 1e-8);
    }

    #[test]
    fn large_cell_approaches_semi_infinite() {
        let g = CellGeometry::cylinder(50.0, 50.0).unwrap();
        let r = cell_ratios(&g, 40.0, &Weights::D1, &hh(), &spec()).unwrap();
        assert!((r.gamma_c_ratio - 1.0).abs() < 0.01, "{r:?}");
        assert!((r.gamma_b_ratio - 1.0).abs() < 0.01, "{r:?}");
    }

    #[test]
    fn reference_ratios_at_fifty() {
        // Values from an independent scipy evaluation of the reduced form.
        let g = CellGeometry::cylinder(50.0, 50.0).unwrap();
        let r = cell_ratios(&g, 40.0, &Weights::D1, &hh(), &spec()).unwrap();
        assert!((r.gamma_c_ratio - 0.99994).abs() < 2e-5);
        assert!((r.gamma_b_ratio - 0.99546).abs() < 2e-5);
        let exact = g.with_kernel(TransverseKernel::DiskOverlap);
        let r = cell_ratios(&exact, 40.0, &Weights::D1, &hh(), &spec()).unwrap();
        assert!((r.gamma_c_ratio - 0.99987).abs() < 2e-5);
        assert!((r.gamma_b_ratio - 0.99093).abs() < 2e-5);
    }

    #[test]
    fn thin_cell_signals_vanish() {
        let mut last = f64::INFINITY;
        for l in [1e-1, 1e-2, 1e-3] {
            let g = CellGeometry::cylinder(1.0, l).unwrap();
            let b = gamma_b_cell(&g, &Weights::D1, &hh(), &spec()).unwrap();
            let c = gamma_c_cell(&g, 40.0, &Weights::D1, &hh(), &spec()).unwrap();
            assert!(b < last && c < b);
            last = b;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn narrow_cell_loses_more_background_than_coherent_signal() {
        let g = CellGeometry::cylinder(0.1, 1.0).unwrap();
        let r = cell_ratios(&g, 40.0, &Weights::D1, &hh(), &spec()).unwrap();
        assert!(r.gamma_b_ratio < r.gamma_c_ratio, "{r:?}");
        assert!(r.amplification > 1.0);
    }

    #[test]
    fn background_grows_with_cell_size() {
        for r in [0.1, 1.0, 5.0] {
            let mut last = 0.0;
            for l in [0.05, 0.2, 1.0, 5.0] {
                let g = CellGeometry::cylinder(r, l).unwrap();
                let b = gamma_b_cell(&g, &Weights::D1, &hh(), &spec()).unwrap();
                assert!(b >= last);
                last = b;
            }
        }
    }

    #[test]
    fn reduced_form_matches_literal_integrand() {
        let g = CellGeometry::cylinder(0.3, 0.4).unwrap();
        for (kv, coherent) in [(0.0, false), (3.0, true)] {
            let reduced = if coherent {
                gamma_c_cell(&g, kv, &Weights::D1, &hh(), &spec()).unwrap()
            } else {
                gamma_b_cell(&g, &Weights::D1, &hh(), &spec()).unwrap()
            };
            let qmc = gamma_cell_quasi_random(&g, kv, &Weights::D1, &hh(), coherent, 1 << 14, 7).unwrap();
            let tol = 4.0 * qmc.error + 0.01 * reduced;
            assert!((qmc.value - reduced).abs() < tol, "{qmc:?} vs {reduced}");
        }
    }

    #[test]
    fn reduced_form_matches_nested_literal_quadrature() {
        // The literal integrand has a logarithmic singularity along z₁ = z₂,
        // so the nested rule may exhaust its budget; its best estimate must
        // still bracket the reduced value.
        let g = CellGeometry::cylinder(0.3, 0.3).unwrap();
        let reduced = gamma_b_cell(&g, &Weights::DIPOLE, &hh(), &spec()).unwrap();
        let spec4 = QuadratureSpec {
            max_evaluations: 2_000_000,
            ..QuadratureSpec::four_dim().with_rel_tol(1e-3)
        };
        let est = match gamma_cell_literal(&g, 0.0, &Weights::DIPOLE, &hh(), false, &spec4) {
            Ok(e) => e,
            Err(CbsError::Quadrature(q)) => q.best_estimate().unwrap(),
            Err(e) => panic!("{e}"),
        };
        assert!(
            (est.value - reduced).abs() < 4.0 * est.error + 2e-3 * reduced,
            "{est:?} vs {reduced}"
        );
    }

    #[test]
    fn literal_integrand_needs_finite_cell() {
        let g = CellGeometry::semi_infinite();
        assert!(gamma_cell_quasi_random(&g, 0.0, &Weights::D1, &hh(), false, 64, 1).is_err());
    }

    #[test]
    fn degenerate_map_reproduces_single_points() {
        let grid = GridSpec {
            radii: vec![0.2, 2.0],
            thicknesses: vec![0.5, 3.0],
        };
        let params = MapParams {
            kv_over_gamma: 40.0,
            weights: &Weights::D1,
            channel: &hh(),
            kernel: TransverseKernel::ArcCosine,
            spec: &spec(),
        };
        let map = geometry_map(&grid, &params).unwrap();
        assert_eq!(map.len(), 4);
        for c in &map {
            let g = CellGeometry::cylinder(c.radius, c.thickness).unwrap();
            let single = cell_ratios(&g, 40.0, &Weights::D1, &hh(), &spec()).unwrap();
            assert_eq!(c.ratios.unwrap(), single);
        }
        let mut buf = Vec::new();
        write_map_csv(&map, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("R_over_ell,L_over_ell,gammaC_ratio,gammaB_ratio,amplification\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn failed_cells_are_blank_in_csv() {
        let cells = vec![MapCell {
            radius: 1.0,
            thickness: 2.0,
            ratios: None,
            error: Some("x".into()),
        }];
        let mut buf = Vec::new();
        write_map_csv(&cells, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("1,2,,,\n"));
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert!(CellGeometry::cylinder(0.0, 1.0).is_err());
        assert!(CellGeometry::cylinder(1.0, f64::NAN).is_err());
        assert!(log_space(0.0, 1.0, 3).is_err());
        assert!(GridSpec {
            radii: vec![],
            thicknesses: vec![1.0]
        }
        .validate()
        .is_err());
    }

    #[test]
    fn log_space_end_points() {
        let v = log_space(0.05, 5.0, 20).unwrap();
        assert_eq!(v[0], 0.05);
        assert_eq!(v[19], 5.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}
