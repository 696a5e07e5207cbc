//! Single-atom and effective-medium quantities.
//!
//! Frequencies are in units of the linewidth Γ and densities are given as
//! ρk⁻³. The wavenumber k is carried explicitly so that lengths can be
//! reported in physical units when k ≠ 1.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CbsError, Result};

/// An angular momentum restricted to integers and half-integers, stored as
/// twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfInt(u32);

impl HalfInt {
    pub const fn from_twice(twice: u32) -> Self {
        HalfInt(twice)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// 2J + 1
    pub fn multiplicity(self) -> u32 {
        self.0 + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Zeeman-average weights (w₁, w₂, w₃) of a J → Jₑ transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Weights {
    pub const fn new(w1: f64, w2: f64, w3: f64) -> Self {
        Weights { w1, w2, w3 }
    }

    /// J = 0 → Jₑ = 1: a classical isotropic dipole.
    pub const DIPOLE: Weights = Weights::new(1.0, 0.0, 0.0);
    /// Alkali D1 line, J = 1/2 → Jₑ = 1/2.
    pub const D1: Weights = Weights::new(1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0);
    /// Alkali D2 line, J = 1/2 → Jₑ = 3/2.
    pub const D2: Weights = Weights::new(2.0 / 3.0, -1.0 / 6.0, 1.0 / 6.0);

    pub fn is_finite(&self) -> bool {
        self.w1.is_finite() && self.w2.is_finite() && self.w3.is_finite()
    }
}

/// An atomic two-level transition with Zeeman-degenerate ground and
/// excited states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub ground: HalfInt,
    pub excited: HalfInt,
    /// Natural linewidth Γ in rad/s.
    pub gamma: f64,
    pub weights: Weights,
    /// Ground-state hyperfine splitting Δ in units of Γ, if relevant.
    pub hyperfine_splitting: Option<f64>,
}

impl Transition {
    pub fn new(ground: HalfInt, excited: HalfInt, gamma: f64, weights: Weights) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(CbsError::invalid("gamma", "linewidth must be positive"));
        }
        if !weights.is_finite() {
            return Err(CbsError::invalid("weights", "weights must be finite"));
        }
        if ground.twice() % 2 != excited.twice() % 2 {
            return Err(CbsError::invalid(
                "excited",
                "J and Jₑ must both be integers or both half-integers",
            ));
        }
        Ok(Transition {
            ground,
            excited,
            gamma,
            weights,
            hyperfine_splitting: None,
        })
    }

    pub fn with_hyperfine_splitting(mut self, delta_hf: f64) -> Self {
        self.hyperfine_splitting = Some(delta_hf);
        self
    }

    /// J = 0 → Jₑ = 1, Γ normalised to one.
    pub fn dipole() -> Self {
        Self::new(HalfInt::from_twice(0), HalfInt::from_twice(2), 1.0, Weights::DIPOLE).unwrap()
    }

    pub fn d1() -> Self {
        Self::new(HalfInt::from_twice(1), HalfInt::from_twice(1), 1.0, Weights::D1).unwrap()
    }

    pub fn d2() -> Self {
        Self::new(HalfInt::from_twice(1), HalfInt::from_twice(3), 1.0, Weights::D2).unwrap()
    }

    /// Looks up a tabulated transition by name (`dipole`, `d1`, `d2`).
    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "dipole" | "j0-1" | "0-1" => Some(Self::dipole()),
            "d1" => Some(Self::d1()),
            "d2" => Some(Self::d2()),
            _ => None,
        }
    }

    /// Ratio of level multiplicities M_J = (2Jₑ + 1) / (3(2J + 1)).
    pub fn multiplicity_ratio(&self) -> f64 {
        self.excited.multiplicity() as f64 / (3.0 * self.ground.multiplicity() as f64)
    }
}

/// Bulk parameters of the vapour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VaporParams {
    /// ρk⁻³
    pub density: f64,
    /// δ / Γ
    pub detuning: f64,
    /// kv̄ / Γ, with v̄ the one-dimensional rms speed.
    pub kv_over_gamma: f64,
    /// Reference wavenumber k.
    pub wavenumber: f64,
}

impl VaporParams {
    pub fn new(density: f64, detuning: f64, kv_over_gamma: f64) -> Result<Self> {
        let p = VaporParams {
            density,
            detuning,
            kv_over_gamma,
            wavenumber: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Chooses the density that yields a prescribed scalar kℓ at detuning δ.
    pub fn from_k_ell(k_ell: f64, detuning: f64, kv_over_gamma: f64) -> Result<Self> {
        if !(k_ell > 0.0) {
            return Err(CbsError::invalid("k_ell", "must be positive"));
        }
        let lorentz = 0.25 / (detuning * detuning + 0.25);
        Self::new(1.0 / (4.0 * PI * k_ell * lorentz), detuning, kv_over_gamma)
    }

    pub fn with_wavenumber(mut self, k: f64) -> Result<Self> {
        self.wavenumber = k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density > 0.0) || !self.density.is_finite() {
            return Err(CbsError::invalid("density", "ρk⁻³ must be positive and finite"));
        }
        if !self.detuning.is_finite() {
            return Err(CbsError::invalid("detuning", "must be finite"));
        }
        if !(self.kv_over_gamma >= 0.0) || !self.kv_over_gamma.is_finite() {
            return Err(CbsError::invalid("kv_over_gamma", "must be finite and ≥ 0"));
        }
        if !(self.wavenumber > 0.0) || !self.wavenumber.is_finite() {
            return Err(CbsError::invalid("wavenumber", "must be positive"));
        }
        Ok(())
    }

    /// (Γ/2)² / (δ² + (Γ/2)²)
    fn lorentzian(&self) -> f64 {
        0.25 / (self.detuning * self.detuning + 0.25)
    }

    /// Dimensionless kℓ of the medium.
    pub fn k_ell(&self, transition: Option<&Transition>) -> f64 {
        mean_free_path(self, transition) * self.wavenumber
    }
}

/// Whether light is treated as a scalar wave on classical dipoles or as a
/// vector wave on a degenerate transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatteringKind {
    Scalar,
    Vector,
}

/// Single-atom scattering amplitude t(ω) = (c/k)(Γ/2)/(δ + iΓ/2) with
/// c = 4π (scalar) or 6π (vector). `delta` and `gamma` share units.
pub fn t_matrix(delta: f64, gamma: f64, k: f64, kind: ScatteringKind) -> Complex64 {
    let prefactor = match kind {
        ScatteringKind::Scalar => 4.0 * PI,
        ScatteringKind::Vector => 6.0 * PI,
    } / k;
    let half = 0.5 * gamma;
    Complex64::new(prefactor * half, 0.0) / Complex64::new(delta, half)
}

/// Extinction mean free path ℓ in units of 1/k₀ where k₀ = 1 (i.e. physical
/// length if `vapor.wavenumber` is in inverse length units).
///
/// With a transition the vector cross section M_J·6π/k² replaces 4π/k².
pub fn mean_free_path(vapor: &VaporParams, transition: Option<&Transition>) -> f64 {
    let k = vapor.wavenumber;
    let rho = vapor.density * k * k * k;
    let cross_section = match transition {
        None => 4.0 * PI / (k * k),
        Some(t) => t.multiplicity_ratio() * 6.0 * PI / (k * k),
    };
    1.0 / (rho * cross_section * vapor.lorentzian())
}

/// Refractive index n = 1 − (2πρ/k³) δ(Γ/2) / (δ² + (Γ/2)²).
pub fn refractive_index(vapor: &VaporParams) -> f64 {
    let d = vapor.detuning;
    1.0 - 2.0 * PI * vapor.density * d * 0.5 / (d * d + 0.25)
}

/// Large-detuning group-delay factor ∂k/∂ω ≃ πρΓ/(k²δ²), in units of k/Γ.
pub fn dk_domega(vapor: &VaporParams) -> f64 {
    let d = vapor.detuning;
    PI * vapor.density * vapor.wavenumber / (d * d)
}

/// Default ratio above which a "≫" condition counts as satisfied.
pub const DEFAULT_MUCH_GREATER: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCondition {
    pub condition: String,
    pub satisfied: bool,
    pub ratio: f64,
}

/// Outcome of checking the |δ| ≫ kv̄ ≫ Γ (and |δ| ≫ Δ) chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub threshold: f64,
    pub entries: Vec<RegimeCondition>,
}

impl RegimeReport {
    pub fn all_satisfied(&self) -> bool {
        self.entries.iter().all(|e| e.satisfied)
    }

    pub fn get(&self, condition: &str) -> Option<&RegimeCondition> {
        self.entries.iter().find(|e| e.condition == condition)
    }
}

pub fn regime_check(vapor: &VaporParams, transition: &Transition) -> RegimeReport {
    regime_check_with(vapor, transition, DEFAULT_MUCH_GREATER)
}

pub fn regime_check_with(vapor: &VaporParams, transition: &Transition, threshold: f64) -> RegimeReport {
    let ratio = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
    let mut entries = vec![
        ("|δ| ≫ kv̄", ratio(vapor.detuning.abs(), vapor.kv_over_gamma)),
        ("kv̄ ≫ Γ", vapor.kv_over_gamma),
    ];
    if let Some(hf) = transition.hyperfine_splitting {
        entries.push(("|δ| ≫ Δ", ratio(vapor.detuning.abs(), hf.abs())));
    }
    RegimeReport {
        threshold,
        entries: entries
            .into_iter()
            .map(|(c, r)| RegimeCondition {
                condition: c.to_string(),
                satisfied: r > threshold,
                ratio: r,
            })
            .collect(),
    }
}
