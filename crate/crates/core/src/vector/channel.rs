//! Polarisation vectors and detection channels.
//!
//! Channels live in the exact-backscattering frame: light enters along +z
//! and is detected along −z.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CbsError, Result};

/// Complex unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarization([Complex64; 3]);

const UNIT_TOLERANCE: f64 = 1e-12;

impl Polarization {
    /// Checks ε*·ε = 1.
    pub fn new(components: [Complex64; 3]) -> Result<Self> {
        let norm2: f64 = components.iter().map(|c| c.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > UNIT_TOLERANCE {
            return Err(CbsError::invalid("polarization", format!("ε*·ε = {norm2}, expected 1")));
        }
        Ok(Polarization(components))
    }

    /// Rescales any non-zero vector to unit norm.
    pub fn normalized(components: [Complex64; 3]) -> Result<Self> {
        let norm: f64 = components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(CbsError::invalid("polarization", "cannot normalise a zero vector"));
        }
        Ok(Polarization(components.map(|c| c / norm)))
    }

    pub fn linear_x() -> Self {
        Polarization([
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
    }

    pub fn linear_y() -> Self {
        Polarization([
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
    }

    /// (x̂ + iŷ)/√2.
    pub fn circular_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Polarization([Complex64::new(h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, 0.0)])
    }

    pub fn components(&self) -> &[Complex64; 3] {
        &self.0
    }

    pub fn conj(&self) -> Self {
        Polarization(self.0.map(|c| c.conj()))
    }

    /// Rotation by `angle` about the z axis.
    pub fn rotated_about_z(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let [x, y, z] = self.0;
        Polarization([x * c - y * s, x * s + y * c, z])
    }
}

/// Bilinear (unconjugated) product a·b.
pub(crate) fn dot(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Named detection channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelPreset {
    /// Circular in, same helicity detected (h∥h).
    HelicityPreserving,
    /// Circular in, opposite helicity detected (h⊥h).
    HelicityFlipping,
    /// Linear in, parallel linear detected (lin∥lin).
    LinearParallel,
    /// Linear in, crossed linear detected (lin⊥lin).
    LinearPerpendicular,
    Custom,
}

impl ChannelPreset {
    pub const NAMED: [ChannelPreset; 4] = [
        ChannelPreset::HelicityPreserving,
        ChannelPreset::HelicityFlipping,
        ChannelPreset::LinearParallel,
        ChannelPreset::LinearPerpendicular,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelPreset::HelicityPreserving => "h-par-h",
            ChannelPreset::HelicityFlipping => "h-perp-h",
            ChannelPreset::LinearParallel => "lin-par-lin",
            ChannelPreset::LinearPerpendicular => "lin-perp-lin",
            ChannelPreset::Custom => "custom",
        }
    }
}

impl fmt::Display for ChannelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelPreset {
    type Err = CbsError;

    fn from_str(s: &str) -> Result<Self> {
        let preset = match s.trim().to_ascii_lowercase().as_str() {
            "h-par-h" | "h∥h" | "h||h" | "helicity-preserving" => ChannelPreset::HelicityPreserving,
            "h-perp-h" | "h⊥h" | "helicity-flipping" => ChannelPreset::HelicityFlipping,
            "lin-par-lin" | "lin∥lin" | "lin||lin" => ChannelPreset::LinearParallel,
            "lin-perp-lin" | "lin⊥lin" => ChannelPreset::LinearPerpendicular,
            "custom" => ChannelPreset::Custom,
            other => {
                return Err(CbsError::invalid(
                    "channel",
                    format!("unknown channel `{other}` (expected h-par-h, h-perp-h, lin-par-lin or lin-perp-lin)"),
                ))
            }
        };
        Ok(preset)
    }
}

impl Serialize for ChannelPreset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ChannelPreset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Incident polarisation ε and detected polarisation ε′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationChannel {
    pub incident: Polarization,
    pub detected: Polarization,
    pub preset: ChannelPreset,
}

impl PolarizationChannel {
    pub fn preset(preset: ChannelPreset) -> Result<Self> {
        let (incident, detected) = match preset {
            ChannelPreset::HelicityPreserving => (Polarization::circular_plus(), Polarization::circular_plus().conj()),
            ChannelPreset::HelicityFlipping => (Polarization::circular_plus(), Polarization::circular_plus()),
            ChannelPreset::LinearParallel => (Polarization::linear_x(), Polarization::linear_x()),
            ChannelPreset::LinearPerpendicular => (Polarization::linear_x(), Polarization::linear_y()),
            ChannelPreset::Custom => {
                return Err(CbsError::invalid(
                    "channel",
                    "a custom channel needs explicit polarisation vectors",
                ))
            }
        };
        Ok(PolarizationChannel {
            incident,
            detected,
            preset,
        })
    }

    pub fn custom(incident: Polarization, detected: Polarization) -> Self {
        PolarizationChannel {
            incident,
            detected,
            preset: ChannelPreset::Custom,
        }
    }

    pub fn helicity_preserving() -> Self {
        Self::preset(ChannelPreset::HelicityPreserving).expect("named preset")
    }

    /// Both polarisations rotated by `angle` about the optical axis.
    pub fn rotated_about_z(&self, angle: f64) -> Self {
        PolarizationChannel {
            incident: self.incident.rotated_about_z(angle),
            detected: self.detected.rotated_about_z(angle),
            preset: ChannelPreset::Custom,
        }
    }
}
