//! Flat TOML run configuration.
//!
//! Every key is optional in the file. Each subcommand accepts a fixed set
//! of keys and fills the ones left out from its defaults; a key that the
//! subcommand does not use is rejected rather than silently ignored. The
//! resolved configuration is echoed into every output file and can be fed
//! back through `--config` to reproduce it.

use hotcbs::geometry::log_space;
use hotcbs::{
    CellGeometry, ChannelPreset, Estimator, Extent, PolarizationChannel, QuadratureSpec, Transition, TransverseKernel,
};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_over_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_ell: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtheta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtheta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtheta_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<TransverseKernel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thickness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_tau_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_tau_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_tau_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cold_max_order: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chunk_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<Estimator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,
}

/// The subcommands that share this configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fig2,
    Fig3,
    Fig4,
    Cold,
    Contrast,
    Mc,
    GeometryMap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Cold => "cold",
            Command::Contrast => "contrast",
            Command::Mc => "mc",
            Command::GeometryMap => "geometry-map",
        }
    }

    /// Accepted keys with their defaults; `None` marks an optional key
    /// without a default.
    fn keys(self) -> Vec<(&'static str, Option<Value>)> {
        let f = |v: f64| Some(Value::Float(v));
        let i = |v: i64| Some(Value::Integer(v));
        let s = |v: &str| Some(Value::String(v.to_owned()));
        let quadrature = vec![
            ("rel_tolerance", f(1e-8)),
            ("abs_tolerance", f(1e-15)),
            ("max_subdivisions", i(2000)),
        ];
        let transport = |samples: i64| {
            vec![
                ("samples", i(samples)),
                ("seed", i(1)),
                ("threads", i(0)),
                ("chunk_size", i(hotcbs::mc::DEFAULT_CHUNK as i64)),
                ("estimator", s("analytic-velocity-average")),
            ]
        };
        let map = vec![
            ("kv_over_gamma", f(40.0)),
            ("transition", s("d1")),
            ("channel", s("h-par-h")),
            ("kernel", s("arc_cosine")),
            ("map_min", f(0.05)),
            ("map_max", f(5.0)),
            ("map_points", i(20)),
            ("threads", i(0)),
        ];
        match self {
            Command::Fig2 => {
                let mut k = vec![
                    ("kv_min", f(0.1)),
                    ("kv_max", f(100.0)),
                    ("kv_points", i(13)),
                    ("detuning", f(50.0)),
                    ("k_ell", f(1e4)),
                ];
                k.extend(transport(1_000_000));
                k.extend(quadrature);
                k
            }
            Command::Fig3 => {
                let mut k = vec![
                    ("kv_over_gamma", f(10.0)),
                    ("detuning", f(50.0)),
                    ("k_ell", f(1e4)),
                    ("dtheta_max", f(0.01)),
                    ("dtheta_points", i(41)),
                ];
                k.extend(transport(2_000_000));
                k.extend(quadrature);
                k
            }
            Command::Fig4 | Command::GeometryMap => {
                let mut k = map;
                k.extend(quadrature);
                k
            }
            Command::Cold => vec![
                ("kv_tau", None),
                ("kv_tau_min", f(1e-6)),
                ("kv_tau_max", f(1.0)),
                ("kv_tau_points", i(25)),
                ("cold_max_order", i(hotcbs::cold::DEFAULT_MAX_ORDER as i64)),
            ],
            Command::Contrast => {
                let mut k = vec![
                    ("transition", s("d1")),
                    ("channel", s("h-par-h")),
                    ("kv_over_gamma", f(0.0)),
                    ("k_ell", f(1e4)),
                    ("dtheta", Some(Value::Array(vec![Value::Float(0.0)]))),
                ];
                k.extend(quadrature);
                k
            }
            Command::Mc => {
                let mut k = vec![
                    ("kv_over_gamma", f(10.0)),
                    ("detuning", f(50.0)),
                    ("k_ell", f(1e4)),
                    ("radius", None),
                    ("thickness", None),
                    ("dtheta", Some(Value::Array(vec![Value::Float(0.0)]))),
                    ("max_order", i(3)),
                ];
                k.extend(transport(1_000_000));
                k
            }
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat configuration always serialises")
    }

    /// Checks the keys against `command` and fills in its defaults.
    pub fn resolve(&self, command: Command) -> Result<Self, CliError> {
        let mut table = Table::try_from(self).expect("flat configuration always serialises");
        let keys = command.keys();
        for key in table.keys() {
            if !keys.iter().any(|(k, _)| k == key) {
                let accepted: Vec<&str> = keys.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Validation(format!(
                    "`{key}` is not used by `{}`; accepted keys: {}",
                    command.name(),
                    accepted.join(", ")
                )));
            }
        }
        if command == Command::Cold && table.contains_key("kv_tau") {
            for grid_key in ["kv_tau_min", "kv_tau_max", "kv_tau_points"] {
                if table.contains_key(grid_key) {
                    return Err(CliError::Validation(format!(
                        "`kv_tau` selects a single value and cannot be combined with `{grid_key}`"
                    )));
                }
            }
        }
        for (key, default) in keys {
            let single_cold = command == Command::Cold && table.contains_key("kv_tau") && key.starts_with("kv_tau_");
            if let Some(value) = default {
                if !single_cold {
                    table.entry(key).or_insert(value);
                }
            }
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config: {}", e.message())))
    }

    /// Fetches a key that `resolve` guarantees to be present.
    pub fn need<T: Clone>(value: &Option<T>, key: &str) -> Result<T, CliError> {
        value
            .clone()
            .ok_or_else(|| CliError::Validation(format!("missing `{key}`")))
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let spec = QuadratureSpec {
            rel_tol: Self::need(&self.rel_tolerance, "rel_tolerance")?,
            abs_tol: Self::need(&self.abs_tolerance, "abs_tolerance")?,
            max_subdivisions: Self::need(&self.max_subdivisions, "max_subdivisions")?,
            ..QuadratureSpec::default()
        };
        spec.validate()
            .map_err(|_| CliError::Validation("tolerances and max_subdivisions must be positive".into()))?;
        Ok(spec)
    }

    pub fn kv_grid(&self) -> Result<Vec<f64>, CliError> {
        grid("kv", self.kv_min, self.kv_max, self.kv_points)
    }

    pub fn map_axis(&self) -> Result<Vec<f64>, CliError> {
        grid("map", self.map_min, self.map_max, self.map_points)
    }

    pub fn kv_tau_values(&self) -> Result<Vec<f64>, CliError> {
        match self.kv_tau {
            Some(v) => Ok(vec![v]),
            None => grid("kv_tau", self.kv_tau_min, self.kv_tau_max, self.kv_tau_points),
        }
    }

    /// `dtheta_points` evenly spaced angles from 0 to `dtheta_max`.
    pub fn dtheta_grid(&self) -> Result<Vec<f64>, CliError> {
        let max = Self::need(&self.dtheta_max, "dtheta_max")?;
        let n = Self::need(&self.dtheta_points, "dtheta_points")?;
        if !(max.is_finite() && max > 0.0) || n < 2 {
            return Err(CliError::Validation("need dtheta_max > 0 and dtheta_points ≥ 2".into()));
        }
        Ok((0..n).map(|i| max * i as f64 / (n - 1) as f64).collect())
    }

    pub fn transition(&self) -> Result<Transition, CliError> {
        let name = Self::need(&self.transition, "transition")?;
        Transition::by_name(&name)
            .ok_or_else(|| CliError::Validation(format!("unknown transition `{name}` (expected dipole, d1 or d2)")))
    }

    pub fn channel(&self) -> Result<PolarizationChannel, CliError> {
        let name = Self::need(&self.channel, "channel")?;
        let preset: ChannelPreset = name.parse()?;
        Ok(PolarizationChannel::preset(preset)?)
    }

    /// Cell geometry; an absent radius or thickness is unbounded.
    pub fn geometry(&self) -> Result<CellGeometry, CliError> {
        let extent = |v: Option<f64>| v.map_or(Extent::Infinite, Extent::Finite);
        let geometry = CellGeometry {
            radius: extent(self.radius),
            thickness: extent(self.thickness),
            kernel: self.kernel.unwrap_or_default(),
        };
        geometry.validate()?;
        Ok(geometry)
    }
}

fn grid(name: &str, min: Option<f64>, max: Option<f64>, n: Option<usize>) -> Result<Vec<f64>, CliError> {
    let (min, max, n) = match (min, max, n) {
        (Some(a), Some(b), Some(n)) => (a, b, n),
        _ => {
            return Err(CliError::Validation(format!(
                "missing `{name}_min`, `{name}_max` or `{name}_points`"
            )))
        }
    };
    log_space(min, max, n).map_err(|_| {
        CliError::Validation(format!(
            "`{name}_min`..`{name}_max` must satisfy 0 < min ≤ max with `{name}_points` ≥ 1 (got {min}..{max}, {n})"
        ))
    })
}
