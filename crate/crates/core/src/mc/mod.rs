//! Monte Carlo transport of scalar light through the vapour with tallies
//! per scattering order.
//!
//! Every launched photon enters at an Exp(1) depth and performs an
//! isotropic random walk with Exp(1) steps until it leaves the medium or
//! reaches the maximum order. Each prefix of n atoms is an order-n
//! sequence detected along −z with weight e^{−z_n}; its time-reversed
//! partner adds the coherent tally weight·cos(Δφ).
//!
//! Samples are processed in fixed-size chunks, chunk i drawing from
//! ChaCha8 stream i of the seed, and chunk tallies are merged in index
//! order. Results are therefore bit-identical for any thread count.

mod path;
mod tally;
mod vec3;

pub use path::{group_delay_factor, path_dephasing, sample_path, velocity_coefficients, Path};
pub use tally::{MeanError, OrderTally, Tally};
pub use vec3::Vec3;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CbsError, Result};
use crate::geometry::CellGeometry;
use crate::physics::VaporParams;

/// How the Maxwell–Boltzmann velocity average enters the coherent tally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    /// Weight cos(Δφ_geometric)·exp(−Var[Δφ_velocity]/2): the exact
    /// Gaussian average, since the phase is linear in the velocities.
    #[default]
    AnalyticVelocityAverage,
    /// One velocity draw per atom and weight cos(Δφ).
    ExplicitVelocitySampling,
}

impl std::str::FromStr for Estimator {
    type Err = CbsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic-velocity-average" | "analytic" => Ok(Estimator::AnalyticVelocityAverage),
            "explicit-velocity-sampling" | "explicit" => Ok(Estimator::ExplicitVelocitySampling),
            other => Err(CbsError::invalid(
                "estimator",
                format!(
                    "unknown estimator `{other}` (expected analytic-velocity-average or explicit-velocity-sampling)"
                ),
            )),
        }
    }
}

/// Default number of photons per random-number stream.
pub const DEFAULT_CHUNK: u64 = 4096;

/// Highest order accepted by [`McConfig::validate`].
pub const MAX_ORDER_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    /// Number of launched photons.
    pub samples: u64,
    pub max_order: usize,
    pub estimator: Estimator,
    /// Detection angles from exact backscattering, radians, ascending.
    pub dtheta: Vec<f64>,
    pub geometry: CellGeometry,
    pub vapor: VaporParams,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
    /// Photons per random-number stream.
    pub chunk_size: u64,
}

impl McConfig {
    /// Semi-infinite medium with the density chosen to give `k_ell` at
    /// `detuning`; one angle (exact backscattering), orders up to 3.
    /// Invalid inputs surface from [`McConfig::validate`].
    pub fn scalar_semi_infinite(kv_over_gamma: f64, detuning: f64, k_ell: f64) -> Self {
        let lorentz = 0.25 / (detuning * detuning + 0.25);
        McConfig {
            seed: 1,
            samples: 1_000_000,
            max_order: 3,
            estimator: Estimator::default(),
            dtheta: vec![0.0],
            geometry: CellGeometry::semi_infinite(),
            vapor: VaporParams {
                density: 1.0 / (4.0 * std::f64::consts::PI * k_ell * lorentz),
                detuning,
                kv_over_gamma,
                wavenumber: 1.0,
            },
            threads: 0,
            chunk_size: DEFAULT_CHUNK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(CbsError::invalid("samples", "must be positive"));
        }
        if self.max_order == 0 || self.max_order > MAX_ORDER_LIMIT {
            return Err(CbsError::invalid(
                "max_order",
                format!("must be between 1 and {MAX_ORDER_LIMIT}"),
            ));
        }
        if self.chunk_size == 0 {
            return Err(CbsError::invalid("chunk_size", "must be positive"));
        }
        if self.dtheta.is_empty() {
            return Err(CbsError::invalid("dtheta", "needs at least one angle"));
        }
        if self.dtheta.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(CbsError::invalid("dtheta", "angles must be finite and non-negative"));
        }
        if self.dtheta.windows(2).any(|w| w[1] < w[0]) {
            return Err(CbsError::invalid("dtheta", "angles must be sorted ascending"));
        }
        self.geometry.validate()?;
        self.vapor.validate()
    }
}

/// Quantities fixed for a whole run.
struct RunContext {
    reduced_angles: Vec<f64>,
    /// a·κ: standard deviation of the velocity phase per unit |A|.
    velocity_scale: f64,
    estimator: Estimator,
    max_order: usize,
    geometry: CellGeometry,
}

impl RunContext {
    fn new(config: &McConfig) -> Self {
        let k_ell = config.vapor.k_ell(None);
        RunContext {
            reduced_angles: config.dtheta.iter().map(|t| k_ell * t).collect(),
            velocity_scale: config.vapor.kv_over_gamma * group_delay_factor(&config.vapor),
            estimator: config.estimator,
            max_order: config.max_order,
            geometry: config.geometry,
        }
    }

    fn run_chunk(&self, seed: u64, index: u64, count: u64) -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut tally = Tally::new(self.max_order, self.reduced_angles.len());
        let mut atoms = Vec::with_capacity(self.max_order);
        let mut dirs = Vec::with_capacity(self.max_order);
        let mut lengths = Vec::with_capacity(self.max_order);
        let mut velocities = Vec::with_capacity(self.max_order);
        for _ in 0..count {
            tally.samples += 1;
            atoms.clear();
            dirs.clear();
            lengths.clear();
            velocities.clear();
            let Some(first) = path::first_atom(&self.geometry, &mut rng) else {
                continue;
            };
            atoms.push(first);
            dirs.push(Vec3::Z);
            loop {
                if self.estimator == Estimator::ExplicitVelocitySampling {
                    velocities.push(self.draw_velocity(&mut rng));
                }
                self.score(&mut tally, &atoms, &dirs, &lengths, &velocities);
                if atoms.len() == self.max_order {
                    break;
                }
                let (dir, len, next) = path::next_atom(atoms[atoms.len() - 1], &self.geometry, &mut rng);
                let Some(next) = next else { break };
                atoms.push(next);
                dirs.push(dir);
                lengths.push(len);
            }
        }
        tally
    }

    /// Reduced velocity scaled by κ, so its dot product with A is a phase.
    fn draw_velocity<R: Rng>(&self, rng: &mut R) -> Vec3 {
        let g = |rng: &mut R| -> f64 { rng.sample(StandardNormal) };
        Vec3::new(g(rng), g(rng), g(rng)) * self.velocity_scale
    }

    fn score(&self, tally: &mut Tally, atoms: &[Vec3], dirs: &[Vec3], lengths: &[f64], velocities: &[Vec3]) {
        let n = atoms.len();
        let last = atoms[n - 1];
        let w = (-last.z).exp();
        let t = &mut tally.orders[n - 1];
        t.incoherent += w;
        t.incoherent_sq += w * w;
        if n < 2 {
            return;
        }
        let coeffs = path::coefficients(atoms, dirs, lengths);
        let (damping, velocity_phase) = match self.estimator {
            Estimator::AnalyticVelocityAverage => {
                let s: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
                ((-0.5 * self.velocity_scale * self.velocity_scale * s).exp(), 0.0)
            }
            Estimator::ExplicitVelocitySampling => (1.0, coeffs.iter().zip(velocities).map(|(a, u)| a.dot(*u)).sum()),
        };
        let dx = atoms[0].x - last.x;
        for (j, q) in self.reduced_angles.iter().enumerate() {
            let c = w * damping * (q * dx + velocity_phase).cos();
            t.coherent[j] += c;
            t.coherent_sq[j] += c * c;
            t.cross[j] += w * c;
        }
    }
}

/// Runs the transport and returns the merged tally.
pub fn run_tally(config: &McConfig) -> Result<Tally> {
    config.validate()?;
    let ctx = RunContext::new(config);
    let chunks = config.samples.div_ceil(config.chunk_size);
    let work = || -> Vec<Tally> {
        (0..chunks)
            .into_par_iter()
            .map(|i| {
                let count = config.chunk_size.min(config.samples - i * config.chunk_size);
                ctx.run_chunk(config.seed, i, count)
            })
            .collect()
    };
    let parts = if config.threads == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| CbsError::invalid("threads", e.to_string()))?
            .install(work)
    };
    let mut total = Tally::new(config.max_order, config.dtheta.len());
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub dtheta: f64,
    #[serde(rename = "gammaC")]
    pub gamma_c: f64,
    #[serde(rename = "gammaC_err")]
    pub gamma_c_err: f64,
    /// γ_C/γ_B of the same order.
    pub contrast: f64,
    pub contrast_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderResult {
    #[serde(rename = "N")]
    pub order: usize,
    #[serde(rename = "gammaB")]
    pub gamma_b: f64,
    #[serde(rename = "gammaB_err")]
    pub gamma_b_err: f64,
    /// Empty for single scattering, which has no reversed partner.
    pub profile: Vec<ProfilePoint>,
}

/// Per-order bistatic coefficients of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistaticResult {
    pub params: McConfig,
    pub seed: u64,
    pub per_order: Vec<OrderResult>,
}

impl BistaticResult {
    pub fn from_tally(config: &McConfig, tally: &Tally) -> Self {
        let per_order = (1..=config.max_order)
            .map(|n| {
                let b = tally.incoherent(n);
                let profile = if n < 2 {
                    Vec::new()
                } else {
                    config
                        .dtheta
                        .iter()
                        .enumerate()
                        .map(|(j, &dtheta)| {
                            let c = tally.coherent(n, j);
                            let r = tally.contrast(n, j);
                            ProfilePoint {
                                dtheta,
                                gamma_c: c.mean,
                                gamma_c_err: c.error,
                                contrast: r.mean,
                                contrast_err: r.error,
                            }
                        })
                        .collect()
                };
                OrderResult {
                    order: n,
                    gamma_b: b.mean,
                    gamma_b_err: b.error,
                    profile,
                }
            })
            .collect();
        BistaticResult {
            params: config.clone(),
            seed: config.seed,
            per_order,
        }
    }

    pub fn order(&self, n: usize) -> Option<&OrderResult> {
        self.per_order.iter().find(|o| o.order == n)
    }
}

/// Runs the transport and summarises it per order.
pub fn run(config: &McConfig) -> Result<BistaticResult> {
    let tally = run_tally(config)?;
    Ok(BistaticResult::from_tally(config, &tally))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn config(kv: f64, samples: u64) -> McConfig {
        let mut c = McConfig::scalar_semi_infinite(kv, 50.0, 1e4);
        c.samples = samples;
        c
    }

    #[test]
    fn double_scattering_background_is_half_ln2() {
        let r = run(&config(0.0, 400_000)).unwrap();
        let b = r.order(2).unwrap();
        assert!((b.gamma_b - 0.5 * LN_2).abs() < 3.5 * b.gamma_b_err, "{b:?}");
    }

    #[test]
    fn single_scattering_background_is_half() {
        // E[e^{−2z}] over the entry depth: 1/2.
        let r = run(&config(0.0, 200_000)).unwrap();
        let s = r.order(1).unwrap();
        assert!((s.gamma_b - 0.5).abs() < 3.5 * s.gamma_b_err);
        assert!(s.profile.is_empty());
    }

    #[test]
    fn zero_temperature_coherent_equals_background() {
        let r = run(&config(0.0, 50_000)).unwrap();
        for n in 2..=3 {
            let o = r.order(n).unwrap();
            assert!((o.profile[0].gamma_c - o.gamma_b).abs() < 1e-12 * o.gamma_b);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let mut c = config(10.0, 60_000);
        c.chunk_size = 1000;
        c.dtheta = vec![0.0, 1e-3];
        let one = {
            c.threads = 1;
            run_tally(&c).unwrap()
        };
        for threads in [2, 4, 7] {
            c.threads = threads;
            assert_eq!(run_tally(&c).unwrap(), one);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = config(10.0, 10_000);
        let b = run_tally(&a).unwrap();
        a.seed += 1;
        assert_ne!(run_tally(&a).unwrap(), b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let good = config(1.0, 10);
        type Edit = Box<dyn Fn(&mut McConfig)>;
        let cases: Vec<Edit> = vec![
            Box::new(|c| c.samples = 0),
            Box::new(|c| c.max_order = 0),
            Box::new(|c| c.chunk_size = 0),
            Box::new(|c| c.dtheta = vec![]),
            Box::new(|c| c.dtheta = vec![1e-3, 0.0]),
            Box::new(|c| c.dtheta = vec![-1e-3]),
            Box::new(|c| c.vapor.density = -1.0),
        ];
        for mutate in cases {
            let mut c = good.clone();
            mutate(&mut c);
            assert!(run(&c).is_err());
        }
        assert!(run(&good).is_ok());
    }

    #[test]
    fn json_schema_field_names() {
        let r = run(&config(1.0, 1000)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert!(v.get("params").is_some());
        assert_eq!(v["seed"], 1);
        let o = &v["per_order"][1];
        assert_eq!(o["N"], 2);
        assert!(o["gammaB"].is_number() && o["gammaB_err"].is_number());
        let p = &o["profile"][0];
        assert!(p["dtheta"].is_number() && p["gammaC"].is_number() && p["gammaC_err"].is_number());
        let back: BistaticResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn estimator_names_parse() {
        assert_eq!(
            "analytic".parse::<Estimator>().unwrap(),
            Estimator::AnalyticVelocityAverage
        );
        assert_eq!(
            "explicit-velocity-sampling".parse::<Estimator>().unwrap(),
            Estimator::ExplicitVelocitySampling
        );
        assert!("exact".parse::<Estimator>().is_err());
    }
}
