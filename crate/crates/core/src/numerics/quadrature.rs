//! Adaptive Gauss–Kronrod quadrature, nested for rectangular domains of up
//! to four dimensions, with a randomised quasi-Monte Carlo fallback.

use std::cell::Cell;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Kronrod abscissae of the 21-point rule on [-1, 1] (non-negative half).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_406,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Weights of the embedded 10-point Gauss rule (at XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of interval bisections per one-dimensional pass.
    pub max_subdivisions: usize,
    /// When set, semi-infinite axes are cut at `lower + truncation_radius`
    /// instead of being mapped onto a finite interval.
    pub truncation_radius: Option<f64>,
    /// Integrand evaluations allowed to a nested rule of dimension ≥ 3
    /// before it falls back to quasi-random sampling.
    pub max_evaluations: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-15,
            max_subdivisions: 2000,
            truncation_radius: None,
            max_evaluations: 50_000_000,
        }
    }
}

impl QuadratureSpec {
    /// Defaults for three- and four-dimensional integrals.
    pub fn four_dim() -> Self {
        QuadratureSpec {
            rel_tol: 1e-4,
            abs_tol: 1e-12,
            ..Self::default()
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_subdivisions > 0
            && self.truncation_radius.is_none_or(|r| r > 0.0);
        if ok {
            Ok(())
        } else {
            Err(QuadratureError::InvalidSpec)
        }
    }

    /// Spec for the inner integrals of a nested rule: ten times tighter.
    pub fn inner(&self) -> Self {
        QuadratureSpec {
            rel_tol: (self.rel_tol * 0.1).max(1e-14),
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }
}

/// An integral value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature did not converge: best estimate {value} ± {error}")]
    NotConverged { value: f64, error: f64 },
    #[error("integrand returned a non-finite value at x = {at}")]
    NonFinite { at: f64 },
    #[error("invalid quadrature tolerances")]
    InvalidSpec,
    #[error("invalid integration domain: {0}")]
    InvalidDomain(String),
}

impl QuadratureError {
    /// Best available estimate, when the failure carried one.
    pub fn best_estimate(&self) -> Option<Estimate> {
        match *self {
            QuadratureError::NotConverged { value, error } => Some(Estimate { value, error }),
            _ => None,
        }
    }
}

/// Upper end of an integration axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Upper {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: Upper,
}

impl Axis {
    pub fn finite(lower: f64, upper: f64) -> Self {
        Axis {
            lower,
            upper: Upper::Finite(upper),
        }
    }

    pub fn semi_infinite(lower: f64) -> Self {
        Axis {
            lower,
            upper: Upper::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel. `f` returns (value, error-of-value); the
/// second component lets nested rules carry inner errors outward.
fn kronrod_panel<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadratureError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let (fc, ec) = f(center);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite { at: center });
    }
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut inner_err = WGK[10] * ec;
    let mut fv = [0.0; 20];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite { at: center - dx });
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite { at: center + dx });
        }
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        inner_err += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    asc *= half.abs();
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    Ok(Segment {
        a,
        b,
        value,
        error: error + inner_err * half.abs(),
    })
}

/// Globally adaptive bisection over the panels delimited by `points`.
fn adaptive<F>(f: &mut F, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let s = kronrod_panel(f, w[0], w[1])?;
            total += s.value;
            total_err += s.error;
            heap.push(s);
        }
    }
    let mut splits = 0;
    while total_err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if splits >= spec.max_subdivisions {
            return Err(QuadratureError::NotConverged {
                value: total,
                error: total_err,
            });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at machine resolution
            return Err(QuadratureError::NotConverged {
                value: total,
                error: total_err,
            });
        }
        let left = kronrod_panel(f, worst.a, mid)?;
        let right = kronrod_panel(f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
    }
    // re-sum to shed the drift of incremental updates
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate { value, error })
}

/// Integrates `f` over [lower, upper] adaptively.
pub fn integrate_1d<F>(mut f: F, lower: f64, upper: Upper, spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    integrate_axis(&mut |x| (f(x), 0.0), Axis { lower, upper }, &[], spec)
}

/// Integrates `f` over [points[0], points[last]], starting from panels split
/// at every supplied point. Use this to place breaks at known features.
pub fn integrate_with_breaks<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    spec.validate()?;
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QuadratureError::InvalidDomain(
            "breakpoints must be sorted and at least two".into(),
        ));
    }
    adaptive(&mut |x| (f(x), 0.0), points, spec)
}

/// Like [`integrate_with_breaks`] for an integrand that is itself an
/// estimate: `f` returns (value, absolute error), and the integrated error
/// is added to the reported error. This is how hand-nested rules pass inner
/// errors outward.
pub fn integrate_estimates<F>(mut f: F, points: &[f64], spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> (f64, f64),
{
    spec.validate()?;
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QuadratureError::InvalidDomain(
            "breakpoints must be sorted and at least two".into(),
        ));
    }
    adaptive(&mut f, points, spec)
}

/// One axis, with the semi-infinite map x = lower + t/(1 − t) (inverse of
/// t = u/(1 + u)) or truncation when requested. `breaks` are interior
/// points in x.
fn integrate_axis<F>(f: &mut F, axis: Axis, breaks: &[f64], spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: FnMut(f64) -> (f64, f64),
{
    let lower = axis.lower;
    match (axis.upper, spec.truncation_radius) {
        (Upper::Finite(upper), _) => {
            if !(upper >= lower) {
                return Err(QuadratureError::InvalidDomain(format!(
                    "upper bound {upper} below lower bound {lower}"
                )));
            }
            let mut pts = vec![lower];
            pts.extend(breaks.iter().copied().filter(|&p| p > lower && p < upper));
            pts.push(upper);
            adaptive(f, &pts, spec)
        }
        (Upper::Infinite, Some(radius)) => integrate_axis(f, Axis::finite(lower, lower + radius), breaks, spec),
        (Upper::Infinite, None) => {
            let mut pts = vec![0.0];
            pts.extend(
                breaks
                    .iter()
                    .filter(|&&p| p > lower)
                    .map(|&p| (p - lower) / (1.0 + p - lower)),
            );
            pts.push(1.0);
            let mut mapped = |t: f64| {
                let one_minus = 1.0 - t;
                let x = lower + t / one_minus;
                let jac = 1.0 / (one_minus * one_minus);
                if !x.is_finite() || !jac.is_finite() {
                    return (0.0, 0.0);
                }
                let (v, e) = f(x);
                (v * jac, e * jac)
            };
            adaptive(&mut mapped, &pts, spec)
        }
    }
}

/// Integrates `f` over a rectangular domain of 1–4 axes, semi-infinite axes
/// allowed. Axes are nested with the first axis outermost.
///
/// For three or more dimensions the nested rule gets
/// `spec.max_evaluations` integrand calls; past that budget the integral is
/// estimated with [`integrate_quasi_random`] and accepted if its error is
/// below 10⁻³ relative.
pub fn integrate<F>(f: F, domain: &[Axis], spec: &QuadratureSpec) -> Result<Estimate, QuadratureError>
where
    F: Fn(&[f64]) -> f64,
{
    spec.validate()?;
    if domain.is_empty() || domain.len() > 4 {
        return Err(QuadratureError::InvalidDomain(format!(
            "{} axes requested, 1 to 4 supported",
            domain.len()
        )));
    }
    let budget = Cell::new(if domain.len() >= 3 {
        spec.max_evaluations
    } else {
        usize::MAX
    });
    let mut point = Vec::with_capacity(domain.len());
    match nested(&f, domain, &mut point, spec, &budget) {
        Err(Nested::Budget) => {
            let est = integrate_quasi_random(&f, domain, 1 << 15, 16, 0x5eed)?;
            let target = 1e-3_f64.max(spec.rel_tol);
            if est.error <= spec.abs_tol.max(target * est.value.abs()) {
                Ok(est)
            } else {
                Err(QuadratureError::NotConverged {
                    value: est.value,
                    error: est.error,
                })
            }
        }
        Err(Nested::Failed(e)) => Err(e),
        Ok(est) => Ok(est),
    }
}

enum Nested {
    Budget,
    Failed(QuadratureError),
}

fn nested<F>(
    f: &F,
    domain: &[Axis],
    point: &mut Vec<f64>,
    spec: &QuadratureSpec,
    budget: &Cell<usize>,
) -> Result<Estimate, Nested>
where
    F: Fn(&[f64]) -> f64,
{
    let depth = point.len();
    let axis = domain[depth];
    let innermost = depth + 1 == domain.len();
    let mut failure: Option<Nested> = None;
    let inner_spec = spec.inner();

    let mut integrand = |x: f64| -> (f64, f64) {
        if failure.is_some() {
            return (0.0, 0.0);
        }
        point.push(x);
        let out = if innermost {
            let left = budget.get();
            if left == 0 {
                failure = Some(Nested::Budget);
                (0.0, 0.0)
            } else {
                budget.set(left - 1);
                (f(point), 0.0)
            }
        } else {
            match nested(f, domain, point, &inner_spec, budget) {
                Ok(e) => (e.value, e.error),
                Err(Nested::Failed(QuadratureError::NotConverged { value, error })) => (value, error),
                Err(other) => {
                    failure = Some(other);
                    (0.0, 0.0)
                }
            }
        };
        point.pop();
        out
    };
    let result = integrate_axis(&mut integrand, axis, &[], spec);
    if let Some(fail) = failure {
        return Err(fail);
    }
    result.map_err(Nested::Failed)
}

const HALTON_PRIMES: [u64; 4] = [2, 3, 5, 7];

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Randomised quasi-Monte Carlo: a Halton point set under `shifts`
/// independent Cranley–Patterson rotations. The error is the standard error
/// of the mean over rotations.
pub fn integrate_quasi_random<F>(
    f: F,
    domain: &[Axis],
    points: usize,
    shifts: usize,
    seed: u64,
) -> Result<Estimate, QuadratureError>
where
    F: Fn(&[f64]) -> f64,
{
    if domain.is_empty() || domain.len() > HALTON_PRIMES.len() || shifts < 2 || points == 0 {
        return Err(QuadratureError::InvalidDomain(
            "quasi-random rule needs 1-4 axes, ≥2 shifts and ≥1 point".into(),
        ));
    }
    let dim = domain.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(shifts);
    let mut x = vec![0.0; dim];
    for _ in 0..shifts {
        let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let mut sum = 0.0;
        for i in 1..=points as u64 {
            let mut weight = 1.0;
            for d in 0..dim {
                let u = (radical_inverse(i, HALTON_PRIMES[d]) + shift[d]).fract();
                let axis = domain[d];
                match axis.upper {
                    Upper::Finite(b) => {
                        x[d] = axis.lower + u * (b - axis.lower);
                        weight *= b - axis.lower;
                    }
                    Upper::Infinite => {
                        let one_minus = 1.0 - u;
                        x[d] = axis.lower + u / one_minus;
                        weight /= one_minus * one_minus;
                    }
                }
            }
            let v = f(&x) * weight;
            if v.is_finite() {
                sum += v;
            }
        }
        means.push(sum / points as f64);
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value: mean,
        error: (var / n).sqrt(),
    })
}
