//! Bessel, gamma and zeta functions on the real line.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{CbsError, Result};

/// Below this argument J₀ is evaluated by Miller's backward recurrence,
/// above it by the Hankel asymptotic expansion.
const J0_ASYMPTOTIC_FROM: f64 = 25.0;

/// Switch between the power series and the asymptotic expansion of I₀.
const I0_ASYMPTOTIC_FROM: f64 = 15.0;

/// Zeroth-order Bessel function of the first kind.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-8 {
        1.0 - 0.25 * x * x
    } else if x <= J0_ASYMPTOTIC_FROM {
        j0_miller(x)
    } else {
        j0_hankel(x)
    }
}

/// Miller's algorithm: recur J_{k-1} = (2k/x) J_k − J_{k+1} downward from an
/// arbitrary seed and normalise with J₀ + 2 Σ J_{2k} = 1.
fn j0_miller(x: f64) -> f64 {
    let start = (x + 12.0 * x.cbrt() + 20.0).ceil() as usize;
    let start = start + start % 2;

    let mut next = 0.0_f64; // J_{k+1}
    let mut current = 1e-30_f64; // J_k
    let mut norm = 0.0_f64;
    for k in (1..=start).rev() {
        let prev = (2.0 * k as f64 / x) * current - next;
        next = current;
        current = prev;
        // `current` now holds J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * current;
        }
        if current.abs() > 1e250 {
            current *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += current;
    current / norm
}

fn j0_hankel(x: f64) -> f64 {
    // t_k = a_k(0) / x^k with a_k(0) = Π_{j≤k} −(2j−1)² / (k! 8^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -odd * odd / (8.0 * k as f64 * x);
        if term.abs() >= last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        // t_1 - t_3 + ... goes to Q, t_0 - t_2 + ... to P
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Exponentially scaled modified Bessel function e^{−|x|} I₀(x).
///
/// Finite for every finite argument; use this instead of [`bessel_i0`] when
/// the argument may exceed a few hundred.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= I0_ASYMPTOTIC_FROM {
        let y = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= y / (k * k);
            sum += term;
            k += 1.0;
        }
        (-x).exp() * sum
    } else {
        let mut term = 1.0_f64;
        let mut sum = 1.0;
        for k in 1..80 {
            let odd = (2 * k - 1) as f64;
            let next = term * odd * odd / (8.0 * k as f64 * x);
            if next >= term || next < 1e-17 {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0_scaled(x) * x.abs().exp()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler gamma function for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(CbsError::Domain { function: "gamma", x });
    }
    Ok(lanczos_gamma(x))
}

fn lanczos_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate half-plane
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// B₂ₖ/(2k)! for k = 1..=7.
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
];

/// Σ_{n ≥ start} n^{−s} by Euler–Maclaurin summation, for s > 1 and start ≥ 1.
///
/// The sum is accumulated directly up to n = 12 so the correction series is
/// always applied far enough out to be accurate to rounding.
pub fn power_tail(s: f64, start: u64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(CbsError::Domain { function: "zeta", x: s });
    }
    let start = start.max(1);
    const CUT: u64 = 12;
    let mut sum = 0.0;
    let mut n = start;
    while n < CUT {
        sum += (n as f64).powf(-s);
        n += 1;
    }
    let big_n = n as f64;
    let mut tail = big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s);
    // rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    let mut rising = s;
    let mut power = big_n.powf(-s - 1.0);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let j = 2.0 * k as f64;
            rising *= (s + j - 1.0) * (s + j);
            power /= big_n * big_n;
        }
        tail += coeff * rising * power;
    }
    Ok(sum + tail)
}

/// Riemann zeta function for real s > 1.
pub fn zeta_fn(s: f64) -> Result<f64> {
    power_tail(s, 1)
}

/// Positive zeros of J₀ by McMahon's expansion.
///
/// Off by ~2e-3 at the first zero and rapidly better beyond; intended for
/// placing quadrature breakpoints, not as exact roots.
pub fn bessel_j0_zero(n: usize) -> f64 {
    let beta = (n as f64 - 0.25) * PI;
    let b2 = 1.0 / (8.0 * beta);
    beta + b2 - 124.0 / 3.0 * b2 * b2 * b2
}
