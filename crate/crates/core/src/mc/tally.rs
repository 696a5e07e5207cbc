//! Per-order accumulators and their statistics.

use serde::{Deserialize, Serialize};

/// Sums for one scattering order. The coherent sums are per detection
/// angle; `cross` accumulates incoherent × coherent products for the error
/// of the ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTally {
    pub incoherent: f64,
    pub incoherent_sq: f64,
    pub coherent: Vec<f64>,
    pub coherent_sq: Vec<f64>,
    pub cross: Vec<f64>,
}

impl OrderTally {
    pub fn new(angles: usize) -> Self {
        OrderTally {
            incoherent: 0.0,
            incoherent_sq: 0.0,
            coherent: vec![0.0; angles],
            coherent_sq: vec![0.0; angles],
            cross: vec![0.0; angles],
        }
    }

    fn merge(&mut self, other: &OrderTally) {
        self.incoherent += other.incoherent;
        self.incoherent_sq += other.incoherent_sq;
        for (a, b) in [
            (&mut self.coherent, &other.coherent),
            (&mut self.coherent_sq, &other.coherent_sq),
            (&mut self.cross, &other.cross),
        ] {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Accumulators for orders 1…N over a number of launched photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub samples: u64,
    pub orders: Vec<OrderTally>,
}

/// Mean and standard error of a per-sample quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanError {
    pub mean: f64,
    pub error: f64,
}

impl Tally {
    pub fn new(max_order: usize, angles: usize) -> Self {
        Tally {
            samples: 0,
            orders: (0..max_order).map(|_| OrderTally::new(angles)).collect(),
        }
    }

    /// Adds another tally of the same shape.
    pub fn merge(&mut self, other: &Tally) {
        assert_eq!(self.orders.len(), other.orders.len(), "tally shapes differ");
        self.samples += other.samples;
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            a.merge(b);
        }
    }

    fn mean_error(&self, sum: f64, sum_sq: f64) -> MeanError {
        let n = self.samples as f64;
        let mean = sum / n;
        let var = if self.samples > 1 {
            ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MeanError {
            mean,
            error: (var / n).sqrt(),
        }
    }

    /// γ_B of order `order` (1-based).
    pub fn incoherent(&self, order: usize) -> MeanError {
        let t = &self.orders[order - 1];
        self.mean_error(t.incoherent, t.incoherent_sq)
    }

    /// γ_C of order `order` at angle index `angle`.
    pub fn coherent(&self, order: usize, angle: usize) -> MeanError {
        let t = &self.orders[order - 1];
        self.mean_error(t.coherent[angle], t.coherent_sq[angle])
    }

    /// γ_C/γ_B within one order, with a delta-method error that accounts for
    /// the correlation of the two tallies.
    pub fn contrast(&self, order: usize, angle: usize) -> MeanError {
        let t = &self.orders[order - 1];
        let n = self.samples as f64;
        let b = t.incoherent / n;
        let c = t.coherent[angle] / n;
        let ratio = c / b;
        let resid = t.coherent_sq[angle] / n - 2.0 * ratio * t.cross[angle] / n + ratio * ratio * t.incoherent_sq / n;
        let var = if self.samples > 1 {
            resid.max(0.0) * n / (n - 1.0)
        } else {
            0.0
        };
        MeanError {
            mean: ratio,
            error: (var / n).sqrt() / b.abs(),
        }
    }
}
