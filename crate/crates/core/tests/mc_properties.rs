//! Statistical properties of the Monte Carlo transport.

use std::f64::consts::LN_2;

use hotcbs::mc::{group_delay_factor, path_dephasing, run, run_tally, sample_path, velocity_coefficients, Vec3};
use hotcbs::scalar::{contrast_scalar, ScalarCbsQuery};
use hotcbs::{CellGeometry, Estimator, McConfig, QuadratureSpec, VaporParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn config(kv: f64, samples: u64) -> McConfig {
    let mut c = McConfig::scalar_semi_infinite(kv, 50.0, 1e4);
    c.samples = samples;
    c
}

#[test]
fn gaussian_velocity_average_matches_closed_form() {
    let a = 0.3;
    let vapor = VaporParams::from_k_ell(1e4, 50.0, a).unwrap();
    let kappa = group_delay_factor(&vapor);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 1_000_000;
    for order in [2, 3] {
        let mut geometries = 0;
        while geometries < 20 {
            let Some(path) = sample_path(order, &CellGeometry::semi_infinite(), &mut rng) else {
                continue;
            };
            geometries += 1;
            let var: f64 = velocity_coefficients(&path).iter().map(|c| c.norm_sqr()).sum::<f64>() * (a * kappa).powi(2);
            let expected = (-0.5 * var).exp();
            let (mut re, mut re2, mut im) = (0.0, 0.0, 0.0);
            let mut v = vec![Vec3::ZERO; order];
            for _ in 0..draws {
                for u in v.iter_mut() {
                    *u = Vec3::new(
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                        rng.sample(StandardNormal),
                    ) * a;
                }
                let phase = path_dephasing(&path, &v, &vapor, 0.0);
                re += phase.cos();
                re2 += phase.cos().powi(2);
                im += phase.sin();
            }
            let n = draws as f64;
            let mean = re / n;
            let err = ((re2 / n - mean * mean) / n).sqrt();
            assert!(
                (mean - expected).abs() < 3.5 * err + 1e-12,
                "N={order}: {mean} vs {expected} ± {err}"
            );
            assert!((im / n).abs() < 4.0 * (0.5 / n).sqrt() + 1e-12);
        }
    }
}

#[test]
fn estimators_agree_and_analytic_has_lower_variance() {
    let mut analytic = config(5.0, 400_000);
    analytic.dtheta = vec![0.0, 2e-3];
    let mut explicit = analytic.clone();
    explicit.estimator = Estimator::ExplicitVelocitySampling;
    explicit.seed = 99;
    let ra = run(&analytic).unwrap();
    let re = run(&explicit).unwrap();
    for n in [2, 3] {
        for j in 0..2 {
            let pa = &ra.order(n).unwrap().profile[j];
            let pe = &re.order(n).unwrap().profile[j];
            let sigma = pa.gamma_c_err.hypot(pe.gamma_c_err);
            assert!(
                (pa.gamma_c - pe.gamma_c).abs() < 3.0 * sigma,
                "N={n} j={j}: {pa:?} vs {pe:?}"
            );
            assert!(pa.gamma_c_err < pe.gamma_c_err, "N={n}: analytic error not smaller");
        }
    }
}

#[test]
fn double_scattering_peak_matches_quadrature() {
    let spec = QuadratureSpec::default();
    for (i, kv) in [1.0, 5.0, 10.0, 20.0, 40.0].into_iter().enumerate() {
        let mut c = config(kv, 500_000);
        c.seed = 100 + i as u64;
        c.max_order = 2;
        let result = run(&c).unwrap();
        let p = &result.order(2).unwrap().profile[0];
        let q = contrast_scalar(&ScalarCbsQuery::new(0.0, kv, 1e4).unwrap(), &spec).unwrap();
        assert!(
            (p.contrast - q).abs() < 3.0 * p.contrast_err,
            "kv={kv}: {} ± {} vs {q}",
            p.contrast,
            p.contrast_err
        );
    }
}

#[test]
fn zero_temperature_coherent_equals_background() {
    let r = run(&config(0.0, 100_000)).unwrap();
    let o = r.order(2).unwrap();
    assert!((o.profile[0].gamma_c - o.gamma_b).abs() <= o.gamma_b_err);
}

#[test]
fn background_error_scales_as_inverse_root_samples() {
    let counts = [1_000u64, 10_000, 100_000, 1_000_000];
    let mut errs = Vec::new();
    for (i, &n) in counts.iter().enumerate() {
        let mut c = config(0.0, n);
        c.seed = 7 + i as u64;
        c.max_order = 2;
        let o = run(&c).unwrap().order(2).unwrap().clone();
        assert!((o.gamma_b - 0.5 * LN_2).abs() < 3.5 * o.gamma_b_err, "n={n}");
        errs.push(o.gamma_b_err);
    }
    let slope = (errs[3] / errs[0]).ln() / 1000f64.ln();
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn worker_count_does_not_change_the_distribution() {
    let batches = 40;
    let batch_means = |threads: usize, seed0: u64| -> Vec<f64> {
        (0..batches)
            .map(|b| {
                let mut c = config(10.0, 25_000);
                c.threads = threads;
                c.chunk_size = 25_000 / threads as u64;
                c.seed = seed0 + b;
                run(&c).unwrap().order(2).unwrap().profile[0].contrast
            })
            .collect()
    };
    let four = batch_means(4, 0);
    let one = batch_means(1, 10_000);
    // Critical value at α = 0.01 for two samples of 40.
    let critical = 1.628 * (2.0 / batches as f64).sqrt();
    assert!(ks_statistic(four, one) < critical);
}

#[test]
fn fixed_streams_are_bit_identical_across_workers() {
    let mut c = config(10.0, 1_000_000);
    c.chunk_size = 250_000;
    c.threads = 4;
    let four = run_tally(&c).unwrap();
    c.threads = 1;
    assert_eq!(run_tally(&c).unwrap(), four);
}

#[test]
fn thin_cell_orders_scale_with_thickness() {
    let (small, large) = (0.04, 0.16);
    let weights = |l: f64| -> Vec<f64> {
        let mut c = config(0.0, 4_000_000);
        c.geometry = CellGeometry::cylinder(l, l).unwrap();
        let r = run(&c).unwrap();
        (1..=3).map(|n| r.order(n).unwrap().gamma_b).collect()
    };
    let (a, b) = (weights(small), weights(large));
    for n in 1..=3 {
        let slope = (b[n - 1] / a[n - 1]).ln() / (large / small).ln();
        assert!((slope / n as f64 - 1.0).abs() < 0.1, "N={n}: slope {slope}");
    }
}
