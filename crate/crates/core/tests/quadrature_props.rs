//! The quadrature and sampling layer against closed-form answers.

use bloch_core::numerics::{
    adaptive_quadrature, gaussian_expectation, loglog_slope_fit, normal_cdf, plateau_crossover,
    GaussianSampler, QuadratureOptions,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI};

fn opts() -> QuadratureOptions<f64> {
    QuadratureOptions::default()
}

#[test]
fn reported_error_bounds_are_honest() {
    type Case = (fn(f64) -> f64, f64, f64, f64);
    let cases: [Case; 10] = [
        (|x| x * x * x - 2.0 * x, -1.0, 3.0, 12.0),
        (|x| x.exp(), 0.0, 1.0, E - 1.0),
        (|x| x.sin(), 0.0, PI, 2.0),
        (|x| (3.0 * x).cos() * x, 0.0, 2.0, ((6.0f64).cos() - 1.0) / 9.0 + 2.0 * (6.0f64).sin() / 3.0),
        (|x| 1.0 / (1.0 + x * x), -1.0, 1.0, PI / 2.0),
        (|x| (1.0 - 0.25 * x).sqrt(), 0.0, 3.0, (8.0 / 3.0) * (1.0 - 0.125)),
        (|x| (-x * x).exp() * x, 0.0, 2.0, 0.5 * (1.0 - (-4.0f64).exp())),
        (|x| (1.0 + x).ln(), 0.0, 1.0, 2.0 * (2.0f64).ln() - 1.0),
        (|x| (10.0 * x).sin(), 0.0, 1.0, (1.0 - (10.0f64).cos()) / 10.0),
        (|x| x.cosh(), -1.0, 1.0, 2.0 * (1.0f64).sinh()),
    ];
    for (k, (f, a, b, truth)) in cases.into_iter().enumerate() {
        let (value, bound) = adaptive_quadrature(f, a, b, &opts()).unwrap();
        let err = (value - truth).abs();
        assert!(
            err <= (10.0 * bound).max(1e-13),
            "case {k}: err {err:.3e} vs bound {bound:.3e}"
        );
    }
}

#[test]
fn gaussian_moments_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let mean: f64 = rng.random_range(-3.0..3.0);
        let variance: f64 = rng.random_range(0.05..4.0);
        let (mass, e_mass, _) =
            gaussian_expectation(|_| 1.0, mean, variance, f64::NEG_INFINITY, &opts()).unwrap();
        let (first, e_first, _) =
            gaussian_expectation(|x| x, mean, variance, f64::NEG_INFINITY, &opts()).unwrap();
        let (second, e_second, _) =
            gaussian_expectation(|x| x * x, mean, variance, f64::NEG_INFINITY, &opts()).unwrap();
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass} bound {e_mass}");
        assert!((first - mean).abs() < 1e-10, "mean {first} bound {e_first}");
        assert!(
            (second - (mean * mean + variance)).abs() < 1e-9,
            "second {second} bound {e_second}"
        );
    }
}

#[test]
fn truncation_mass_matches_the_normal_cdf() {
    for (mean, variance, cutoff) in [(0.0, 1.0, 0.0), (1.0, 0.5, 0.3), (-2.0, 2.0, -1.0)] {
        let (_, _, mass) =
            gaussian_expectation(|_| 1.0, mean, variance, cutoff, &opts()).unwrap();
        let z = (cutoff - mean) / variance.sqrt();
        assert!(
            (mass - normal_cdf(z)).abs() < 1e-10,
            "mass {mass} at z {z}"
        );
    }
}

#[test]
fn sampler_draws_follow_the_normal_law() {
    // Kolmogorov-Smirnov against the target CDF; the 1.95 / sqrt(n)
    // threshold is the 0.1 percent critical value, so allow 2 excursions
    // in 20 seeds.
    let n = 200_000usize;
    let threshold = 1.95 / (n as f64).sqrt();
    let mut passes = 0;
    for seed in 0..20u64 {
        let sampler = GaussianSampler::new(seed, 0.7, 2.25).unwrap();
        let mut draws: Vec<f64> = (0..n as u64)
            .map(|i| (sampler.draw_at(i) - 0.7) / 1.5)
            .collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d_max = 0.0f64;
        for (k, x) in draws.iter().enumerate() {
            let cdf = normal_cdf(*x);
            let lo = k as f64 / n as f64;
            let hi = (k + 1) as f64 / n as f64;
            d_max = d_max.max((cdf - lo).abs()).max((cdf - hi).abs());
        }
        if d_max < threshold {
            passes += 1;
        }
    }
    assert!(passes >= 18, "only {passes}/20 seeds under the KS threshold");
}

#[test]
fn sampler_is_a_pure_function_of_seed_and_index() {
    let sampler = GaussianSampler::new(99, -1.0, 0.3).unwrap();
    let forward: Vec<f64> = (0..50).map(|i| sampler.draw_at(i)).collect();
    let mut backward: Vec<f64> = (0..50).rev().map(|i| sampler.draw_at(i)).collect();
    backward.reverse();
    assert_eq!(forward, backward);
    let again = GaussianSampler::new(99, -1.0, 0.3).unwrap();
    let repeat: Vec<f64> = (0..50).map(|i| again.draw_at(i)).collect();
    assert_eq!(forward, repeat);
}

#[test]
fn exact_power_law_is_fit_exactly() {
    let points: Vec<(f64, f64)> = (1..30)
        .map(|k| {
            let t = 1.5f64.powi(k);
            (t, 2.4 * t.powf(0.5))
        })
        .collect();
    let fit = loglog_slope_fit(&points).unwrap();
    assert!((fit.slope - 0.5).abs() < 1e-12);
    assert!((fit.intercept - 2.4f64.ln()).abs() < 1e-12);
    assert!(fit.r_squared > 1.0 - 1e-12);
    let cross = plateau_crossover(2.4 * 9.0f64.sqrt(), &fit).unwrap();
    assert!((cross - 9.0).abs() < 1e-9);
}

#[test]
fn noisy_power_law_keeps_slope_and_loses_r_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<(f64, f64)> = (1..40)
        .map(|k| {
            let t = 1.3f64.powi(k);
            let jitter: f64 = rng.random_range(-0.02..0.02);
            (t, 5.0 * t.powf(1.7) * jitter.exp())
        })
        .collect();
    let fit = loglog_slope_fit(&points).unwrap();
    assert!((fit.slope - 1.7).abs() < 0.01);
    assert!(fit.r_squared > 0.999 && fit.r_squared < 1.0);
}
