//! Primary routines against the independent reference implementations.

use eqvar_core::bounds::gaussian_kl;
use eqvar_core::covest::sample_cov;
use eqvar_core::oracle::{brute_force_min_cond_var, monte_carlo_kl, population_cond_var, population_covariance};
use eqvar_core::rng::stream;
use eqvar_core::sem::random_model;
use eqvar_core::{CovEstimate, Matrix};
use rand::seq::index;
use rand::Rng;

#[test]
fn covariance_matches_recursion() {
    for seed in 0..100 {
        let d = 2 + (seed as usize % 9);
        let m = random_model(d, (d / 2).min(3), seed, 0.3 + 0.1 * (seed % 5) as f64, 0.5, 1.0).unwrap();
        let fast = m.covariance().unwrap();
        let slow = population_covariance(&m);
        assert!(fast.matrix().max_abs_diff(&slow) <= 1e-12 * slow.max_abs(), "seed {seed}");
    }
}

#[test]
fn conditional_variance_matches_oracle() {
    let mut rng = stream(11, &[]);
    for seed in 0..200u64 {
        let d = rng.random_range(2..=10);
        let q = rng.random_range(1..=d / 2);
        let m = random_model(d, q, seed, 1.0, 0.3, 1.0).unwrap();
        let c = m.covariance().unwrap();
        for _ in 0..10 {
            let k = rng.random_range(0..d);
            let size = rng.random_range(0..d);
            let set: Vec<usize> = index::sample(&mut rng, d, size).into_iter().filter(|&v| v != k).collect();
            let a = c.cond_var(k, &set).unwrap();
            let b = population_cond_var(&m, k, &set).unwrap();
            assert!((a - b).abs() <= 1e-10, "d={d} k={k} set={set:?}: {a} vs {b}");
        }
    }
}

#[test]
fn best_subset_matches_brute_force() {
    let mut rng = stream(12, &[]);
    for inst in 0..1000u64 {
        let d = rng.random_range(3..=9);
        let q = rng.random_range(1..=d / 2).max(1);
        let m = random_model(d, q, inst, 0.5, 0.3, 1.0).unwrap();
        // Half population, half sample covariances.
        let c = if inst % 2 == 0 { m.covariance().unwrap() } else { sample_cov(&m.sample(40, inst), false).unwrap() };
        let k = rng.random_range(0..d);
        let pool_size = rng.random_range(0..d);
        let mut pool: Vec<usize> = index::sample(&mut rng, d, pool_size).into_iter().filter(|&v| v != k).collect();
        pool.sort_unstable();
        let qq = rng.random_range(0..=3);
        let fast = c.min_cond_var(k, &pool, qq).unwrap();
        let slow = brute_force_min_cond_var(&c, k, &pool, qq).unwrap();
        assert!((fast.value - slow.value).abs() <= 1e-10 * c.get(k, k), "instance {inst}");
        assert_eq!(fast.set, slow.set, "instance {inst}");
    }
}

fn random_spd(d: usize, rng: &mut impl Rng) -> CovEstimate {
    let mut a = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    let mut s = a.matmul(&a.transpose()).unwrap();
    for i in 0..d {
        s[(i, i)] += 0.5;
    }
    CovEstimate::population(s).unwrap()
}

#[test]
fn kl_closed_form_matches_monte_carlo() {
    let mut rng = stream(13, &[]);
    for pair in 0..50u64 {
        let d = rng.random_range(1..=5);
        let s0 = random_spd(d, &mut rng);
        let s1 = random_spd(d, &mut rng);
        let exact = gaussian_kl(&s0, &s1).unwrap();
        let (est, se) = monte_carlo_kl(&s0, &s1, 100_000, pair).unwrap();
        assert!((est - exact).abs() <= 4.0 * se + 1e-12, "pair {pair}: {exact} vs {est} ± {se}");
        assert!(exact >= 0.0);
    }
}
