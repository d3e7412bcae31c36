#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly positive probability vector with entries drawn from `[lo, hi]` before normalizing.
pub fn interior_point<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn positive_vector<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Stationary distribution by repeated multiplication with the chain matrix.
pub fn power_iteration(chain: &[f64], n: usize, iterations: usize) -> Vec<f64> {
    let mut psi = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let mut next = vec![0.0; n];
        for s in 0..n {
            for t in 0..n {
                next[t] += psi[s] * chain[s * n + t];
            }
        }
        psi = next;
    }
    psi
}

/// `d_pi` for a 2x2 model by closed-form two-state chain algebra.
pub fn two_state_occupancy(kernel: &[f64], p0: f64, p1: f64) -> [f64; 4] {
    // P(1 | s, a) for s, a in {0, 1}; kernel is (s, a, s') row-major.
    let to1 = |s: usize, a: usize| kernel[(s * 2 + a) * 2 + 1];
    let leave0 = p0 * to1(0, 0) + (1.0 - p0) * to1(0, 1);
    let stay1 = p1 * to1(1, 0) + (1.0 - p1) * to1(1, 1);
    let enter0 = 1.0 - stay1;
    let psi0 = enter0 / (leave0 + enter0);
    let psi1 = 1.0 - psi0;
    [psi0 * p0, psi0 * (1.0 - p0), psi1 * p1, psi1 * (1.0 - p1)]
}
