#![allow(dead_code)]

use ndarray::{Array1, Array2, ShapeBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal design, column-major.
pub fn gaussian_matrix(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut x = Array2::zeros((n, p).f());
    x.mapv_inplace(|_: f64| rng.sample::<f64, _>(StandardNormal));
    x
}

/// `y = Σ_{j ∈ support} signal · x_j + N(0, 1)`.
pub fn linear_response(x: &Array2<f64>, support: &[usize], signal: f64, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_iter((0..x.nrows()).map(|i| {
        let index: f64 = support.iter().map(|&j| signal * x[[i, j]]).sum();
        index + rng.sample::<f64, _>(StandardNormal)
    }))
}

/// Loss `‖z - Xβ‖² / (2n)` computed row by row from a dense coefficient
/// vector, independent of the library kernel.
pub fn dense_loss(x: &Array2<f64>, z: &Array1<f64>, beta: &[f64]) -> f64 {
    let n = x.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let fitted: f64 = beta.iter().enumerate().map(|(j, b)| x[[i, j]] * b).sum();
        let r = z[i] - fitted;
        total += r * r;
    }
    total / (2.0 * n as f64)
}

/// Draws `k` distinct indices below `p`.
pub fn random_subset(p: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, p, k).into_vec();
    idx.sort_unstable();
    idx
}
