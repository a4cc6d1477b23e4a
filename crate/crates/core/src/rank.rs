//! Response ranks and the centered pseudo-response `z = r/n - 1/2`.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};

/// Centered rank transform of a response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoResponse {
    pub z: Array1<f64>,
    /// `ranks[i] = #{j : y[j] <= y[i]}`; tied values share their maximal rank.
    pub ranks: Vec<usize>,
    /// `‖z‖²`.
    pub sum_sq: f64,
}

impl PseudoResponse {
    pub fn n(&self) -> usize {
        self.z.len()
    }
}

/// Ranks `y` with the "count of values ≤ y_i" convention in O(n log n).
pub fn rank_response(y: ArrayView1<'_, f64>) -> Result<PseudoResponse> {
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewObservations(n));
    }
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "y", index });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));

    let mut ranks = vec![0usize; n];
    // walk backwards so each tie block receives the position of its last member
    let mut block_rank = n;
    for pos in (0..n).rev() {
        if pos + 1 < n && y[order[pos]] != y[order[pos + 1]] {
            block_rank = pos + 1;
        }
        ranks[order[pos]] = block_rank;
    }

    let nf = n as f64;
    let z: Array1<f64> = ranks.iter().map(|&r| r as f64 / nf - 0.5).collect();
    let sum_sq = z.dot(&z);
    Ok(PseudoResponse { z, ranks, sum_sq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn literal_ranks(y: &[f64]) -> Vec<usize> {
        y.iter()
            .map(|&yi| y.iter().filter(|&&yj| yj <= yi).count())
            .collect()
    }

    #[test]
    fn sorted_input() {
        let pr = rank_response(array![10.0, 20.0, 30.0].view()).unwrap();
        assert_eq!(pr.ranks, vec![1, 2, 3]);
        let expect = [1.0 / 3.0 - 0.5, 2.0 / 3.0 - 0.5, 0.5];
        for (a, b) in pr.z.iter().zip(expect) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn ties_take_maximal_rank() {
        let pr = rank_response(array![5.0, 5.0].view()).unwrap();
        assert_eq!(pr.ranks, vec![2, 2]);
        assert_eq!(pr.z, array![0.5, 0.5]);
        let pr = rank_response(array![3.0, 1.0, 3.0, 2.0, 1.0].view()).unwrap();
        assert_eq!(pr.ranks, vec![5, 2, 5, 3, 2]);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(rank_response(array![1.0, f64::NAN].view()).is_err());
        assert!(rank_response(array![1.0].view()).is_err());
    }

    #[test]
    fn exp_transform_preserves_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y: Array1<f64> = (0..200).map(|_| rng.random_range(-5.0..5.0)).collect();
        let a = rank_response(y.view()).unwrap();
        let b = rank_response(y.mapv(f64::exp).view()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tie_free_sums() {
        for n in [2usize, 3, 10, 101, 1000] {
            let y: Array1<f64> = (0..n).map(|i| ((i * 7919) % n) as f64).collect();
            let pr = rank_response(y.view()).unwrap();
            assert!((pr.z.sum() - 0.5).abs() < 1e-12);
            let closed: f64 = (1..=n).map(|k| (k as f64 / n as f64 - 0.5).powi(2)).sum();
            assert!((pr.sum_sq - closed).abs() <= 1e-9 * n as f64);
        }
    }

    #[test]
    fn doubling_cost_is_near_linear() {
        use std::time::Instant;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let big: Array1<f64> = (0..400_000).map(|_| rng.random::<f64>()).collect();
        let time = |len: usize| {
            let view = big.slice(ndarray::s![..len]);
            let start = Instant::now();
            for _ in 0..3 {
                std::hint::black_box(rank_response(view).unwrap());
            }
            start.elapsed().as_secs_f64()
        };
        // warm up, then take the best of a few runs
        time(200_000);
        let small = (0..3).map(|_| time(200_000)).fold(f64::INFINITY, f64::min);
        let large = (0..3).map(|_| time(400_000)).fold(f64::INFINITY, f64::min);
        assert!(large / small <= 3.0, "ratio {}", large / small);
    }

    proptest! {
        #[test]
        fn matches_literal_counter(y in proptest::collection::vec(-4i32..4, 2..60)) {
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let pr = rank_response(ArrayView1::from(&y)).unwrap();
            prop_assert_eq!(&pr.ranks, &literal_ranks(&y));
            let n = y.len() as f64;
            for (zi, &ri) in pr.z.iter().zip(&pr.ranks) {
                prop_assert_eq!(*zi, ri as f64 / n - 0.5);
            }
        }
    }
}
