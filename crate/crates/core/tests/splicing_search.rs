mod common;

use common::{gaussian_matrix, linear_response, rng};
use ndarray::{Array1, Array2};
use ranksubset_core::harness::{fit_rank_abess, MethodOptions};
use ranksubset_core::{rank_bess, rank_response, Dataset, IndexSet, LeastSquares, SplicingConfig};

/// Centered columns with `XᵀX / n = I`, from a QR factorization.
fn orthogonal_design(n: usize, p: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Array2<f64> {
    let g = gaussian_matrix(n, p, rng);
    let centered = Dataset::new(g.view(), Array1::zeros(n).view()).unwrap();
    let m = nalgebra::DMatrix::from_fn(n, p, |i, j| centered.x()[[i, j]]);
    let q = m.qr().q();
    Array2::from_shape_fn((n, p), |(i, j)| q[(i, j)] * (n as f64).sqrt())
}

fn all_triples(p: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..p).flat_map(move |a| (a + 1..p).flat_map(move |b| (b + 1..p).map(move |c| [a, b, c])))
}

#[test]
fn splicing_reaches_exhaustive_minimum() {
    let (n, p, s) = (100, 10, 3);
    let mut hits = 0;
    for seed in 0..100u64 {
        let mut rng = rng(5000 + seed);
        let x_raw = gaussian_matrix(n, p, &mut rng);
        let y = linear_response(&x_raw, &[1, 4, 8], 2.0, &mut rng);
        let ds = Dataset::new(x_raw.view(), y.view()).unwrap();
        let pr = rank_response(ds.y()).unwrap();
        let ls = LeastSquares::new(&ds, &pr).unwrap();

        let global = all_triples(p)
            .map(|t| ls.fit_on_support(&IndexSet::new(t.to_vec(), p).unwrap()).unwrap().loss)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(all_triples(p).count(), 120);

        let (model, _) = rank_bess(&ls, &SplicingConfig::with_defaults(s, n, p)).unwrap();
        assert!(model.loss >= global - 1e-10, "seed {seed}: below the global minimum");
        if (model.loss - global).abs() <= 1e-10 {
            hits += 1;
        }
    }
    assert!(hits >= 90, "only {hits}/100 reached the global minimum");
}

#[test]
fn orthogonal_strong_signal_recovers_truth() {
    let (n, p) = (200, 50);
    let mut rng = rng(9);
    let x = orthogonal_design(n, p, &mut rng);
    let truth = [3usize, 17, 29, 41];
    let noise = linear_response(&Array2::zeros((n, 1)), &[], 0.0, &mut rng);
    let y: Array1<f64> =
        Array1::from_iter((0..n).map(|i| truth.iter().map(|&j| 2.0 * x[[i, j]]).sum::<f64>() + 0.3 * noise[i]));
    let ds = Dataset::new(x.view(), y.view()).unwrap();
    let pr = rank_response(ds.y()).unwrap();
    let ls = LeastSquares::new(&ds, &pr).unwrap();
    for j in 0..p {
        assert!((ls.cache().gram_diag[j] - 1.0).abs() < 1e-10);
    }
    let (model, trace) = rank_bess(&ls, &SplicingConfig::with_defaults(truth.len(), n, p)).unwrap();
    assert_eq!(model.active.as_slice(), &truth);
    assert!(trace.converged);
}

#[test]
fn infinite_threshold_keeps_the_initial_set() {
    let (n, p) = (80, 30);
    let mut rng = rng(21);
    let x_raw = gaussian_matrix(n, p, &mut rng);
    let y = linear_response(&x_raw, &[0, 10, 20], 1.0, &mut rng);
    let ds = Dataset::new(x_raw.view(), y.view()).unwrap();
    let pr = rank_response(ds.y()).unwrap();
    let ls = LeastSquares::new(&ds, &pr).unwrap();
    let config = SplicingConfig { tau: f64::INFINITY, max_iterations: Some(10), ..SplicingConfig::with_defaults(4, n, p) };
    let (model, trace) = rank_bess(&ls, &config).unwrap();
    let initial = ls.fit_on_support(&ranksubset_core::initialize_active_set(ls.cache(), 4)).unwrap();
    assert_eq!(model, initial);
    assert_eq!(trace.iterations, 1);
    assert!(trace.converged);
    assert!(trace.accepted_splices.is_empty());
}

#[test]
fn accepted_splices_descend_by_more_than_tau() {
    let (n, p) = (150, 60);
    for seed in 0..10u64 {
        let mut rng = rng(300 + seed);
        let x_raw = gaussian_matrix(n, p, &mut rng);
        let y = linear_response(&x_raw, &[5, 15, 25, 35, 45], 0.7, &mut rng);
        let ds = Dataset::new(x_raw.view(), y.view()).unwrap();
        let pr = rank_response(ds.y()).unwrap();
        let ls = LeastSquares::new(&ds, &pr).unwrap();
        let config = SplicingConfig::with_defaults(6, n, p);
        let (model, trace) = rank_bess(&ls, &config).unwrap();
        assert_eq!(model.active.len(), 6);
        let initial = ls.fit_on_support(&ranksubset_core::initialize_active_set(ls.cache(), 6)).unwrap();
        let mut previous = initial.loss;
        for splice in &trace.accepted_splices {
            assert_eq!(splice.loss_before, previous);
            assert!(splice.loss_before - splice.loss_after > config.tau);
            previous = splice.loss_after;
        }
        assert_eq!(previous, model.loss);
        assert!((ls.evaluate_loss(&model) - model.loss).abs() <= 1e-10);
    }
}

#[test]
fn monotone_response_map_gives_identical_fit() {
    let (n, p) = (120, 40);
    for seed in 0..5u64 {
        let mut rng = rng(700 + seed);
        let x_raw = gaussian_matrix(n, p, &mut rng);
        let y = linear_response(&x_raw, &[2, 9, 30], 1.0, &mut rng);
        let y_exp = y.mapv(f64::exp);
        let fit = |y: &Array1<f64>| {
            let ds = Dataset::new(x_raw.view(), y.view()).unwrap();
            let pr = rank_response(ds.y()).unwrap();
            let ls = LeastSquares::new(&ds, &pr).unwrap();
            fit_rank_abess(&ls, &MethodOptions::default()).unwrap()
        };
        let (a, b) = (fit(&y), fit(&y_exp));
        assert_eq!(a.selected, b.selected);
        for (ea, eb) in a.gic_path.iter().zip(&b.gic_path) {
            assert_eq!(ea.gic_value.to_bits(), eb.gic_value.to_bits());
        }
    }
}
