//! Rank-LASSO baselines: ℓ1-penalized least squares on the pseudo-response,
//! solved by cyclic coordinate descent.
//!
//! Objective: `‖z - Xβ‖² / (2n) + λ Σ_j w_j |β_j|`.

use std::cell::RefCell;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::LeastSquares;
use crate::types::{IndexSet, SparseModel};

/// KKT tolerance on the scaled gradient.
pub const KKT_TOLERANCE: f64 = 1e-6;
pub const MAX_SWEEPS: usize = 10_000;
/// Floor on pilot magnitudes when forming adaptive weights.
pub const PILOT_FLOOR: f64 = 1e-6;
/// Relative pivot floor when a column joins the active factor.
const FACTOR_PIVOT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub model: SparseModel,
    /// False when the sweep cap was hit before the KKT conditions held.
    pub converged: bool,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    /// Strictly decreasing.
    pub lambdas: Vec<f64>,
    pub solutions: Vec<SparseModel>,
    pub selected_lambda: f64,
    pub converged: bool,
}

/// Output of the cross-validated fit.
#[derive(Debug, Clone)]
pub struct CvLasso {
    pub fit: LassoFit,
    pub path: LassoPath,
    pub mean_errors: Vec<f64>,
    /// Fold label of each observation.
    pub folds: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub grid_size: usize,
    /// Smallest λ as a fraction of `λ_max`.
    pub min_ratio: f64,
    pub seed: u64,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { folds: 10, grid_size: 50, min_ratio: 1e-3, seed: 0 }
    }
}

/// Default fixed penalty `c · √(ln p / n)`.
pub fn default_lambda(c: f64, n: usize, p: usize) -> f64 {
    c * ((p as f64).ln() / n as f64).sqrt()
}

/// Cholesky factor `L Lᵀ = XᵀX / n` of the columns in `members`, kept in
/// sync with the support by row appends and Givens deletions.
#[derive(Debug, Default)]
struct ActiveFactor {
    members: Vec<usize>,
    /// Row `i` holds `L[i][0..=i]`.
    rows: Vec<Vec<f64>>,
}

impl ActiveFactor {
    fn position(&self, j: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == j)
    }

    /// Appends column `j`; `cross[i]` is the Gram entry with `members[i]`.
    fn push(&mut self, j: usize, cross: &[f64], diag: f64) -> bool {
        let mut row = Vec::with_capacity(self.rows.len() + 1);
        for (i, l) in self.rows.iter().enumerate() {
            let dot: f64 = l[..i].iter().zip(&row).map(|(a, b)| a * b).sum();
            row.push((cross[i] - dot) / l[i]);
        }
        let pivot = diag - row.iter().map(|v| v * v).sum::<f64>();
        if !pivot.is_finite() || pivot <= FACTOR_PIVOT_FLOOR * diag {
            return false;
        }
        row.push(pivot.sqrt());
        self.members.push(j);
        self.rows.push(row);
        true
    }

    fn remove(&mut self, k: usize) {
        self.members.remove(k);
        self.rows.remove(k);
        for i in k..self.rows.len() {
            let (a, b) = (self.rows[i][i], self.rows[i][i + 1]);
            let r = a.hypot(b);
            let (c, s) = (a / r, b / r);
            for row in &mut self.rows[i..] {
                let (x, y) = (row[i], row[i + 1]);
                row[i] = c * x + s * y;
                row[i + 1] = c * y - s * x;
            }
            self.rows[i].pop();
        }
    }

    /// Solves `L Lᵀ x = b` in member order.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let s = self.rows.len();
        let mut y = vec![0.0; s];
        for i in 0..s {
            let dot: f64 = self.rows[i][..i].iter().zip(&y).map(|(a, b)| a * b).sum();
            y[i] = (b[i] - dot) / self.rows[i][i];
        }
        for i in (0..s).rev() {
            let mut v = y[i];
            for k in i + 1..s {
                v -= self.rows[k][i] * y[k];
            }
            y[i] = v / self.rows[i][i];
        }
        y
    }
}

/// Coordinate-descent state over a design and target.
struct CdProblem<'a> {
    x: ArrayView2<'a, f64>,
    z: ArrayView1<'a, f64>,
    /// `‖X_j‖² / n`.
    col_sq: Vec<f64>,
    n: f64,
    factor: RefCell<ActiveFactor>,
}

impl<'a> CdProblem<'a> {
    fn new(x: ArrayView2<'a, f64>, z: ArrayView1<'a, f64>) -> Self {
        let n = x.nrows() as f64;
        let col_sq = x.columns().into_iter().map(|c| c.dot(&c) / n).collect();
        Self { x, z, col_sq, n, factor: RefCell::default() }
    }

    /// Brings the factor onto the support of `beta`. Returns false if a
    /// column could not be added without losing positive definiteness.
    fn sync_factor(&self, factor: &mut ActiveFactor, beta: &[f64]) -> bool {
        while let Some(k) = factor.members.iter().position(|&j| beta[j] == 0.0) {
            factor.remove(k);
        }
        for j in (0..self.p()).filter(|&j| beta[j] != 0.0) {
            if factor.position(j).is_some() {
                continue;
            }
            if factor.members.len() + 1 >= self.x.nrows() {
                return false;
            }
            let col = self.x.column(j);
            let cross: Vec<f64> = factor.members.iter().map(|&m| col.dot(&self.x.column(m)) / self.n).collect();
            if !factor.push(j, &cross, self.col_sq[j]) {
                return false;
            }
        }
        true
    }

    /// Exact minimization over the current support with signs held fixed.
    /// Steps toward the sign-constrained stationary point and drops any
    /// coordinate that would cross zero, until the step is full. Returns
    /// false if a restricted system could not be solved.
    fn settle(&self, lambda: f64, weights: &[f64], beta: &mut [f64]) -> bool {
        let mut factor = self.factor.borrow_mut();
        if !self.sync_factor(&mut factor, beta) {
            return false;
        }
        loop {
            if factor.members.is_empty() {
                return true;
            }
            let rhs: Vec<f64> = factor
                .members
                .iter()
                .map(|&j| self.x.column(j).dot(&self.z) / self.n - lambda * weights[j] * beta[j].signum())
                .collect();
            let target = factor.solve(&rhs);
            if target.iter().any(|t| !t.is_finite()) {
                return false;
            }
            let mut step = 1.0;
            let mut blocking = None;
            for (k, (&j, &t)) in factor.members.iter().zip(&target).enumerate() {
                if t.signum() != beta[j].signum() || t == 0.0 {
                    let cross = beta[j] / (beta[j] - t);
                    if cross < step {
                        step = cross;
                        blocking = Some(k);
                    }
                }
            }
            for (&j, &t) in factor.members.iter().zip(&target) {
                beta[j] += step * (t - beta[j]);
            }
            match blocking {
                Some(k) => {
                    beta[factor.members[k]] = 0.0;
                    factor.remove(k);
                }
                None => return true,
            }
        }
    }

    fn p(&self) -> usize {
        self.x.ncols()
    }

    fn lambda_max(&self, weights: &[f64]) -> f64 {
        let g = self.x.t().dot(&self.z) / self.n;
        g.iter()
            .zip(weights)
            .map(|(g, w)| g.abs() / w)
            .fold(0.0, f64::max)
    }

    fn residual(&self, beta: &[f64]) -> Array1<f64> {
        let mut r = self.z.to_owned();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                r.scaled_add(-b, &self.x.column(j));
            }
        }
        r
    }

    /// One pass over `coords`; returns the largest KKT violation seen
    /// before each update.
    fn sweep(
        &self,
        coords: impl Iterator<Item = usize>,
        lambda: f64,
        weights: &[f64],
        beta: &mut [f64],
        r: &mut Array1<f64>,
    ) -> f64 {
        let mut worst = 0.0f64;
        for j in coords {
            let c = self.col_sq[j];
            if c <= 0.0 {
                continue;
            }
            let col = self.x.column(j);
            let g = col.dot(r) / self.n;
            let pen = lambda * weights[j];
            let old = beta[j];
            worst = worst.max(kkt_violation(g, old, pen));
            let new = soft_threshold(c * old + g, pen) / c;
            if new != old {
                r.scaled_add(old - new, &col);
                beta[j] = new;
            }
        }
        worst
    }

    fn max_violation(&self, lambda: f64, weights: &[f64], beta: &[f64], r: &Array1<f64>) -> f64 {
        let g = self.x.t().dot(r) / self.n;
        (0..self.p())
            .filter(|&j| self.col_sq[j] > 0.0)
            .map(|j| kkt_violation(g[j], beta[j], lambda * weights[j]))
            .fold(0.0, f64::max)
    }

    /// Minimizes from the warm start in `beta`.
    fn solve(&self, lambda: f64, weights: &[f64], beta: &mut [f64]) -> (bool, usize) {
        let mut r = self.residual(beta);
        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            sweeps += 1;
            let worst = self.sweep(0..self.p(), lambda, weights, beta, &mut r);
            if worst < KKT_TOLERANCE && self.max_violation(lambda, weights, beta, &r) <= KKT_TOLERANCE {
                return (true, sweeps);
            }
            if self.settle(lambda, weights, beta) {
                r = self.residual(beta);
                continue;
            }
            // fall back to cycling over the active set
            let active: Vec<usize> = (0..self.p()).filter(|&j| beta[j] != 0.0).collect();
            while sweeps < MAX_SWEEPS {
                sweeps += 1;
                if self.sweep(active.iter().copied(), lambda, weights, beta, &mut r) < KKT_TOLERANCE * 0.1 {
                    break;
                }
            }
        }
        let ok = self.max_violation(lambda, weights, beta, &r) <= KKT_TOLERANCE;
        (ok, sweeps)
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn kkt_violation(grad: f64, beta: f64, pen: f64) -> f64 {
    if beta > 0.0 {
        (grad - pen).abs()
    } else if beta < 0.0 {
        (grad + pen).abs()
    } else {
        (grad.abs() - pen).max(0.0)
    }
}

fn sparse_from_dense(ls: &LeastSquares<'_>, beta: &[f64]) -> SparseModel {
    let active: Vec<usize> = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
    let coefficients: Vec<f64> = active.iter().map(|&j| beta[j]).collect();
    let active = IndexSet::from_unsorted(active);
    let loss = ls.loss_of(&active, &coefficients);
    SparseModel { active, coefficients, loss }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("lambda must be positive, got {lambda}")))
    }
}

/// Plain rank-LASSO at a fixed `lambda`.
pub fn rank_lasso(ls: &LeastSquares<'_>, lambda: f64) -> Result<LassoFit> {
    weighted_lasso(ls, lambda, &vec![1.0; ls.p()])
}

/// Rank-LASSO with per-column penalty weights.
pub fn weighted_lasso(ls: &LeastSquares<'_>, lambda: f64, weights: &[f64]) -> Result<LassoFit> {
    check_lambda(lambda)?;
    if weights.len() != ls.p() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidConfig("weights must be positive, one per column".into()));
    }
    let problem = CdProblem::new(ls.dataset().x(), ls.pseudo().z.view());
    let mut beta = vec![0.0; ls.p()];
    let (converged, sweeps) = problem.solve(lambda, weights, &mut beta);
    Ok(LassoFit { model: sparse_from_dense(ls, &beta), converged, sweeps })
}

/// Zeroes coefficients with `|β_j| <= delta` and refits least squares on the
/// survivors.
pub fn threshold_lasso(ls: &LeastSquares<'_>, model: &SparseModel, delta: f64) -> Result<SparseModel> {
    if !(delta > 0.0) {
        return Err(Error::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    let keep: Vec<usize> = model
        .active
        .iter()
        .zip(&model.coefficients)
        .filter(|(_, b)| b.abs() > delta)
        .map(|(j, _)| j)
        .collect();
    ls.fit_on_support(&IndexSet::from_unsorted(keep))
}

/// Adaptive weights `1 / max(|β̃_j|, 1e-6)` over all columns.
pub fn adaptive_weights(pilot: &SparseModel, p: usize) -> Vec<f64> {
    pilot
        .to_dense(p)
        .into_iter()
        .map(|b| 1.0 / b.abs().max(PILOT_FLOOR))
        .collect()
}

/// Reweighted rank-LASSO from a pilot fit.
pub fn adaptive_lasso(ls: &LeastSquares<'_>, pilot: &SparseModel, lambda: f64) -> Result<LassoFit> {
    weighted_lasso(ls, lambda, &adaptive_weights(pilot, ls.p()))
}

/// Geometric grid from `λ_max` down to `min_ratio · λ_max`.
pub fn lambda_grid(lambda_max: f64, grid_size: usize, min_ratio: f64) -> Vec<f64> {
    if grid_size == 1 {
        return vec![lambda_max];
    }
    let step = min_ratio.ln() / (grid_size - 1) as f64;
    (0..grid_size).map(|i| lambda_max * (step * i as f64).exp()).collect()
}

/// Warm-started path over a strictly decreasing λ grid.
pub fn lasso_path(ls: &LeastSquares<'_>, lambdas: &[f64]) -> Result<LassoPath> {
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("lambda grid must be strictly decreasing".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    let problem = CdProblem::new(ls.dataset().x(), ls.pseudo().z.view());
    let weights = vec![1.0; ls.p()];
    let mut beta = vec![0.0; ls.p()];
    let mut converged = true;
    let mut solutions = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let (ok, _) = problem.solve(lambda, &weights, &mut beta);
        converged &= ok;
        solutions.push(sparse_from_dense(ls, &beta));
    }
    Ok(LassoPath {
        lambdas: lambdas.to_vec(),
        solutions,
        selected_lambda: *lambdas.last().unwrap_or(&0.0),
        converged,
    })
}

/// Seeded fold labels: a shuffled round-robin assignment.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut labels = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = pos % folds;
    }
    labels
}

fn rows_of(x: ArrayView2<'_, f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), x.ncols()).f());
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        let src = x.column(j);
        for (dst, &i) in col.iter_mut().zip(rows) {
            *dst = src[i];
        }
    }
    out
}

/// Rank-LASSO with λ chosen by K-fold cross-validation of the squared error
/// on the pseudo-response.
pub fn rank_lasso_cv(ls: &LeastSquares<'_>, options: &CvOptions) -> Result<CvLasso> {
    let n = ls.n();
    if options.folds < 2 || options.folds > n {
        return Err(Error::InvalidConfig(format!("cannot split {n} rows into {} folds", options.folds)));
    }
    if options.grid_size == 0 || !(options.min_ratio > 0.0 && options.min_ratio < 1.0) {
        return Err(Error::InvalidConfig("invalid lambda grid".into()));
    }
    let x = ls.dataset().x();
    let z = ls.pseudo().z.view();
    let weights = vec![1.0; ls.p()];
    let lambda_max = CdProblem::new(x, z).lambda_max(&weights);
    if lambda_max <= 0.0 {
        return Err(Error::InvalidConfig("pseudo-response is orthogonal to every column".into()));
    }
    let lambdas = lambda_grid(lambda_max, options.grid_size, options.min_ratio);
    let folds = fold_assignment(n, options.folds, options.seed);

    let mut sq_err = vec![0.0; lambdas.len()];
    let mut converged = true;
    for fold in 0..options.folds {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != fold).collect();
        let test: Vec<usize> = (0..n).filter(|&i| folds[i] == fold).collect();
        let x_train = rows_of(x, &train);
        let z_train: Array1<f64> = train.iter().map(|&i| z[i]).collect();
        let x_test = rows_of(x, &test);
        let z_test: Array1<f64> = test.iter().map(|&i| z[i]).collect();
        let problem = CdProblem::new(x_train.view(), z_train.view());
        let mut beta = vec![0.0; ls.p()];
        for (k, &lambda) in lambdas.iter().enumerate() {
            let (ok, _) = problem.solve(lambda, &weights, &mut beta);
            converged &= ok;
            let pred = x_test.dot(&Array1::from(beta.clone()));
            let err = &z_test - &pred;
            sq_err[k] += err.dot(&err) / test.len() as f64;
        }
    }
    let mean_errors: Vec<f64> = sq_err.iter().map(|e| e / options.folds as f64).collect();
    let best = mean_errors
        .iter()
        .enumerate()
        .fold(0, |best, (k, &e)| if e < mean_errors[best] { k } else { best });

    let mut path = lasso_path(ls, &lambdas)?;
    path.selected_lambda = lambdas[best];
    converged &= path.converged;
    path.converged = converged;
    let fit = LassoFit { model: path.solutions[best].clone(), converged, sweeps: 0 };
    Ok(CvLasso { fit, path, mean_errors, folds })
}
