//! Least-squares core: loss evaluation, restricted refits and the two
//! sacrifice vectors that drive splicing.
//!
//! The loss is `l(β) = ‖z - Xβ‖² / (2n)`. Under this normalization the
//! backward sacrifice `C_jj β_j² / 2` and the forward sacrifice
//! `(X_jᵀ r / n)² / (2 C_jj)` are exact loss differences at a stationary
//! restricted fit.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::rank::PseudoResponse;
use crate::types::{Dataset, IndexSet, SparseModel};

/// Relative pivot floor of the Cholesky factorization.
const PIVOT_FLOOR: f64 = 1e-13;
/// Ridge added on the single retry, relative to the mean active `C_jj`.
const JITTER: f64 = 1e-10;

/// Per-column summaries shared by every splice.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceCache {
    /// `C_jj = ‖X_j‖² / n`; zero flags a degenerate column.
    pub gram_diag: Array1<f64>,
    /// `q_j = X_jᵀ z / n`.
    pub q: Array1<f64>,
    /// Correlation between `X_j` and `z`; zero for degenerate columns.
    pub rho: Array1<f64>,
}

impl CovarianceCache {
    pub fn new(dataset: &Dataset, pseudo: &PseudoResponse) -> Self {
        let n = dataset.n() as f64;
        let x = dataset.x();
        let xtz = x.t().dot(&pseudo.z);
        let z_norm = pseudo.sum_sq.sqrt();
        let mut gram_diag = Array1::zeros(dataset.p());
        let mut rho = Array1::zeros(dataset.p());
        for (j, col) in x.columns().into_iter().enumerate() {
            let sq = col.dot(&col);
            gram_diag[j] = sq / n;
            let denom = sq.sqrt() * z_norm;
            if denom > 0.0 {
                rho[j] = (xtz[j] / denom).clamp(-1.0, 1.0);
            }
        }
        Self { gram_diag, q: xtz / n, rho }
    }

    pub fn is_degenerate(&self, j: usize) -> bool {
        self.gram_diag[j] <= 0.0
    }
}

/// Least-squares view of a dataset and its pseudo-response.
#[derive(Debug, Clone)]
pub struct LeastSquares<'a> {
    dataset: &'a Dataset,
    pseudo: &'a PseudoResponse,
    cache: CovarianceCache,
}

impl<'a> LeastSquares<'a> {
    pub fn new(dataset: &'a Dataset, pseudo: &'a PseudoResponse) -> Result<Self> {
        if dataset.n() != pseudo.n() {
            return Err(Error::DimensionMismatch(format!(
                "dataset has {} rows but pseudo-response has {}",
                dataset.n(),
                pseudo.n()
            )));
        }
        let cache = CovarianceCache::new(dataset, pseudo);
        Ok(Self { dataset, pseudo, cache })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn pseudo(&self) -> &'a PseudoResponse {
        self.pseudo
    }

    pub fn cache(&self) -> &CovarianceCache {
        &self.cache
    }

    pub fn n(&self) -> usize {
        self.dataset.n()
    }

    pub fn p(&self) -> usize {
        self.dataset.p()
    }

    /// `z - X_A β`.
    pub fn residual(&self, active: &IndexSet, coefficients: &[f64]) -> Array1<f64> {
        let x = self.dataset.x();
        let mut r = self.pseudo.z.clone();
        for (j, &b) in active.iter().zip(coefficients) {
            if b != 0.0 {
                r.scaled_add(-b, &x.column(j));
            }
        }
        r
    }

    pub fn loss_of(&self, active: &IndexSet, coefficients: &[f64]) -> f64 {
        let r = self.residual(active, coefficients);
        r.dot(&r) / (2.0 * self.n() as f64)
    }

    /// Recomputes the loss from the model's coefficients.
    pub fn evaluate_loss(&self, model: &SparseModel) -> f64 {
        self.loss_of(&model.active, &model.coefficients)
    }

    /// Least-squares fit restricted to `active`: solves `C_AA β = q_A`.
    pub fn fit_on_support(&self, active: &IndexSet) -> Result<SparseModel> {
        let s = active.len();
        if s == 0 {
            let loss = self.pseudo.sum_sq / (2.0 * self.n() as f64);
            return SparseModel::new(IndexSet::empty(), Vec::new(), loss);
        }
        if s >= self.n() {
            return Err(Error::InvalidConfig(format!(
                "support of size {s} needs more than {} observations",
                self.n()
            )));
        }
        if active.iter().any(|j| self.cache.is_degenerate(j)) {
            return Err(Error::SingularSystem { size: s });
        }
        let gram = self.restricted_gram(active);
        let rhs: Vec<f64> = active.iter().map(|j| self.cache.q[j]).collect();
        let coefficients = solve_spd(&gram, &rhs, s).or_else(|| {
            let mean_diag = active.iter().map(|j| self.cache.gram_diag[j]).sum::<f64>() / s as f64;
            let ridge = JITTER * if mean_diag > 0.0 { mean_diag } else { 1.0 };
            let mut jittered = gram.clone();
            for i in 0..s {
                jittered[i * s + i] += ridge;
            }
            solve_spd(&jittered, &rhs, s)
        });
        let coefficients = coefficients.ok_or(Error::SingularSystem { size: s })?;
        let loss = self.loss_of(active, &coefficients);
        SparseModel::new(active.clone(), coefficients, loss)
    }

    fn restricted_gram(&self, active: &IndexSet) -> Vec<f64> {
        let s = active.len();
        let n = self.n() as f64;
        let x = self.dataset.x();
        let idx = active.as_slice();
        let mut gram = vec![0.0; s * s];
        for a in 0..s {
            gram[a * s + a] = self.cache.gram_diag[idx[a]];
            let col_a = x.column(idx[a]);
            for b in 0..a {
                let v = col_a.dot(&x.column(idx[b])) / n;
                gram[a * s + b] = v;
                gram[b * s + a] = v;
            }
        }
        gram
    }

    /// `ξ_j = C_jj β_j² / 2` for each active `j`.
    pub fn backward_sacrifices(&self, model: &SparseModel) -> Vec<(usize, f64)> {
        model
            .active
            .iter()
            .zip(&model.coefficients)
            .map(|(j, &b)| (j, 0.5 * self.cache.gram_diag[j] * b * b))
            .collect()
    }

    /// `ζ_j = (X_jᵀ r / n)² / (2 C_jj)` for each inactive `j`, from a single
    /// residual pass. Degenerate columns score zero.
    pub fn forward_sacrifices(&self, model: &SparseModel) -> Vec<(usize, f64)> {
        let r = self.residual(&model.active, &model.coefficients);
        let grad = self.gradient(r.view());
        model
            .active
            .complement(self.p())
            .iter()
            .map(|j| {
                let c = self.cache.gram_diag[j];
                let zeta = if c > 0.0 { grad[j] * grad[j] / (2.0 * c) } else { 0.0 };
                (j, zeta)
            })
            .collect()
    }

    /// `Xᵀ r / n`.
    pub fn gradient(&self, residual: ArrayView1<'_, f64>) -> Array1<f64> {
        self.dataset.x().t().dot(&residual) / self.n() as f64
    }
}

/// Cholesky solve of a row-major `s × s` symmetric system. Returns `None`
/// when a pivot falls below the relative floor.
fn solve_spd(a: &[f64], b: &[f64], s: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..=i {
            let mut sum = a[i * s + j];
            for k in 0..j {
                sum -= l[i * s + k] * l[j * s + k];
            }
            if i == j {
                let floor = PIVOT_FLOOR * a[i * s + i].abs();
                if !sum.is_finite() || sum <= floor || sum <= 0.0 {
                    return None;
                }
                l[i * s + i] = sum.sqrt();
            } else {
                l[i * s + j] = sum / l[j * s + j];
            }
        }
    }
    let mut y = vec![0.0; s];
    for i in 0..s {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * s + k] * y[k];
        }
        y[i] = sum / l[i * s + i];
    }
    let mut x = vec![0.0; s];
    for i in (0..s).rev() {
        let mut sum = y[i];
        for k in i + 1..s {
            sum -= l[k * s + i] * x[k];
        }
        x[i] = sum / l[i * s + i];
    }
    Some(x)
}
