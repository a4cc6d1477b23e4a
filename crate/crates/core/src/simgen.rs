//! Seeded synthetic single-index data.
//!
//! Rows are drawn i.i.d. from `N(0, Σ)` with one of three covariance
//! structures, the response is `g(xᵀb) + e` for a linear or exponential
//! link, and `e` is standard Gaussian or standard Cauchy. Every replication
//! draws from its own ChaCha stream, so replications can run in any order.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::types::IndexSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Covariance {
    Independent,
    /// `Σ_ij = ρ^|i-j|`.
    Exponential(f64),
    /// `Σ_ij = ρ` off the diagonal, 1 on it.
    Equicorrelated(f64),
}

impl Covariance {
    pub fn rho(&self) -> f64 {
        match *self {
            Covariance::Independent => 0.0,
            Covariance::Exponential(r) | Covariance::Equicorrelated(r) => r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Covariance::Independent => "independent",
            Covariance::Exponential(_) => "exponential",
            Covariance::Equicorrelated(_) => "equicorrelated",
        }
    }

    /// Builds a structure from its name and ρ (ignored for `independent`).
    pub fn from_name(name: &str, rho: f64) -> Result<Self> {
        match name {
            "independent" => Ok(Covariance::Independent),
            "exponential" | "ar1" => Ok(Covariance::Exponential(rho)),
            "equicorrelated" | "constant" => Ok(Covariance::Equicorrelated(rho)),
            other => Err(Error::InvalidDesign(format!("unknown covariance structure `{other}`"))),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        match *self {
            Covariance::Independent => 0.0,
            Covariance::Exponential(r) => r.powi(i.abs_diff(j) as i32),
            Covariance::Equicorrelated(r) => r,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        let rho = self.rho();
        if !(rho > -1.0 && rho < 1.0) {
            return Err(Error::InvalidDesign(format!("rho must lie in (-1, 1), got {rho}")));
        }
        if let Covariance::Equicorrelated(r) = self {
            if 1.0 + (p as f64 - 1.0) * r <= 0.0 {
                return Err(Error::InvalidDesign(format!(
                    "equicorrelation {r} is not positive definite for p = {p}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Linear,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorLaw {
    Gaussian,
    Cauchy,
}

impl Link {
    pub fn apply(&self, index: f64) -> f64 {
        match self {
            Link::Linear => index,
            Link::Exponential => index.exp(),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Linear => "linear",
            Link::Exponential => "exponential",
        })
    }
}

impl FromStr for Link {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Link::Linear),
            "exponential" | "exp" => Ok(Link::Exponential),
            other => Err(Error::InvalidDesign(format!("unknown link `{other}`"))),
        }
    }
}

impl fmt::Display for ErrorLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorLaw::Gaussian => "gaussian",
            ErrorLaw::Cauchy => "cauchy",
        })
    }
}

impl FromStr for ErrorLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(ErrorLaw::Gaussian),
            "cauchy" => Ok(ErrorLaw::Cauchy),
            other => Err(Error::InvalidDesign(format!("unknown error law `{other}`"))),
        }
    }
}

impl ErrorLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ErrorLaw::Gaussian => rng.sample(StandardNormal),
            ErrorLaw::Cauchy => Cauchy::new(0.0, 1.0).expect("unit Cauchy").sample(rng),
        }
    }
}

/// One point of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub sparsity: usize,
    pub signal: f64,
    pub covariance: Covariance,
    pub link: Link,
    pub error: ErrorLaw,
    pub seed: u64,
}

impl SimDesign {
    /// The standard design point: p = 2000, ten coefficients equal to 2.
    pub fn reference_design(n: usize, covariance: Covariance, link: Link, error: ErrorLaw, seed: u64) -> Self {
        Self { n, p: 2000, sparsity: 10, signal: 2.0, covariance, link, error, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidDesign(format!("n must be at least 2, got {}", self.n)));
        }
        if self.p == 0 {
            return Err(Error::InvalidDesign("p must be positive".into()));
        }
        if self.sparsity > self.p {
            return Err(Error::InvalidDesign(format!(
                "sparsity {} exceeds p = {}",
                self.sparsity, self.p
            )));
        }
        if !self.signal.is_finite() {
            return Err(Error::InvalidDesign("signal must be finite".into()));
        }
        self.covariance.validate(self.p)
    }
}

/// True coefficients of a simulated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta_support: IndexSet,
    pub beta_values: Vec<f64>,
}

impl GroundTruth {
    pub fn new(p: usize, sparsity: usize, signal: f64) -> Result<Self> {
        let beta_support = true_support(p, sparsity)?;
        Ok(Self { beta_values: vec![signal; beta_support.len()], beta_support })
    }

    pub fn index(&self, row: ArrayView1<'_, f64>) -> f64 {
        self.beta_support
            .iter()
            .zip(&self.beta_values)
            .map(|(j, b)| row[j] * b)
            .sum()
    }
}

/// Zero-based positions of the nonzero coefficients.
///
/// For `p >= 200` the points are equally spaced between the 10th and 200th
/// columns (1-based) and rounded. Smaller `p` uses the window
/// `[p/20, p/5]`, widened to the right (then left) until it holds
/// `sparsity` columns.
pub fn true_support(p: usize, sparsity: usize) -> Result<IndexSet> {
    if sparsity > p {
        return Err(Error::InvalidDesign(format!("sparsity {sparsity} exceeds p = {p}")));
    }
    if sparsity == 0 {
        return Ok(IndexSet::empty());
    }
    let (lo, hi) = if p >= 200 {
        (10usize, 200usize)
    } else {
        let lo = ((p as f64 / 20.0).round() as usize).max(1);
        let mut hi = ((p as f64 / 5.0).round() as usize).max(lo + sparsity - 1);
        let mut lo = lo;
        if hi > p {
            hi = p;
            lo = p + 1 - sparsity;
        }
        (lo, hi)
    };
    if hi - lo + 1 < sparsity {
        return Err(Error::InvalidDesign(format!(
            "cannot place {sparsity} coefficients in columns {lo}..={hi}"
        )));
    }
    let indices: Vec<usize> = if sparsity == 1 {
        vec![lo - 1]
    } else {
        let step = (hi - lo) as f64 / (sparsity - 1) as f64;
        (0..sparsity)
            .map(|k| (lo as f64 + step * k as f64).round() as usize - 1)
            .collect()
    };
    IndexSet::new(indices, p)
}

/// RNG for replication `stream` of a master seed.
pub fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of design point `index` in a grid run under one master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0xD1B5_4A32_D192_ED03);
    rng.set_stream(index);
    rng.random::<u64>()
}

/// Fills one predictor row from `N(0, Σ)` using a factor representation:
/// an AR(1) recursion for the exponential structure and a common factor for
/// equicorrelation.
pub fn sample_row<R: Rng + ?Sized>(covariance: &Covariance, row: &mut [f64], rng: &mut R) {
    let p = row.len();
    match *covariance {
        Covariance::Independent => {
            for v in row.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
        }
        Covariance::Exponential(rho) => {
            let innovation = (1.0 - rho * rho).sqrt();
            let mut prev: f64 = rng.sample(StandardNormal);
            row[0] = prev;
            for v in row.iter_mut().skip(1) {
                let e: f64 = rng.sample(StandardNormal);
                prev = rho * prev + innovation * e;
                *v = prev;
            }
        }
        Covariance::Equicorrelated(rho) if rho >= 0.0 => {
            let factor: f64 = rng.sample(StandardNormal);
            let (a, b) = ((1.0 - rho).sqrt(), rho.sqrt());
            for v in row.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                *v = b * factor + a * e;
            }
        }
        Covariance::Equicorrelated(rho) => {
            // x = a·e + c·(Σ e)·1 with a² = 1 - ρ and 2ac + p c² = ρ
            let a = (1.0 - rho).sqrt();
            let c = (-a + (a * a + p as f64 * rho).sqrt()) / p as f64;
            let mut total = 0.0;
            for v in row.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                total += e;
                *v = e;
            }
            for v in row.iter_mut() {
                *v = a * *v + c * total;
            }
        }
    }
}

/// Draws an `n × p` design.
pub fn sample_design<R: Rng + ?Sized>(design: &SimDesign, rng: &mut R) -> Result<Array2<f64>> {
    design.validate()?;
    let mut x = Array2::zeros((design.n, design.p));
    for mut row in x.rows_mut() {
        sample_row(&design.covariance, row.as_slice_mut().expect("row-major"), rng);
    }
    Ok(x)
}

/// `g(xᵀb) + e` for a given noise draw.
pub fn response_from(index: f64, link: Link, noise: f64) -> f64 {
    link.apply(index) + noise
}

pub fn sample_response<R: Rng + ?Sized>(
    row: ArrayView1<'_, f64>,
    truth: &GroundTruth,
    link: Link,
    error: ErrorLaw,
    rng: &mut R,
) -> f64 {
    response_from(truth.index(row), link, error.sample(rng))
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct SimInstance {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub truth: GroundTruth,
}

/// Draws replication `replication` of `design`. Identical inputs give
/// bitwise-identical instances.
pub fn generate(design: &SimDesign, replication: u64) -> Result<SimInstance> {
    design.validate()?;
    let truth = GroundTruth::new(design.p, design.sparsity, design.signal)?;
    let mut rng = replication_rng(design.seed, replication);
    let x = sample_design(design, &mut rng)?;
    let y = x
        .rows()
        .into_iter()
        .map(|row| sample_response(row, &truth, design.link, design.error, &mut rng))
        .collect();
    Ok(SimInstance { x, y, truth })
}
