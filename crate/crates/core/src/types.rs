//! Shared data model: datasets, index sets, sparse models and configuration
//! records.

use std::fmt;
use std::time::Duration;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ShapeBuilder};

use crate::error::{Error, Result};

/// A column-centered design matrix together with its response.
///
/// The design is stored column-major since every hot loop in the solver
/// walks whole columns.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    column_means: Array1<f64>,
    column_scales: Option<Array1<f64>>,
}

impl Dataset {
    /// Centers the columns of `x_raw` and keeps `y` unchanged.
    pub fn new(x_raw: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<Self> {
        Self::build(x_raw, y, false)
    }

    /// Centers and divides every non-constant column by its sample standard
    /// deviation. The scales are kept so coefficients can be mapped back.
    pub fn standardized(x_raw: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<Self> {
        Self::build(x_raw, y, true)
    }

    fn build(x_raw: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, standardize: bool) -> Result<Self> {
        let (n, p) = x_raw.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "x has {n} rows but y has length {}",
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::TooFewObservations(n));
        }
        if p == 0 {
            return Err(Error::NoPredictors);
        }
        if let Some(index) = x_raw.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "x", index });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "y", index });
        }

        let mut x = Array2::<f64>::zeros((n, p).f());
        x.assign(&x_raw);
        let mut column_means = Array1::<f64>::zeros(p);
        let mut scales = Array1::<f64>::ones(p);
        for (j, mut col) in x.columns_mut().into_iter().enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                // constant column: exact zeros so it is flagged as degenerate
                column_means[j] = first;
                col.fill(0.0);
                continue;
            }
            let mean = col.sum() / n as f64;
            col.mapv_inplace(|v| v - mean);
            // second pass removes the rounding residue of the first
            let drift = col.sum() / n as f64;
            col.mapv_inplace(|v| v - drift);
            column_means[j] = mean + drift;
            if standardize {
                let sd = (col.dot(&col) / (n - 1) as f64).sqrt();
                if sd > 0.0 {
                    col.mapv_inplace(|v| v / sd);
                    scales[j] = sd;
                }
            }
        }

        Ok(Self {
            x,
            y: y.to_owned(),
            column_means,
            column_scales: standardize.then_some(scales),
        })
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn column_means(&self) -> ArrayView1<'_, f64> {
        self.column_means.view()
    }

    /// Per-column scales when the dataset was standardized.
    pub fn column_scales(&self) -> Option<ArrayView1<'_, f64>> {
        self.column_scales.as_ref().map(|s| s.view())
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Whether column `j` was constant in the raw input.
    pub fn is_degenerate(&self, j: usize) -> bool {
        self.x.column(j).iter().all(|&v| v == 0.0)
    }

    /// Maps coefficients fitted on this dataset back to the raw column scale.
    pub fn original_scale(&self, model: &SparseModel) -> Vec<f64> {
        match &self.column_scales {
            None => model.coefficients.clone(),
            Some(scales) => model
                .active
                .iter()
                .zip(&model.coefficients)
                .map(|(j, b)| b / scales[j])
                .collect(),
        }
    }
}

/// Sorted set of distinct column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from arbitrary indices; rejects duplicates and indices
    /// outside `[0, p)`.
    pub fn new(mut indices: Vec<usize>, p: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidIndexSet("duplicate index".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= p {
                return Err(Error::InvalidIndexSet(format!("index {last} out of range for p = {p}")));
            }
        }
        Ok(Self { indices })
    }

    /// Sorts and deduplicates without a range check.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn full(p: usize) -> Self {
        Self { indices: (0..p).collect() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet { indices: out }
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            indices: self.iter().filter(|&j| !other.contains(j)).collect(),
        }
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            indices: self.iter().filter(|&j| other.contains(j)).collect(),
        }
    }

    /// Complement within `[0, p)`.
    pub fn complement(&self, p: usize) -> IndexSet {
        IndexSet {
            indices: (0..p).filter(|&j| !self.contains(j)).collect(),
        }
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|j| other.contains(j))
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

/// Coefficients stored densely on an active set; zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseModel {
    pub active: IndexSet,
    pub coefficients: Vec<f64>,
    pub loss: f64,
}

impl SparseModel {
    pub fn new(active: IndexSet, coefficients: Vec<f64>, loss: f64) -> Result<Self> {
        if active.len() != coefficients.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} active indices but {} coefficients",
                active.len(),
                coefficients.len()
            )));
        }
        Ok(Self { active, coefficients, loss })
    }

    pub fn support_size(&self) -> usize {
        self.active.len()
    }

    /// Coefficient of column `j` (zero when inactive).
    pub fn coefficient(&self, j: usize) -> f64 {
        match self.active.as_slice().binary_search(&j) {
            Ok(pos) => self.coefficients[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self, p: usize) -> Vec<f64> {
        let mut beta = vec![0.0; p];
        for (j, b) in self.active.iter().zip(&self.coefficients) {
            beta[j] = *b;
        }
        beta
    }
}

/// Knobs of a single fixed-size splicing run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplicingConfig {
    pub support_size: usize,
    pub k_max: usize,
    pub tau: f64,
    /// Outer iteration cap; `None` derives it from the initial loss.
    pub max_iterations: Option<usize>,
}

impl SplicingConfig {
    /// Defaults for support size `s` on an `n × p` problem:
    /// `k_max = min(s, 5)` and `tau = 0.01 · s · log p · log log n / n`.
    pub fn with_defaults(s: usize, n: usize, p: usize) -> Self {
        Self {
            support_size: s,
            k_max: s.clamp(1, 5),
            tau: default_tau(s, n, p),
            max_iterations: None,
        }
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        let upper = (n.saturating_sub(1)).min(p);
        if self.support_size == 0 || self.support_size > upper {
            return Err(Error::InvalidConfig(format!(
                "support size {} outside [1, {upper}]",
                self.support_size
            )));
        }
        if self.k_max == 0 || self.k_max > self.support_size {
            return Err(Error::InvalidConfig(format!(
                "k_max {} outside [1, {}]",
                self.k_max, self.support_size
            )));
        }
        if self.tau.is_nan() || self.tau < 0.0 {
            return Err(Error::InvalidConfig(format!("tau must be nonnegative, got {}", self.tau)));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_tau(s: usize, n: usize, p: usize) -> f64 {
    let loglog_n = (n as f64).ln().ln();
    let tau = 0.01 * s as f64 * (p as f64).ln() * loglog_n / n as f64;
    if tau.is_finite() {
        tau.max(1e-12)
    } else {
        1e-12
    }
}

/// One point of the support-size sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GicEntry {
    pub support_size: usize,
    pub gic_value: f64,
    pub model: SparseModel,
}

/// Outcome of the adaptive support-size search.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub selected: SparseModel,
    pub gic_path: Vec<GicEntry>,
    /// Outer splicing iterations, one entry per support size.
    pub splicing_iterations: Vec<usize>,
    pub wall_time: Duration,
}
