//! Replicated recovery experiments and runtime measurements.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::LeastSquares;
use crate::lasso::{self, CvOptions};
use crate::rank::rank_response;
use crate::selection::{default_s_max, rank_abess};
use crate::simgen::{generate, SimDesign};
use crate::types::{Dataset, FitReport, IndexSet, SplicingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    RankAbess,
    RankLasso,
    RankLassoCv,
    ThresholdedRankLasso,
    AdaptiveRankLasso,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::RankAbess,
        Method::RankLasso,
        Method::RankLassoCv,
        Method::ThresholdedRankLasso,
        Method::AdaptiveRankLasso,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::RankAbess => "rankabess",
            Method::RankLasso => "ranklasso",
            Method::RankLassoCv => "ranklasso-cv",
            Method::ThresholdedRankLasso => "t-ranklasso",
            Method::AdaptiveRankLasso => "a-ranklasso",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

/// Solver knobs shared by every replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOptions {
    pub s_max: Option<usize>,
    pub k_max: Option<usize>,
    pub tau: Option<f64>,
    pub standardize: bool,
    /// `c` in the fixed penalty `c · √(ln p / n)`.
    pub lasso_c: f64,
    pub cv_folds: usize,
    pub cv_grid: usize,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            s_max: None,
            k_max: None,
            tau: None,
            standardize: false,
            lasso_c: 0.5,
            cv_folds: 10,
            cv_grid: 50,
        }
    }
}

impl MethodOptions {
    /// Splicing knobs for size `s` with the overrides applied.
    pub fn splicing_config(&self, s: usize, n: usize, p: usize) -> SplicingConfig {
        let mut config = SplicingConfig::with_defaults(s, n, p);
        if let Some(k) = self.k_max {
            config.k_max = k.clamp(1, s.max(1));
        }
        if let Some(tau) = self.tau {
            config.tau = tau;
        }
        config
    }

    /// `s_max` after clamping to what the data supports.
    pub fn effective_s_max(&self, ls: &LeastSquares<'_>) -> usize {
        let (n, p) = (ls.n(), ls.p());
        let usable = (0..p).filter(|&j| !ls.cache().is_degenerate(j)).count();
        let s_max = self.s_max.unwrap_or_else(|| default_s_max(n, p));
        s_max.min(n - 1).min(p).min(usable).max(1)
    }
}

/// Runs the adaptive splicing search with the given options.
pub fn fit_rank_abess(ls: &LeastSquares<'_>, options: &MethodOptions) -> Result<FitReport> {
    let (n, p) = (ls.n(), ls.p());
    rank_abess(ls, options.effective_s_max(ls), |s| options.splicing_config(s, n, p))
}

/// Fits one method and returns its estimated support.
///
/// Baselines that hit the coordinate-descent sweep cap are reported as
/// errors so the harness can count them as failures.
pub fn select_support(method: Method, ls: &LeastSquares<'_>, options: &MethodOptions, seed: u64) -> Result<IndexSet> {
    let (n, p) = (ls.n(), ls.p());
    let lambda = lasso::default_lambda(options.lasso_c, n, p);
    let converged = |fit: lasso::LassoFit| {
        if fit.converged {
            Ok(fit.model)
        } else {
            Err(Error::InvalidConfig(format!("{method} did not converge")))
        }
    };
    let model = match method {
        Method::RankAbess => fit_rank_abess(ls, options)?.selected,
        Method::RankLasso => converged(lasso::rank_lasso(ls, lambda)?)?,
        Method::RankLassoCv => {
            let cv = CvOptions {
                folds: options.cv_folds,
                grid_size: options.cv_grid,
                seed,
                ..CvOptions::default()
            };
            converged(lasso::rank_lasso_cv(ls, &cv)?.fit)?
        }
        Method::ThresholdedRankLasso => {
            let pilot = converged(lasso::rank_lasso(ls, lambda)?)?;
            lasso::threshold_lasso(ls, &pilot, lambda)?
        }
        Method::AdaptiveRankLasso => {
            let pilot = converged(lasso::rank_lasso(ls, lambda)?)?;
            let scale = if pilot.coefficients.is_empty() {
                1.0
            } else {
                pilot.coefficients.iter().map(|b| b.abs()).sum::<f64>() / pilot.coefficients.len() as f64
            };
            converged(lasso::adaptive_lasso(ls, &pilot, lambda * scale)?)?
        }
    };
    Ok(model.active)
}

/// `(truth ⊆ estimate, estimate ⊆ truth, truth == estimate)`.
pub fn recovery_metrics(truth: &IndexSet, estimate: &IndexSet) -> (bool, bool, bool) {
    let active_in = truth.is_subset(estimate);
    let inactive_in = estimate.is_subset(truth);
    (active_in, inactive_in, active_in && inactive_in)
}

/// Per-method aggregate of a replicated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRecord {
    pub design: SimDesign,
    pub method: Method,
    pub active_hits: usize,
    pub inactive_hits: usize,
    pub exact_hits: usize,
    /// Successful replications; the denominator of the fractions.
    pub replications: usize,
    pub failures: usize,
    /// Fit times in seconds, ordered by replication. Empty when timing is off.
    pub times: Vec<f64>,
}

impl RecoveryRecord {
    fn fraction(&self, hits: usize) -> f64 {
        if self.replications == 0 {
            f64::NAN
        } else {
            hits as f64 / self.replications as f64
        }
    }

    pub fn active_cover(&self) -> f64 {
        self.fraction(self.active_hits)
    }

    pub fn inactive_cover(&self) -> f64 {
        self.fraction(self.inactive_hits)
    }

    pub fn exact(&self) -> f64 {
        self.fraction(self.exact_hits)
    }

    pub fn time_summary(&self) -> Option<TimeSummary> {
        TimeSummary::from_samples(&self.times)
    }
}

/// Mean and 5%/95% quantiles of a timing sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSummary {
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
}

impl TimeSummary {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
            q05: quantile(&sorted, 0.05),
            q95: quantile(&sorted, 0.95),
        })
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy)]
pub struct HarnessOptions {
    pub methods: MethodOptions,
    /// Worker threads for replications; `None` uses the global pool.
    pub threads: Option<usize>,
    pub record_time: bool,
    /// Strictly increasing map applied to every simulated response.
    pub transform: Option<fn(f64) -> f64>,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self { methods: MethodOptions::default(), threads: None, record_time: true, transform: None }
    }
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Scored { active_in: bool, inactive_in: bool, exact: bool, seconds: f64 },
    Failed,
}

/// Seed for the cross-validation folds of one replication.
pub fn fold_seed(seed: u64, rep: u64) -> u64 {
    seed ^ rep.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn replicate(design: &SimDesign, methods: &[Method], rep: u64, options: &HarnessOptions) -> Result<Vec<Outcome>> {
    let mut instance = generate(design, rep)?;
    if let Some(f) = options.transform {
        instance.y.mapv_inplace(f);
    }
    let dataset = if options.methods.standardize {
        Dataset::standardized(instance.x.view(), instance.y.view())?
    } else {
        Dataset::new(instance.x.view(), instance.y.view())?
    };
    let pseudo = rank_response(dataset.y())?;
    let ls = LeastSquares::new(&dataset, &pseudo)?;
    let fold_seed = fold_seed(design.seed, rep);

    Ok(methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let estimate = select_support(method, &ls, &options.methods, fold_seed);
            let seconds = start.elapsed().as_secs_f64();
            match estimate {
                Ok(est) => {
                    let (active_in, inactive_in, exact) = recovery_metrics(&instance.truth.beta_support, &est);
                    Outcome::Scored { active_in, inactive_in, exact, seconds }
                }
                Err(_) => Outcome::Failed,
            }
        })
        .collect())
}

/// Generates `replications` datasets from `design`, fits every method on
/// each and aggregates the recovery indicators. Results do not depend on the
/// thread count.
pub fn run_experiment(
    design: &SimDesign,
    methods: &[Method],
    replications: usize,
    options: &HarnessOptions,
) -> Result<Vec<RecoveryRecord>> {
    if replications == 0 {
        return Err(Error::InvalidConfig("need at least one replication".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods requested".into()));
    }
    design.validate()?;

    let work = || -> Result<Vec<Vec<Outcome>>> {
        (0..replications as u64)
            .into_par_iter()
            .map(|rep| replicate(design, methods, rep, options))
            .collect()
    };
    let outcomes = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    Ok(methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let mut record = RecoveryRecord {
                design: *design,
                method,
                active_hits: 0,
                inactive_hits: 0,
                exact_hits: 0,
                replications: 0,
                failures: 0,
                times: Vec::new(),
            };
            for rep in &outcomes {
                match rep[m] {
                    Outcome::Scored { active_in, inactive_in, exact, seconds } => {
                        record.replications += 1;
                        record.active_hits += usize::from(active_in);
                        record.inactive_hits += usize::from(inactive_in);
                        record.exact_hits += usize::from(exact);
                        if options.record_time {
                            record.times.push(seconds);
                        }
                    }
                    Outcome::Failed => record.failures += 1,
                }
            }
            record
        })
        .collect())
}

/// Timing of one method on one design point.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub design: SimDesign,
    pub method: Method,
    pub times: Vec<f64>,
}

impl TimingRecord {
    pub fn summary(&self) -> Option<TimeSummary> {
        TimeSummary::from_samples(&self.times)
    }
}

/// Times each method on `replications` datasets, sequentially on the
/// calling thread. Failed fits are skipped.
pub fn run_timing(
    design: &SimDesign,
    methods: &[Method],
    replications: usize,
    options: &MethodOptions,
) -> Result<Vec<TimingRecord>> {
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods requested".into()));
    }
    let mut records: Vec<TimingRecord> = methods
        .iter()
        .map(|&method| TimingRecord { design: *design, method, times: Vec::with_capacity(replications) })
        .collect();
    for rep in 0..replications as u64 {
        let instance = generate(design, rep)?;
        let dataset = Dataset::new(instance.x.view(), instance.y.view())?;
        let pseudo = rank_response(dataset.y())?;
        let ls = LeastSquares::new(&dataset, &pseudo)?;
        for record in records.iter_mut() {
            let start = Instant::now();
            if select_support(record.method, &ls, options, fold_seed(design.seed, rep)).is_ok() {
                record.times.push(start.elapsed().as_secs_f64());
            }
        }
    }
    Ok(records)
}
