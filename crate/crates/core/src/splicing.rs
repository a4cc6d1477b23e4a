//! Fixed-size best subset search by iterative splicing.
//!
//! Starting from the `s` columns most correlated with the pseudo-response,
//! each outer iteration tries to exchange the `k` least useful active columns
//! for the `k` most promising inactive ones, for `k = 1..=k_max`, and keeps
//! the first exchange whose refit lowers the loss by more than `tau`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::kernel::{CovarianceCache, LeastSquares};
use crate::types::{IndexSet, SparseModel, SplicingConfig};

/// Floor on the derived iteration cap.
const MIN_ITERATION_CAP: usize = 50;

/// An accepted exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Splice {
    pub k: usize,
    pub loss_before: f64,
    pub loss_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpliceTrace {
    pub iterations: usize,
    pub accepted_splices: Vec<Splice>,
    pub converged: bool,
    pub hit_iteration_cap: bool,
}

/// The `s` columns with the largest `|ρ_j|`, ties to the smaller index.
/// Degenerate columns come last.
pub fn initialize_active_set(cache: &CovarianceCache, s: usize) -> IndexSet {
    let p = cache.rho.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        cache
            .is_degenerate(a)
            .cmp(&cache.is_degenerate(b))
            .then_with(|| cache.rho[b].abs().total_cmp(&cache.rho[a].abs()))
            .then_with(|| a.cmp(&b))
    });
    order.truncate(s.min(p));
    IndexSet::from_unsorted(order)
}

/// Returns `(S_k1, S_k2)`: the `k` active columns with the smallest backward
/// sacrifice and the `k` inactive columns with the largest forward
/// sacrifice. Ties go to the smaller index.
///
/// `S_k2` is `None` when fewer than `k` candidates are offered.
pub fn splicing_sets(
    backward: &[(usize, f64)],
    forward: &[(usize, f64)],
    k: usize,
) -> Option<(IndexSet, IndexSet)> {
    if k > backward.len() || k > forward.len() {
        return None;
    }
    let drop = select_k(backward, k, |a, b| a.total_cmp(&b));
    let add = select_k(forward, k, |a, b| b.total_cmp(&a));
    Some((drop, add))
}

fn select_k(
    scores: &[(usize, f64)],
    k: usize,
    order: impl Fn(f64, f64) -> Ordering,
) -> IndexSet {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| order(a.1, b.1).then_with(|| a.0.cmp(&b.0)));
    IndexSet::from_unsorted(sorted.into_iter().take(k).map(|(j, _)| j).collect())
}

/// Runs the splicing search for a single support size.
///
/// The returned model always has exactly `config.support_size` columns.
/// Hitting the iteration cap is reported in the trace, not as an error.
pub fn rank_bess(ls: &LeastSquares<'_>, config: &SplicingConfig) -> Result<(SparseModel, SpliceTrace)> {
    let (n, p) = (ls.n(), ls.p());
    config.validate(n, p)?;
    let cache = ls.cache();
    let usable = (0..p).filter(|&j| !cache.is_degenerate(j)).count();
    if config.support_size > usable {
        return Err(Error::InvalidConfig(format!(
            "support size {} exceeds the {usable} non-constant columns",
            config.support_size
        )));
    }

    let mut model = ls.fit_on_support(&initialize_active_set(cache, config.support_size))?;
    let tau = config.tau;
    let max_iterations = config
        .max_iterations
        .unwrap_or_else(|| derived_iteration_cap(model.loss, tau));

    let mut trace = SpliceTrace::default();
    while trace.iterations < max_iterations {
        trace.iterations += 1;
        let backward = ls.backward_sacrifices(&model);
        let forward: Vec<(usize, f64)> = ls
            .forward_sacrifices(&model)
            .into_iter()
            .filter(|&(j, _)| !cache.is_degenerate(j))
            .collect();

        let mut accepted = None;
        for k in 1..=config.k_max {
            let Some((drop, add)) = splicing_sets(&backward, &forward, k) else {
                break;
            };
            let candidate = model.active.difference(&drop).union(&add);
            let Ok(fit) = ls.fit_on_support(&candidate) else {
                continue;
            };
            if model.loss - fit.loss > tau {
                accepted = Some((k, fit));
                break;
            }
        }

        match accepted {
            Some((k, fit)) if fit.active != model.active => {
                trace.accepted_splices.push(Splice {
                    k,
                    loss_before: model.loss,
                    loss_after: fit.loss,
                });
                model = fit;
            }
            _ => {
                trace.converged = true;
                break;
            }
        }
    }
    trace.hit_iteration_cap = !trace.converged;
    Ok((model, trace))
}

/// `max(50, ⌈ln(initial_loss / tau)⌉)`.
pub fn derived_iteration_cap(initial_loss: f64, tau: f64) -> usize {
    let ratio = (initial_loss / tau).ln().ceil();
    if ratio.is_finite() && ratio > MIN_ITERATION_CAP as f64 {
        ratio as usize
    } else {
        MIN_ITERATION_CAP
    }
}
