//! Support-size selection over a sweep of splicing fits, scored by the
//! generalized information criterion
//! `GIC = n · ln(loss) + |A| · ln(p) · ln(ln(n))`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::kernel::LeastSquares;
use crate::splicing::rank_bess;
use crate::types::{FitReport, GicEntry, SparseModel, SplicingConfig};

/// Guards `ln` against a perfect fit.
pub const LOSS_FLOOR: f64 = 1e-300;

pub fn gic(model: &SparseModel, n: usize, p: usize) -> f64 {
    let penalty = (p as f64).ln() * (n as f64).ln().ln();
    n as f64 * model.loss.max(LOSS_FLOOR).ln() + model.support_size() as f64 * penalty
}

/// `max(1, ⌊min(√(n / (ln p · ln ln n)), p)⌋)`.
pub fn default_s_max(n: usize, p: usize) -> usize {
    let denom = (p as f64).ln() * (n as f64).ln().ln();
    let ratio = (n as f64 / denom).sqrt();
    let bound = if ratio.is_nan() { p as f64 } else { ratio.min(p as f64) };
    (bound.floor() as usize).max(1)
}

/// Fits every support size in `1..=s_max` and keeps the GIC minimizer,
/// ties to the smaller size. `config_for` supplies the splicing knobs for
/// each size.
pub fn rank_abess<F>(ls: &LeastSquares<'_>, s_max: usize, config_for: F) -> Result<FitReport>
where
    F: Fn(usize) -> SplicingConfig,
{
    let (n, p) = (ls.n(), ls.p());
    if n < 3 {
        return Err(Error::InvalidConfig("model selection needs n >= 3".into()));
    }
    if s_max == 0 || s_max > (n - 1).min(p) {
        return Err(Error::InvalidConfig(format!(
            "s_max {s_max} outside [1, {}]",
            (n - 1).min(p)
        )));
    }

    let start = Instant::now();
    let mut gic_path = Vec::with_capacity(s_max);
    let mut splicing_iterations = Vec::with_capacity(s_max);
    for s in 1..=s_max {
        let config = config_for(s);
        if config.support_size != s {
            return Err(Error::InvalidConfig(format!(
                "config for size {s} has support size {}",
                config.support_size
            )));
        }
        let (model, trace) = rank_bess(ls, &config)?;
        splicing_iterations.push(trace.iterations);
        gic_path.push(GicEntry {
            support_size: s,
            gic_value: gic(&model, n, p),
            model,
        });
    }

    let selected = select_minimum(&gic_path).model.clone();
    Ok(FitReport {
        selected,
        gic_path,
        splicing_iterations,
        wall_time: start.elapsed(),
    })
}

/// Smallest GIC; earlier (smaller) sizes win ties.
pub fn select_minimum(path: &[GicEntry]) -> &GicEntry {
    path.iter()
        .reduce(|best, e| {
            if e.gic_value < best.gic_value
                || (e.gic_value == best.gic_value && e.support_size < best.support_size)
            {
                e
            } else {
                best
            }
        })
        .expect("empty GIC path")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::IndexSet;

    fn model_with(size: usize, loss: f64) -> SparseModel {
        SparseModel::new(IndexSet::full(size), vec![0.0; size], loss).unwrap()
    }

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn gic_of_unit_loss_empty_model_is_zero() {
        assert_eq!(gic(&model_with(0, 1.0), 100, 50), 0.0);
    }

    #[test]
    fn gic_penalty_is_linear() {
        let a = gic(&model_with(3, 0.2), 100, 50);
        let b = gic(&model_with(4, 0.2), 100, 50);
        let step = 50f64.ln() * 100f64.ln().ln();
        assert!(rel_close(b - a, step));
    }

    #[test]
    fn gic_reference_value() {
        // 100·ln 0.2 = -160.94379124341003, ln 50 = 3.912023005428146,
        // ln ln 100 = 1.5271796258079011
        let expected = -160.94379124341003 + 3.0 * 3.912023005428146 * 1.5271796258079011;
        assert!(rel_close(gic(&model_with(3, 0.2), 100, 50), expected));
    }

    #[test]
    fn gic_floors_perfect_fit() {
        let v = gic(&model_with(2, 0.0), 10, 5);
        assert!(v.is_finite() && v < -6000.0);
    }

    #[test]
    fn s_max_reference_values() {
        // √(1000 / (ln 2000 · ln ln 1000)) = 8.25...
        assert_eq!(default_s_max(1000, 2000), 8);
        assert_eq!(default_s_max(1000, 1), 1);
        assert_eq!(default_s_max(3, 1_000_000), 1);
        assert_eq!(default_s_max(10_000, 3), 3);
    }

    #[test]
    fn ties_prefer_smaller_support() {
        let path = vec![
            GicEntry { support_size: 1, gic_value: 2.0, model: model_with(1, 1.0) },
            GicEntry { support_size: 2, gic_value: -1.0, model: model_with(2, 1.0) },
            GicEntry { support_size: 3, gic_value: -1.0, model: model_with(3, 1.0) },
        ];
        assert_eq!(select_minimum(&path).support_size, 2);
    }
}
