//! Rank-based best subset selection for high-dimensional single index
//! models.
//!
//! The response is replaced by its centered ranks `z = r/n - 1/2`, which
//! turns support recovery in `y = g(bᵀx, e)` into an ℓ0-constrained least
//! squares problem on `z`. That problem is attacked with a splicing search
//! ([`rank_bess`]) for each support size and the size is chosen by a
//! generalized information criterion ([`rank_abess`]).

pub mod error;
pub mod harness;
pub mod kernel;
pub mod lasso;
pub mod rank;
pub mod selection;
pub mod simgen;
pub mod splicing;
pub mod types;

pub use error::{Error, Result};
pub use kernel::{CovarianceCache, LeastSquares};
pub use rank::{rank_response, PseudoResponse};
pub use selection::{default_s_max, gic, rank_abess};
pub use splicing::{initialize_active_set, rank_bess, splicing_sets, SpliceTrace};
pub use types::{Dataset, FitReport, GicEntry, IndexSet, SparseModel, SplicingConfig};
