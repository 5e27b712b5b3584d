//! The symmetrized data aggregation filter: split, screen, refit, rank,
//! threshold.

mod diagnostics;
mod pipeline;
mod ranking;
mod rsda;
mod split;
mod threshold;
mod two_sample;

pub use diagnostics::{symmetry_diagnostic, SymmetryPoint};
pub use pipeline::{analyze_whitened, run_sda, SdaFilter, SdaOptions, SdaOutcome, SplitFit};
pub use ranking::{ranking_stats, RankingResult, T1Mode};
pub(crate) use rsda::run_rsda_with;
pub use rsda::{aggregate_selections, run_rsda, AggregationResult, DEFAULT_RSDA_RUNS};
pub use split::{default_n1, split, SplitPlan};
pub use threshold::{sda_threshold, Flags, SelectionResult};
pub use two_sample::{run_two_sample, run_two_sample_rsda, two_sample_precision, TwoSampleOutcome, TwoSampleSpec};

use crate::error::{invalid, Result};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        invalid(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}
