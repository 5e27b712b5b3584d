use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::pipeline::{SdaFilter, SdaOptions, SplitFit};
use super::threshold::SelectionResult;
use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::estimation::PrecisionSpec;
use crate::rng::stream_rng;

pub const DEFAULT_RSDA_RUNS: usize = 11;

/// Stability-refined selection over `B` random splits.
#[derive(Debug, Clone)]
pub struct AggregationResult {
    pub runs: Vec<SelectionResult>,
    /// Features selected in more than `⌈B/2⌉` runs.
    pub majority_set: Vec<usize>,
    /// Zero-based index of the run agreeing most with the majority set.
    pub chosen_run: usize,
    pub final_selection: SelectionResult,
    pub final_fit: SplitFit,
}

/// Majority set `{j : count_j > ⌈B/2⌉}` and the first run maximizing
/// `|A_k ∩ A_v| + |A_kᶜ ∩ A_vᶜ|`.
pub fn aggregate_selections(sets: &[Vec<usize>], p: usize) -> (Vec<usize>, usize) {
    let b = sets.len();
    let mut counts = vec![0usize; p];
    for set in sets {
        for &j in set {
            counts[j] += 1;
        }
    }
    let cut = b.div_ceil(2);
    let majority: Vec<usize> = (0..p).filter(|&j| counts[j] > cut).collect();
    let mut in_majority = vec![false; p];
    for &j in &majority {
        in_majority[j] = true;
    }
    let mut best = (0, 0usize);
    for (k, set) in sets.iter().enumerate() {
        let mut in_run = vec![false; p];
        for &j in set {
            in_run[j] = true;
        }
        let score = (0..p).filter(|&j| in_run[j] == in_majority[j]).count();
        if k == 0 || score > best.1 {
            best = (k, score);
        }
    }
    (majority, best.0)
}

/// Runs `b` independent splits in parallel. Run `k` draws from a stream
/// derived from one master seed taken from `rng` and `k`, so the result does
/// not depend on scheduling.
pub fn run_rsda<R: Rng + ?Sized>(
    data: &DataMatrix,
    spec: &PrecisionSpec,
    alpha: f64,
    b: usize,
    options: &SdaOptions,
    rng: &mut R,
) -> Result<AggregationResult> {
    let filter = SdaFilter::new(spec, options.clone())?;
    run_rsda_with(&filter, data, alpha, b, rng.next_u64())
}

pub(crate) fn run_rsda_with(
    filter: &SdaFilter,
    data: &DataMatrix,
    alpha: f64,
    b: usize,
    master: u64,
) -> Result<AggregationResult> {
    replicate_splits(b, data.p(), master, |rng| {
        let out = filter.run(data, alpha, rng)?;
        Ok((out.fit, out.selection))
    })
}

/// Runs `one_split` on streams `(master, k)` for `k < b` and aggregates.
pub(crate) fn replicate_splits<F>(b: usize, p: usize, master: u64, one_split: F) -> Result<AggregationResult>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(SplitFit, SelectionResult)> + Sync,
{
    if b == 0 {
        return invalid("number of splits must be at least 1");
    }
    let mut outcomes =
        (0..b).into_par_iter().map(|k| one_split(&mut stream_rng(master, &[k as u64]))).collect::<Result<Vec<_>>>()?;
    let sets: Vec<Vec<usize>> = outcomes.iter().map(|(_, sel)| sel.rejected.clone()).collect();
    let (majority_set, chosen_run) = aggregate_selections(&sets, p);
    let (final_fit, final_selection) = outcomes[chosen_run].clone();
    Ok(AggregationResult {
        runs: outcomes.drain(..).map(|(_, sel)| sel).collect(),
        majority_set,
        chosen_run,
        final_selection,
        final_fit,
    })
}
