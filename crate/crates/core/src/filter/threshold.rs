use serde::Serialize;

use crate::error::{invalid, Result};

/// Diagnostics carried alongside a selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub ridge_fallback: bool,
    pub empty_selection: bool,
    /// LASSO grid points skipped for hitting the sweep budget.
    pub lasso_nonconverged: usize,
}

impl Flags {
    pub fn any(&self) -> bool {
        self.ridge_fallback || self.empty_selection || self.lasso_nonconverged > 0
    }
}

/// Threshold and rejections for one statistic vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// `+∞` when nothing is rejected.
    pub threshold: f64,
    pub rejected: Vec<usize>,
    /// Estimated FDP at the threshold under the rule in use; `0` when the
    /// threshold is infinite.
    pub fdp_hat_at_l: f64,
    /// Number of ranked features.
    pub n_candidates: usize,
    pub flags: Flags,
}

impl SelectionResult {
    pub fn none(n_candidates: usize, flags: Flags) -> Self {
        Self { threshold: f64::INFINITY, rejected: Vec::new(), fdp_hat_at_l: 0.0, n_candidates, flags }
    }
}

/// Data-driven threshold `L = min{t : ratio(t) ≤ α}` over the candidates
/// `{|wⱼ| : wⱼ ≠ 0}` with
/// `ratio(t) = (#{w ≤ −t} [+1]) / max(#{w ≥ t}, 1)`; the `+1` is the
/// conservative variant selected by `plus`. Zero entries are ignored.
/// `rejected` holds positions into `w`.
pub fn sda_threshold(w: &[f64], alpha: f64, plus: bool) -> Result<SelectionResult> {
    super::check_alpha(alpha)?;
    if w.iter().any(|v| !v.is_finite()) {
        return invalid("ranking statistics must be finite");
    }
    let mut pos: Vec<f64> = w.iter().copied().filter(|&v| v > 0.0).collect();
    let mut neg: Vec<f64> = w.iter().filter(|&&v| v < 0.0).map(|v| -v).collect();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let mut candidates: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let extra = if plus { 1.0 } else { 0.0 };
    // counts of magnitudes ≥ t in a sorted slice
    let at_least = |sorted: &[f64], t: f64| sorted.len() - sorted.partition_point(|&v| v < t);
    for &t in &candidates {
        let n_pos = at_least(&pos, t);
        let n_neg = at_least(&neg, t);
        let ratio = (extra + n_neg as f64) / n_pos.max(1) as f64;
        if ratio <= alpha {
            let rejected = (0..w.len()).filter(|&j| w[j] >= t).collect();
            return Ok(SelectionResult {
                threshold: t,
                rejected,
                fdp_hat_at_l: ratio,
                n_candidates: w.len(),
                flags: Flags::default(),
            });
        }
    }
    Ok(SelectionResult::none(w.len(), Flags::default()))
}
