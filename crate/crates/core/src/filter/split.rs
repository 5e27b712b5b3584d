use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{invalid, Result};

/// Random partition of `0..n`; the first `n1` entries of `assignment` form
/// the screening half.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub n1: usize,
    pub n2: usize,
    pub assignment: Vec<usize>,
}

impl SplitPlan {
    pub fn first(&self) -> &[usize] {
        &self.assignment[..self.n1]
    }

    pub fn second(&self) -> &[usize] {
        &self.assignment[self.n1..]
    }
}

/// `⌈2n/3⌉`
pub fn default_n1(n: usize) -> usize {
    (2 * n).div_ceil(3)
}

/// Uniformly random split with `n1 = ⌈2n/3⌉`, or `⌈frac·n⌉` clamped to
/// `[1, n−1]` when `frac_override` is given.
pub fn split<R: Rng + ?Sized>(n: usize, rng: &mut R, frac_override: Option<f64>) -> Result<SplitPlan> {
    if n < 3 {
        return invalid(format!("sample splitting needs at least 3 samples, got {n}"));
    }
    let n1 = match frac_override {
        None => default_n1(n),
        Some(f) if f > 0.0 && f < 1.0 => ((f * n as f64).ceil() as usize).clamp(1, n - 1),
        Some(f) => return invalid(format!("split fraction must lie in (0, 1), got {f}")),
    };
    let mut assignment: Vec<usize> = (0..n).collect();
    assignment.shuffle(rng);
    Ok(SplitPlan { n1, n2: n - n1, assignment })
}
