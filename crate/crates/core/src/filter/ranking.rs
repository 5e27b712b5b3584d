use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::estimation::RefitResult;
use crate::screening::ScreeningResult;

/// Construction of the first-half statistic `T₁ⱼ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum T1Mode {
    /// `√n₁ μ̂₁ⱼ / σ_{S,j}`
    #[default]
    Scaled,
    /// The LASSO coefficient `μ̂₁ⱼ` itself.
    Raw,
}

/// Statistics over the screened set, in subset order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult {
    pub subset: Vec<usize>,
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    /// `wⱼ = t1ⱼ · t2ⱼ`
    pub w: Vec<f64>,
    pub t1_mode: T1Mode,
}

impl RankingResult {
    pub fn empty(t1_mode: T1Mode) -> Self {
        Self { subset: Vec::new(), t1: Vec::new(), t2: Vec::new(), w: Vec::new(), t1_mode }
    }

    /// `w` spread over `0..p`, `None` for features outside the subset.
    pub fn full_w(&self, p: usize) -> Vec<Option<f64>> {
        let mut out = vec![None; p];
        for (&j, &w) in self.subset.iter().zip(&self.w) {
            out[j] = Some(w);
        }
        out
    }
}

pub fn ranking_stats(
    screen: &ScreeningResult,
    refit: &RefitResult,
    n1: usize,
    n2: usize,
    mode: T1Mode,
) -> Result<RankingResult> {
    if screen.selected != refit.subset {
        return invalid("screened set and refit subset differ");
    }
    let s1 = (n1 as f64).sqrt();
    let s2 = (n2 as f64).sqrt();
    let mut t1 = Vec::with_capacity(refit.subset.len());
    let mut t2 = Vec::with_capacity(refit.subset.len());
    for (&j, &sigma) in refit.subset.iter().zip(&refit.sigma) {
        assert!(sigma > 0.0, "refit standard error must be positive (feature {j}, got {sigma})");
        t1.push(match mode {
            T1Mode::Scaled => s1 * screen.coefficients[j] / sigma,
            T1Mode::Raw => screen.coefficients[j],
        });
        t2.push(s2 * refit.mu2[j] / sigma);
    }
    let w = t1.iter().zip(&t2).map(|(a, b)| a * b).collect();
    Ok(RankingResult { subset: refit.subset.clone(), t1, t2, w, t1_mode: mode })
}
