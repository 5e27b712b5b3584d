use crate::error::{invalid, Result};

/// Tail counts of the statistics at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryPoint {
    pub t: f64,
    /// `#{wⱼ ≥ t}`
    pub upper: usize,
    /// `#{wⱼ ≤ −t}`
    pub lower: usize,
    /// `upper / lower`, `None` when `lower == 0`.
    pub ratio: Option<f64>,
}

/// Upper-to-lower tail ratio of `w` along `t_grid`. For null statistics
/// that are symmetric about zero the ratio stays near one.
pub fn symmetry_diagnostic(w: &[f64], t_grid: &[f64]) -> Result<Vec<SymmetryPoint>> {
    if t_grid.iter().any(|t| !(*t >= 0.0)) {
        return invalid("threshold grid must be non-negative");
    }
    if t_grid.windows(2).any(|p| p[0] > p[1]) {
        return invalid("threshold grid must be ascending");
    }
    Ok(t_grid
        .iter()
        .map(|&t| {
            let upper = w.iter().filter(|&&v| v >= t).count();
            let lower = w.iter().filter(|&&v| v <= -t).count();
            let ratio = (lower > 0).then(|| upper as f64 / lower as f64);
            SymmetryPoint { t, upper, lower, ratio }
        })
        .collect())
}
