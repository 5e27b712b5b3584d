//! Comparator procedures: Benjamini–Hochberg on marginal z-statistics and
//! the sample-splitting LASSO + BH procedure.

use rand::Rng;

use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::estimation::PrecisionSpec;
use crate::filter::{SdaFilter, SdaOptions, SplitFit};

/// p-values, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PValues(Vec<f64>);

impl PValues {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return invalid(format!("p-value {i} is {v}, outside [0, 1]"));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Benjamini–Hochberg step-up. Returns the rejected indices in ascending
/// order; tied p-values are ordered by index.
pub fn bh(p: &PValues, alpha: f64) -> Result<Vec<usize>> {
    crate::filter::check_alpha(alpha)?;
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p.0[a].total_cmp(&p.0[b]).then(a.cmp(&b)));
    let k_hat = (1..=m).rev().find(|&k| p.0[order[k - 1]] <= k as f64 * alpha / m as f64).unwrap_or(0);
    let mut rejected = order[..k_hat].to_vec();
    rejected.sort_unstable();
    Ok(rejected)
}

/// `2·(1 − Φ(|z|))`, evaluated as `erfc(|z|/√2)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// `√n·ξ̄ⱼ / √s_jj`; sample variances when `variances` is `None`.
pub fn marginal_z(data: &DataMatrix, variances: Option<&[f64]>) -> Result<Vec<f64>> {
    let owned;
    let var = match variances {
        Some(v) => {
            if v.len() != data.p() {
                return invalid(format!("{} variances for {} features", v.len(), data.p()));
            }
            v
        }
        None => {
            owned = data.column_variances();
            &owned
        }
    };
    let root_n = (data.n() as f64).sqrt();
    Ok(data.column_means().iter().zip(var).map(|(m, v)| if *v > 0.0 { root_n * m / v.sqrt() } else { 0.0 }).collect())
}

/// BH over the marginal two-sided normal p-values.
pub fn bh_marginal(data: &DataMatrix, variances: Option<&[f64]>, alpha: f64) -> Result<Vec<usize>> {
    let z = marginal_z(data, variances)?;
    bh(&PValues::new(z.iter().map(|&v| normal_two_sided_p(v)).collect())?, alpha)
}

/// BH over `zⱼ = √n₂ μ̂₂ⱼ / σ_{S,j}` on the screened set of an existing fit.
pub fn ss_from_fit(fit: &SplitFit, alpha: f64) -> Result<Vec<usize>> {
    let Some(refit) = &fit.refit else {
        return Ok(Vec::new());
    };
    let root_n2 = (fit.n2 as f64).sqrt();
    let p: Vec<f64> =
        refit.subset.iter().zip(&refit.sigma).map(|(&j, &s)| normal_two_sided_p(root_n2 * refit.mu2[j] / s)).collect();
    let local = bh(&PValues::new(p)?, alpha)?;
    Ok(local.into_iter().map(|k| refit.subset[k]).collect())
}

/// Sample splitting: LASSO screening on the first half, BH on the refit
/// z-statistics from the second half.
pub fn ss_procedure<R: Rng + ?Sized>(
    data: &DataMatrix,
    spec: &PrecisionSpec,
    alpha: f64,
    options: &SdaOptions,
    rng: &mut R,
) -> Result<Vec<usize>> {
    crate::filter::check_alpha(alpha)?;
    let filter = SdaFilter::new(spec, options.clone())?;
    let (_, fit) = filter.fit(data, rng)?;
    ss_from_fit(&fit, alpha)
}
