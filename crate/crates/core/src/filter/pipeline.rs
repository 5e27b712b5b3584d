use std::sync::Arc;

use rand::Rng;

use super::ranking::{ranking_stats, RankingResult, T1Mode};
use super::split::{split, SplitPlan};
use super::threshold::{sda_threshold, Flags, SelectionResult};
use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::estimation::{
    estimate_precision, refit_lse_or_ridge, PrecisionSpec, RefitResult, WhitenedProblem, Whitener,
};
use crate::linalg::dot;
use crate::screening::{
    cap_selection, default_cap, lambda_grid, path_aic, GramSystem, PathSettings, ScreeningResult, DEFAULT_GRID_LEN,
    DEFAULT_GRID_RATIO, DEFAULT_MAX_SWEEPS,
};

#[derive(Debug, Clone)]
pub struct SdaOptions {
    pub t1_mode: T1Mode,
    /// Use the `+1` conservative threshold.
    pub plus: bool,
    /// Overrides the `⌈2n/3⌉` screening fraction.
    pub split_fraction: Option<f64>,
    /// Cap on the screened set; `None` means `⌊p/3⌋`.
    pub cap: Option<usize>,
    pub grid_len: usize,
    pub grid_ratio: f64,
    /// KKT tolerance; `None` means `1e-7·p`.
    pub lasso_tol: Option<f64>,
    pub max_sweeps: usize,
}

impl Default for SdaOptions {
    fn default() -> Self {
        Self {
            t1_mode: T1Mode::Scaled,
            plus: false,
            split_fraction: None,
            cap: None,
            grid_len: DEFAULT_GRID_LEN,
            grid_ratio: DEFAULT_GRID_RATIO,
            lasso_tol: None,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// Everything computed from one split before thresholding.
#[derive(Debug, Clone)]
pub struct SplitFit {
    pub screening: ScreeningResult,
    pub refit: Option<RefitResult>,
    pub ranking: RankingResult,
    pub n1: usize,
    pub n2: usize,
    pub flags: Flags,
}

impl SplitFit {
    /// Thresholds the ranking and maps positions back to feature indices.
    pub fn select(&self, alpha: f64, plus: bool) -> Result<SelectionResult> {
        let mut sel = sda_threshold(&self.ranking.w, alpha, plus)?;
        sel.rejected = sel.rejected.iter().map(|&k| self.ranking.subset[k]).collect();
        sel.flags = self.flags;
        Ok(sel)
    }
}

#[derive(Debug, Clone)]
pub struct SdaOutcome {
    pub fit: SplitFit,
    pub selection: SelectionResult,
    pub plan: SplitPlan,
}

/// Screen, refit and rank a whitened problem.
pub fn analyze_whitened(problem: &WhitenedProblem, options: &SdaOptions) -> Result<SplitFit> {
    let p = problem.dim();
    let x = problem.x();
    let xty = x.mul_vec(&problem.y1);
    let system = GramSystem::new(problem.whitener.gram(), xty, dot(&problem.y1, &problem.y1));
    let lambda_max = system.lambda_max();
    let mut flags = Flags::default();

    let screening = if lambda_max > 0.0 && lambda_max.is_finite() {
        let grid = lambda_grid(lambda_max, options.grid_len.max(1), options.grid_ratio);
        let settings = PathSettings {
            tol: options.lasso_tol.unwrap_or_else(|| crate::screening::default_tol(p)),
            max_sweeps: options.max_sweeps,
        };
        let raw = path_aic(&system, &grid, problem.n1, settings)?;
        flags.lasso_nonconverged = raw.nonconverged;
        cap_selection(raw, options.cap.unwrap_or_else(|| default_cap(p)))
    } else {
        ScreeningResult::empty(p)
    };

    if screening.selected.is_empty() {
        flags.empty_selection = true;
        return Ok(SplitFit {
            screening,
            refit: None,
            ranking: RankingResult::empty(options.t1_mode),
            n1: problem.n1,
            n2: problem.n2,
            flags,
        });
    }
    let refit = refit_lse_or_ridge(problem, &screening.selected)?;
    flags.ridge_fallback = refit.ridge_fallback;
    let ranking = ranking_stats(&screening, &refit, problem.n1, problem.n2, options.t1_mode)?;
    Ok(SplitFit { screening, refit: Some(refit), ranking, n1: problem.n1, n2: problem.n2, flags })
}

#[derive(Debug, Clone)]
enum Prepared {
    Fixed(Arc<Whitener>),
    Identity,
    PerSplit(PrecisionSpec),
}

/// The filter with its precision source resolved once, so repeated runs on
/// new data skip the square root whenever `Ω` is fixed.
#[derive(Debug, Clone)]
pub struct SdaFilter {
    precision: Prepared,
    pub options: SdaOptions,
}

impl SdaFilter {
    pub fn new(spec: &PrecisionSpec, options: SdaOptions) -> Result<Self> {
        let precision = match spec {
            PrecisionSpec::Known(omega) => {
                crate::linalg::Cholesky::new(omega).map_err(|_| crate::error::SdaError::NotPsd {
                    min_eigenvalue: crate::linalg::sym_eigen(omega).map(|e| e.min_value()).unwrap_or(f64::NAN),
                })?;
                Prepared::Fixed(Arc::new(Whitener::from_precision(omega)?))
            }
            PrecisionSpec::IdentityWorking => Prepared::Identity,
            spec @ PrecisionSpec::GraphicalLasso { .. } => Prepared::PerSplit(spec.clone()),
        };
        Ok(Self { precision, options })
    }

    /// Uses a precomputed whitener for every run.
    pub fn with_whitener(whitener: Arc<Whitener>, options: SdaOptions) -> Self {
        Self { precision: Prepared::Fixed(whitener), options }
    }

    fn whitener_for(&self, data: &DataMatrix, first: &[usize]) -> Result<Arc<Whitener>> {
        match &self.precision {
            Prepared::Fixed(w) => {
                if w.dim() != data.p() {
                    return invalid(format!("precision is {0}x{0} but data have p = {1}", w.dim(), data.p()));
                }
                Ok(w.clone())
            }
            Prepared::Identity => Ok(Arc::new(Whitener::identity(data.p()))),
            Prepared::PerSplit(spec) => {
                let omega = estimate_precision(&data.select_rows(first), spec)?;
                Ok(Arc::new(Whitener::from_precision(&omega)?))
            }
        }
    }

    /// One random split through ranking, without thresholding.
    pub fn fit<R: Rng + ?Sized>(&self, data: &DataMatrix, rng: &mut R) -> Result<(SplitPlan, SplitFit)> {
        if data.p() < 2 {
            return invalid(format!("need at least 2 features, got {}", data.p()));
        }
        let plan = split(data.n(), rng, self.options.split_fraction)?;
        let whitener = self.whitener_for(data, plan.first())?;
        let xi1 = data.mean_of_rows(plan.first());
        let xi2 = data.mean_of_rows(plan.second());
        let problem = WhitenedProblem::new(whitener, &xi1, &xi2, plan.n1, plan.n2)?;
        let fit = analyze_whitened(&problem, &self.options)?;
        Ok((plan, fit))
    }

    pub fn run<R: Rng + ?Sized>(&self, data: &DataMatrix, alpha: f64, rng: &mut R) -> Result<SdaOutcome> {
        super::check_alpha(alpha)?;
        let (plan, fit) = self.fit(data, rng)?;
        let selection = fit.select(alpha, self.options.plus)?;
        Ok(SdaOutcome { fit, selection, plan })
    }
}

/// Split → precision → whiten → screen → refit → rank → threshold.
pub fn run_sda<R: Rng + ?Sized>(
    data: &DataMatrix,
    spec: &PrecisionSpec,
    alpha: f64,
    options: &SdaOptions,
    rng: &mut R,
) -> Result<SdaOutcome> {
    SdaFilter::new(spec, options.clone())?.run(data, alpha, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_data(n: usize, p: usize, mu: &[f64], rng: &mut ChaCha8Rng) -> DataMatrix {
        let v: Vec<f64> = (0..n * p)
            .map(|k| mu[k % p] + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
            .collect();
        DataMatrix::from_row_major(n, p, v).unwrap()
    }

    #[test]
    fn zero_means_give_empty_selection() {
        // all-zero data: both split means are exactly zero
        let rows = vec![vec![0.0, 0.0]; 6];
        let d = DataMatrix::from_rows(&rows).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = run_sda(&d, &PrecisionSpec::IdentityWorking, 0.2, &SdaOptions::default(), &mut rng).unwrap();
        assert!(out.selection.rejected.is_empty());
        assert!(out.selection.flags.empty_selection);
        assert!(out.selection.threshold.is_infinite());
    }

    #[test]
    fn rejected_are_screened() {
        let p = 60;
        let mut mu = vec![0.0; p];
        for j in 0..6 {
            mu[j] = 1.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let d = normal_data(45, p, &mu, &mut rng);
            let out = run_sda(&d, &PrecisionSpec::IdentityWorking, 0.2, &SdaOptions::default(), &mut rng).unwrap();
            for j in &out.selection.rejected {
                assert!(out.fit.ranking.subset.contains(j));
            }
            assert!(out.fit.ranking.subset.len() <= p / 3);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = normal_data(2, 5, &[0.0; 5], &mut rng);
        assert!(run_sda(&d, &PrecisionSpec::IdentityWorking, 0.2, &SdaOptions::default(), &mut rng).is_err());
        let d = normal_data(10, 1, &[0.0], &mut rng);
        assert!(run_sda(&d, &PrecisionSpec::IdentityWorking, 0.2, &SdaOptions::default(), &mut rng).is_err());
        let d = normal_data(10, 3, &[0.0; 3], &mut rng);
        assert!(run_sda(&d, &PrecisionSpec::IdentityWorking, 1.5, &SdaOptions::default(), &mut rng).is_err());
        let bad = PrecisionSpec::Known(crate::linalg::SymMatrix::diag(&[1.0, -1.0, 1.0]));
        assert!(run_sda(&d, &bad, 0.2, &SdaOptions::default(), &mut rng).is_err());
    }
}
