//! Two-sample variant: the whitened response is the difference of the two
//! groups' split means.

use std::sync::Arc;

use rand::{Rng, RngCore};

use super::pipeline::{analyze_whitened, SdaOptions, SplitFit};
use super::rsda::{replicate_splits, AggregationResult};
use super::split::{split, SplitPlan};
use super::threshold::SelectionResult;
use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::estimation::{estimate_precision, PrecisionSpec, WhitenedProblem, Whitener};
use crate::linalg::{inverse_pd, SymMatrix};
use crate::rng::{fingerprint, stream_rng};

/// Precision source for each group.
#[derive(Debug, Clone)]
pub struct TwoSampleSpec {
    pub a: PrecisionSpec,
    pub b: PrecisionSpec,
}

impl TwoSampleSpec {
    pub fn shared(spec: PrecisionSpec) -> Self {
        Self { a: spec.clone(), b: spec }
    }
}

#[derive(Debug, Clone)]
pub struct TwoSampleOutcome {
    pub fit: SplitFit,
    pub selection: SelectionResult,
    pub plan_a: SplitPlan,
    pub plan_b: SplitPlan,
}

/// `(n₁/n₁ᵃ·Σᵃ + n₁/n₁ᵇ·Σᵇ)⁻¹` with `n₁ = n₁ᵃ + n₁ᵇ`.
pub fn two_sample_precision(sigma_a: &SymMatrix, sigma_b: &SymMatrix, n1_a: usize, n1_b: usize) -> Result<SymMatrix> {
    if sigma_a.dim() != sigma_b.dim() {
        return invalid("group covariances differ in dimension");
    }
    let n1 = (n1_a + n1_b) as f64;
    let pooled = sigma_a.scaled(n1 / n1_a as f64).add(&sigma_b.scaled(n1 / n1_b as f64));
    inverse_pd(&pooled)
}

fn group_covariance(d1: &DataMatrix, spec: &PrecisionSpec) -> Result<SymMatrix> {
    match spec {
        PrecisionSpec::IdentityWorking => Ok(SymMatrix::identity(d1.p())),
        other => inverse_pd(&estimate_precision(d1, other)?),
    }
}

fn fit_once(
    d_a: &DataMatrix,
    d_b: &DataMatrix,
    spec: &TwoSampleSpec,
    options: &SdaOptions,
    master: u64,
    replicate: u64,
) -> Result<(SplitPlan, SplitPlan, SplitFit)> {
    // each group's split depends only on its own contents, so swapping the
    // groups reproduces the same partitions
    let mut rng_a = stream_rng(master, &[fingerprint(d_a.as_slice()), replicate]);
    let mut rng_b = stream_rng(master, &[fingerprint(d_b.as_slice()), replicate]);
    let plan_a = split(d_a.n(), &mut rng_a, options.split_fraction)?;
    let plan_b = split(d_b.n(), &mut rng_b, options.split_fraction)?;

    let whitener = match (&spec.a, &spec.b) {
        (PrecisionSpec::IdentityWorking, PrecisionSpec::IdentityWorking) => {
            let n1 = (plan_a.n1 + plan_b.n1) as f64;
            let scale = 1.0 / (n1 / plan_a.n1 as f64 + n1 / plan_b.n1 as f64);
            Whitener::from_root(SymMatrix::diag(&vec![scale.sqrt(); d_a.p()]))
        }
        _ => {
            let sigma_a = group_covariance(&d_a.select_rows(plan_a.first()), &spec.a)?;
            let sigma_b = group_covariance(&d_b.select_rows(plan_b.first()), &spec.b)?;
            Whitener::from_precision(&two_sample_precision(&sigma_a, &sigma_b, plan_a.n1, plan_b.n1)?)?
        }
    };
    let diff = |x: Vec<f64>, y: Vec<f64>| -> Vec<f64> { x.iter().zip(&y).map(|(a, b)| a - b).collect() };
    let delta1 = diff(d_a.mean_of_rows(plan_a.first()), d_b.mean_of_rows(plan_b.first()));
    let delta2 = diff(d_a.mean_of_rows(plan_a.second()), d_b.mean_of_rows(plan_b.second()));
    let problem =
        WhitenedProblem::new(Arc::new(whitener), &delta1, &delta2, plan_a.n1 + plan_b.n1, plan_a.n2 + plan_b.n2)?;
    let fit = analyze_whitened(&problem, options)?;
    Ok((plan_a, plan_b, fit))
}

fn check_groups(d_a: &DataMatrix, d_b: &DataMatrix) -> Result<()> {
    if d_a.p() != d_b.p() {
        return invalid(format!("groups have {} and {} features", d_a.p(), d_b.p()));
    }
    if d_a.n() < 3 || d_b.n() < 3 {
        return invalid("each group needs at least 3 samples");
    }
    if d_a.p() < 2 {
        return invalid("need at least 2 features");
    }
    Ok(())
}

/// Tests `μᵃⱼ = μᵇⱼ` for every feature.
pub fn run_two_sample<R: Rng + ?Sized>(
    d_a: &DataMatrix,
    d_b: &DataMatrix,
    spec: &TwoSampleSpec,
    alpha: f64,
    options: &SdaOptions,
    rng: &mut R,
) -> Result<TwoSampleOutcome> {
    super::check_alpha(alpha)?;
    check_groups(d_a, d_b)?;
    let (plan_a, plan_b, fit) = fit_once(d_a, d_b, spec, options, rng.next_u64(), 0)?;
    let selection = fit.select(alpha, options.plus)?;
    Ok(TwoSampleOutcome { fit, selection, plan_a, plan_b })
}

/// Two-sample filter with stability refinement over `b` splits.
pub fn run_two_sample_rsda<R: Rng + ?Sized>(
    d_a: &DataMatrix,
    d_b: &DataMatrix,
    spec: &TwoSampleSpec,
    alpha: f64,
    b: usize,
    options: &SdaOptions,
    rng: &mut R,
) -> Result<AggregationResult> {
    super::check_alpha(alpha)?;
    check_groups(d_a, d_b)?;
    let master = rng.next_u64();
    replicate_splits(b, d_a.p(), master, |stream| {
        let replicate = stream.next_u64();
        let (_, _, fit) = fit_once(d_a, d_b, spec, options, master, replicate)?;
        let sel = fit.select(alpha, options.plus)?;
        Ok((fit, sel))
    })
}
