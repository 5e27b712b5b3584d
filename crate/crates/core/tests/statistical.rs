//! Monte Carlo checks of the sampling layer and the filters at small scale.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sda_core::filter::{run_two_sample, TwoSampleSpec};
use sda_core::sim::{build_covariance, fdp_tdp, gen_sample, CovarianceKind, ErrorLaw, SampleGenerator, TruthVector};
use sda_core::{run_sda, DataMatrix, PrecisionSpec, SdaFilter, SdaOptions, SymMatrix};

const LAWS: [ErrorLaw; 3] = [ErrorLaw::Normal, ErrorLaw::StudentT3, ErrorLaw::Exponential2];

#[test]
fn identity_sample_covariance_close_at_large_n() {
    let (n, p) = (10_000, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = gen_sample(&TruthVector::from_mu(vec![0.0; p]), &SymMatrix::identity(p), ErrorLaw::Normal, n, &mut rng)
        .unwrap();
    let all: Vec<usize> = (0..n).collect();
    let cov = d.covariance_of_rows(&all);
    let frob: f64 = (0..p)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .map(|(i, j)| (cov.get(i, j) - if i == j { 1.0 } else { 0.0 }).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(frob <= 3.0 * ((p * p) as f64 / n as f64).sqrt(), "{frob}");
}

#[test]
fn standardized_innovations_have_zero_mean() {
    for (seed, law) in LAWS.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(10 + seed as u64);
        let d = gen_sample(&TruthVector::from_mu(vec![0.0; 4]), &SymMatrix::identity(4), law, 5_000, &mut rng).unwrap();
        let pooled = d.as_slice();
        let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
        assert!(mean.abs() <= 4.0 / (pooled.len() as f64).sqrt(), "{law:?}: {mean}");
    }
}

#[test]
fn student_t_innovations_are_heavy_tailed() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d =
        gen_sample(&TruthVector::from_mu(vec![0.0; 4]), &SymMatrix::identity(4), ErrorLaw::StudentT3, 10_000, &mut rng)
            .unwrap();
    let x = d.as_slice();
    let m = x.len() as f64;
    let mean = x.iter().sum::<f64>() / m;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    let kurt = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / m / (var * var) - 3.0;
    assert!(kurt > 1.0, "{kurt}");
}

#[test]
fn population_covariance_reproduced_for_every_law() {
    let p = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let sigma = build_covariance(CovarianceKind::Ar(0.6), p, &mut rng).unwrap();
    let n = 50_000;
    for law in LAWS {
        let d = gen_sample(&TruthVector::from_mu(vec![0.0; p]), &sigma, law, n, &mut rng).unwrap();
        for i in 0..p {
            for j in i..p {
                let prods: Vec<f64> = (0..n).map(|r| d.row(r)[i] * d.row(r)[j]).collect();
                let mean = prods.iter().sum::<f64>() / n as f64;
                let sd = (prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
                let se = sd / (n as f64).sqrt();
                assert!((mean - sigma.get(i, j)).abs() <= 5.0 * se, "{law:?} ({i},{j}): {mean} vs {}", sigma.get(i, j));
            }
        }
    }
}

#[test]
fn null_data_rarely_yield_discoveries() {
    // every discovery is false, so the FDR is the chance of any rejection
    let (n, p, reps) = (60, 100, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma = build_covariance(CovarianceKind::Ar(0.5), p, &mut rng).unwrap();
    let gen = SampleGenerator::new(&sigma, ErrorLaw::Normal).unwrap();
    let omega = sda_core::linalg::inverse_pd(&sigma).unwrap();
    let filter = SdaFilter::new(&PrecisionSpec::Known(omega), SdaOptions::default()).unwrap();
    let truth = TruthVector::from_mu(vec![0.0; p]);
    let mut fdp_sum = 0.0;
    for _ in 0..reps {
        let d = gen.generate(&truth.mu, n, &mut rng).unwrap();
        let out = filter.run(&d, 0.2, &mut rng).unwrap();
        fdp_sum += fdp_tdp(&out.selection.rejected, &truth).0;
    }
    let fdr = fdp_sum / reps as f64;
    let se = (0.2f64 * 0.8 / reps as f64).sqrt();
    assert!(fdr <= 0.2 + 3.5 * se, "null FDR {fdr}");
}

#[test]
fn strong_signal_is_found() {
    let (n, p) = (60, 50);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mu = vec![0.0; p];
    mu[7] = 1.5;
    mu[20] = -1.5;
    let d = gen_sample(&TruthVector::from_mu(mu), &SymMatrix::identity(p), ErrorLaw::Normal, n, &mut rng).unwrap();
    let out = run_sda(&d, &PrecisionSpec::IdentityWorking, 0.2, &SdaOptions::default(), &mut rng).unwrap();
    assert!(out.selection.rejected.contains(&7) && out.selection.rejected.contains(&20));
}

fn two_groups(shift: f64, seed: u64) -> (DataMatrix, DataMatrix) {
    let p = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mu = vec![0.0; p];
    mu[0] = shift;
    let a = gen_sample(&TruthVector::from_mu(mu), &SymMatrix::identity(p), ErrorLaw::Normal, 45, &mut rng).unwrap();
    let b = gen_sample(&TruthVector::from_mu(vec![0.0; p]), &SymMatrix::identity(p), ErrorLaw::Normal, 45, &mut rng)
        .unwrap();
    (a, b)
}

#[test]
fn two_sample_shifted_feature_selected() {
    let (a, b) = two_groups(2.0, 30);
    let spec = TwoSampleSpec::shared(PrecisionSpec::IdentityWorking);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let out = run_two_sample(&a, &b, &spec, 0.2, &SdaOptions::default(), &mut rng).unwrap();
    assert!(out.selection.rejected.contains(&0), "{:?}", out.selection.rejected);
}

#[test]
fn two_sample_identical_groups_select_nothing() {
    let (a, _) = two_groups(0.5, 31);
    let spec = TwoSampleSpec::shared(PrecisionSpec::IdentityWorking);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = run_two_sample(&a, &a, &spec, 0.2, &SdaOptions::default(), &mut rng).unwrap();
        assert!(out.selection.rejected.is_empty());
    }
}

#[test]
fn two_sample_swap_gives_same_statistics() {
    let (a, b) = two_groups(1.0, 32);
    for spec in [PrecisionSpec::IdentityWorking, PrecisionSpec::glasso()] {
        let spec = TwoSampleSpec::shared(spec);
        let ab = run_two_sample(&a, &b, &spec, 0.2, &SdaOptions::default(), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let ba = run_two_sample(&b, &a, &spec, 0.2, &SdaOptions::default(), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(ab.fit.ranking.w, ba.fit.ranking.w);
        assert_eq!(ab.selection.rejected, ba.selection.rejected);
    }
}

#[test]
fn two_sample_null_fdr_bounded() {
    let spec = TwoSampleSpec::shared(PrecisionSpec::IdentityWorking);
    let reps = 200;
    let mut any = 0;
    for r in 0..reps {
        let (a, b) = two_groups(0.0, 1000 + r);
        let mut rng = ChaCha8Rng::seed_from_u64(r);
        if !run_two_sample(&a, &b, &spec, 0.2, &SdaOptions::default(), &mut rng).unwrap().selection.rejected.is_empty()
        {
            any += 1;
        }
    }
    let fdr = any as f64 / reps as f64;
    assert!(fdr <= 0.2 + 3.5 * (0.16f64 / reps as f64).sqrt(), "{fdr}");
}

fn ss_runs(mu: &[f64], reps: u64, seed: u64) -> Vec<(Vec<usize>, Vec<usize>)> {
    let p = mu.len();
    let filter = SdaFilter::new(&PrecisionSpec::Known(SymMatrix::identity(p)), SdaOptions::default()).unwrap();
    let gen = SampleGenerator::new(&SymMatrix::identity(p), ErrorLaw::Normal).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps)
        .map(|_| {
            let d = gen.generate(mu, 90, &mut rng).unwrap();
            let (_, fit) = filter.fit(&d, &mut rng).unwrap();
            (sda_core::baselines::ss_from_fit(&fit, 0.2).unwrap(), fit.ranking.subset)
        })
        .collect()
}

#[test]
fn sample_splitting_null_fdr_and_screened_subset() {
    let runs = ss_runs(&[0.0; 50], 200, 40);
    let truth = TruthVector::from_mu(vec![0.0; 50]);
    let fdr = runs.iter().map(|(r, _)| fdp_tdp(r, &truth).0).sum::<f64>() / runs.len() as f64;
    assert!(fdr <= 0.25, "{fdr}");
    for (rejected, screened) in &runs {
        assert!(rejected.iter().all(|j| screened.contains(j)));
    }
}

#[test]
fn sample_splitting_finds_single_strong_signal() {
    let mut mu = vec![0.0; 50];
    mu[0] = 2.0;
    let runs = ss_runs(&mu, 200, 41);
    let hits = runs.iter().filter(|(r, _)| r.contains(&0)).count();
    assert!(hits as f64 >= 0.9 * runs.len() as f64, "{hits}");
}

#[test]
fn aggregated_selection_is_one_of_the_runs() {
    let p = 40;
    let mut mu = vec![0.0; p];
    for j in 0..6 {
        mu[j * 6] = 0.6;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for b in [1, 4, 11] {
        let d = gen_sample(&TruthVector::from_mu(mu.clone()), &SymMatrix::identity(p), ErrorLaw::Normal, 60, &mut rng)
            .unwrap();
        let agg =
            sda_core::run_rsda(&d, &PrecisionSpec::IdentityWorking, 0.2, b, &SdaOptions::default(), &mut rng).unwrap();
        assert_eq!(agg.runs.len(), b);
        assert_eq!(agg.final_selection.rejected, agg.runs[agg.chosen_run].rejected);
        for j in &agg.final_selection.rejected {
            assert!(agg.final_fit.ranking.subset.contains(j));
        }
    }
}
