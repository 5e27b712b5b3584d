use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use super::signal::TruthVector;
use crate::data::DataMatrix;
use crate::error::{invalid, Result};
use crate::linalg::{default_eig_floor, sqrt_psd, SymMatrix};

/// Distribution of the independent innovations, each standardized to mean 0
/// and variance 1 before mixing by `Σ^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorLaw {
    Normal,
    /// Student t with 3 degrees of freedom, divided by `√3`.
    StudentT3,
    /// `(Exp(scale 2) − 2) / 2`.
    Exponential2,
}

impl ErrorLaw {
    pub fn label(self) -> &'static str {
        match self {
            ErrorLaw::Normal => "normal",
            ErrorLaw::StudentT3 => "t3",
            ErrorLaw::Exponential2 => "exp2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Some(ErrorLaw::Normal),
            "t3" | "t" => Some(ErrorLaw::StudentT3),
            "exp2" | "exp" | "exponential" => Some(ErrorLaw::Exponential2),
            _ => None,
        }
    }
}

enum Innovation {
    Normal,
    T(StudentT<f64>),
    Exp(Exp<f64>),
}

impl Innovation {
    fn new(law: ErrorLaw) -> Self {
        match law {
            ErrorLaw::Normal => Innovation::Normal,
            ErrorLaw::StudentT3 => Innovation::T(StudentT::new(3.0).expect("3 degrees of freedom")),
            ErrorLaw::Exponential2 => Innovation::Exp(Exp::new(0.5).expect("positive rate")),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Innovation::Normal => StandardNormal.sample(rng),
            Innovation::T(t) => t.sample(rng) / 3.0_f64.sqrt(),
            Innovation::Exp(e) => (e.sample(rng) - 2.0) / 2.0,
        }
    }
}

/// Draws rows `μ + Σ^{1/2}ε` with the square root computed once.
#[derive(Debug, Clone)]
pub struct SampleGenerator {
    root: SymMatrix,
    law: ErrorLaw,
}

impl SampleGenerator {
    pub fn new(sigma: &SymMatrix, law: ErrorLaw) -> Result<Self> {
        Ok(Self { root: sqrt_psd(sigma, default_eig_floor(sigma))?, law })
    }

    /// Uses an already computed symmetric root of `Σ`.
    pub fn from_root(root: SymMatrix, law: ErrorLaw) -> Self {
        Self { root, law }
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn generate<R: Rng + ?Sized>(&self, mu: &[f64], n: usize, rng: &mut R) -> Result<DataMatrix> {
        let p = self.dim();
        if mu.len() != p {
            return invalid(format!("mean has length {} but covariance is {p}x{p}", mu.len()));
        }
        if n == 0 {
            return invalid("sample size must be positive");
        }
        let innovation = Innovation::new(self.law);
        let mut eps = vec![0.0; p];
        let mut out = Vec::with_capacity(n * p);
        for _ in 0..n {
            for e in eps.iter_mut() {
                *e = innovation.draw(rng);
            }
            out.extend(self.root.mul_vec(&eps).iter().zip(mu).map(|(z, m)| z + m));
        }
        DataMatrix::from_row_major(n, p, out)
    }
}

/// `n` rows with mean `truth.mu`, covariance `sigma` and innovations of law
/// `law`.
pub fn gen_sample<R: Rng + ?Sized>(
    truth: &TruthVector,
    sigma: &SymMatrix,
    law: ErrorLaw,
    n: usize,
    rng: &mut R,
) -> Result<DataMatrix> {
    SampleGenerator::new(sigma, law)?.generate(&truth.mu, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moments_match_for_every_law() {
        let sigma = SymMatrix::from_fn(3, |i, j| 0.6_f64.powi((j - i) as i32));
        let truth = TruthVector::from_mu(vec![1.0, 0.0, -2.0]);
        let n = 40_000;
        for (seed, law) in [ErrorLaw::Normal, ErrorLaw::StudentT3, ErrorLaw::Exponential2].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let d = gen_sample(&truth, &sigma, law, n, &mut rng).unwrap();
            let means = d.column_means();
            for j in 0..3 {
                assert!((means[j] - truth.mu[j]).abs() < 5.0 / (n as f64).sqrt(), "{law:?} mean {j}");
            }
            let all: Vec<usize> = (0..n).collect();
            let cov = d.covariance_of_rows(&all);
            // t3 has infinite fourth moment, so its sample covariance is noisy
            let tol = if law == ErrorLaw::StudentT3 { 0.15 } else { 0.05 };
            assert!(cov.max_abs_diff(&sigma) < tol, "{law:?}: {}", cov.max_abs_diff(&sigma));
        }
    }

    #[test]
    fn exponential_innovations_are_skewed() {
        let gen = SampleGenerator::new(&SymMatrix::identity(1), ErrorLaw::Exponential2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = gen.generate(&[0.0], 20_000, &mut rng).unwrap();
        let skew: f64 = d.as_slice().iter().map(|x| x.powi(3)).sum::<f64>() / 20_000.0;
        // third moment of the standardized exponential is 2
        assert!((skew - 2.0).abs() < 0.3, "{skew}");
        assert!(d.as_slice().iter().all(|&x| x >= -1.0));
    }

    #[test]
    fn length_mismatch_rejected() {
        let gen = SampleGenerator::new(&SymMatrix::identity(2), ErrorLaw::Normal).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(gen.generate(&[0.0; 3], 5, &mut rng).is_err());
    }
}
