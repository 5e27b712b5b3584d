use rand::Rng;

use crate::error::{invalid, Result};

/// Sparse mean mixture: each coordinate is non-null with probability `pi1`,
/// with magnitude Uniform[`mu0 − band`, `mu0 + band`] and a random sign
/// when `flip_sign`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub pi1: f64,
    pub mu0: f64,
    pub band: f64,
    pub flip_sign: bool,
}

impl SignalSpec {
    pub fn new(pi1: f64, mu0: f64) -> Self {
        Self { pi1, mu0, band: 0.1, flip_sign: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pi1) {
            return invalid(format!("pi1 must lie in [0, 1], got {}", self.pi1));
        }
        if !(self.mu0 > 0.0) || !(self.band >= 0.0) || self.band >= self.mu0 {
            return invalid(format!("need mu0 > band >= 0, got mu0 = {}, band = {}", self.mu0, self.band));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthVector {
    pub theta: Vec<bool>,
    pub mu: Vec<f64>,
}

impl TruthVector {
    pub fn from_mu(mu: Vec<f64>) -> Self {
        Self { theta: mu.iter().map(|&m| m != 0.0).collect(), mu }
    }

    pub fn n_signals(&self) -> usize {
        self.theta.iter().filter(|&&t| t).count()
    }
}

pub fn gen_signal<R: Rng + ?Sized>(p: usize, spec: &SignalSpec, rng: &mut R) -> Result<TruthVector> {
    spec.validate()?;
    let mu = (0..p)
        .map(|_| {
            if !rng.random_bool(spec.pi1) {
                return 0.0;
            }
            let mag =
                if spec.band > 0.0 { rng.random_range(spec.mu0 - spec.band..=spec.mu0 + spec.band) } else { spec.mu0 };
            if spec.flip_sign && rng.random_bool(0.5) {
                -mag
            } else {
                mag
            }
        })
        .collect();
    Ok(TruthVector::from_mu(mu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn no_signals_when_pi1_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = gen_signal(100, &SignalSpec::new(0.0, 0.2), &mut rng).unwrap();
        assert!(t.theta.iter().all(|&x| !x) && t.mu.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn degenerate_mixture_fixes_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = SignalSpec { pi1: 1.0, mu0: 0.3, band: 0.0, flip_sign: true };
        let t = gen_signal(50, &spec, &mut rng).unwrap();
        assert!(t.mu.iter().all(|m| m.abs() == 0.3));
        assert!(t.mu.iter().any(|&m| m < 0.0) && t.mu.iter().any(|&m| m > 0.0));
    }

    #[test]
    fn signal_count_concentrates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = SignalSpec::new(0.1, 0.2);
        let sd = (500.0 * 0.1 * 0.9_f64).sqrt();
        for _ in 0..100 {
            let t = gen_signal(500, &spec, &mut rng).unwrap();
            assert!((t.n_signals() as f64 - 50.0).abs() <= 4.0 * sd);
            for &m in t.mu.iter().filter(|m| **m != 0.0) {
                assert!((0.1..=0.3).contains(&m.abs()));
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(SignalSpec::new(1.5, 0.2).validate().is_err());
        assert!(SignalSpec::new(0.1, 0.05).validate().is_err());
    }
}
