use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::SymMatrix;

/// Covariance family, without its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structure {
    /// `ρ^{|i−j|}`
    Ar,
    /// Unit diagonal, constant `ρ` off the diagonal.
    CompoundSymmetry,
    /// `ΓΓᵀ + I` with one Uniform[1,2] entry per row of `Γ`, rescaled to unit
    /// diagonal.
    SparseFactor,
}

impl Structure {
    pub fn label(self) -> &'static str {
        match self {
            Structure::Ar => "AR",
            Structure::CompoundSymmetry => "CS",
            Structure::SparseFactor => "SF",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AR" | "I" => Some(Structure::Ar),
            "CS" | "II" => Some(Structure::CompoundSymmetry),
            "SF" | "SPARSE" | "III" => Some(Structure::SparseFactor),
            _ => None,
        }
    }

    pub fn with_rho(self, rho: f64) -> CovarianceKind {
        match self {
            Structure::Ar => CovarianceKind::Ar(rho),
            Structure::CompoundSymmetry => CovarianceKind::CompoundSymmetry(rho),
            Structure::SparseFactor => CovarianceKind::SparseFactor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceKind {
    Ar(f64),
    CompoundSymmetry(f64),
    SparseFactor,
}

/// Unit-diagonal covariance of the requested kind. Only `SparseFactor`
/// draws from `rng`.
pub fn build_covariance<R: Rng + ?Sized>(kind: CovarianceKind, p: usize, rng: &mut R) -> Result<SymMatrix> {
    if p < 2 {
        return invalid(format!("covariance dimension must be at least 2, got {p}"));
    }
    match kind {
        CovarianceKind::Ar(rho) => {
            if !(rho.abs() < 1.0) {
                return invalid(format!("AR correlation must satisfy |rho| < 1, got {rho}"));
            }
            Ok(SymMatrix::from_fn(p, |i, j| if i == j { 1.0 } else { rho.powi((j - i) as i32) }))
        }
        CovarianceKind::CompoundSymmetry(rho) => {
            let lower = -1.0 / (p - 1) as f64;
            if !(rho > lower && rho < 1.0) {
                return invalid(format!("compound symmetry needs {lower} < rho < 1, got {rho}"));
            }
            Ok(SymMatrix::from_fn(p, |i, j| if i == j { 1.0 } else { rho }))
        }
        CovarianceKind::SparseFactor => {
            let column: Vec<usize> = (0..p).map(|_| rng.random_range(0..p)).collect();
            let value: Vec<f64> = (0..p).map(|_| rng.random_range(1.0..=2.0)).collect();
            let diag: Vec<f64> = value.iter().map(|v| v * v + 1.0).collect();
            Ok(SymMatrix::from_fn(p, |i, j| {
                if i == j {
                    1.0
                } else if column[i] == column[j] {
                    value[i] * value[j] / (diag[i] * diag[j]).sqrt()
                } else {
                    0.0
                }
            }))
        }
    }
}
