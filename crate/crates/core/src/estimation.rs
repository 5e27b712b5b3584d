//! Precision acquisition, whitening of split means, and the restricted
//! least-squares refit on the second split.

use std::sync::Arc;

use crate::data::DataMatrix;
use crate::error::{invalid, Result, SdaError};
use crate::glasso::{graphical_lasso, GlassoSettings};
use crate::linalg::{check_index_set, complement, default_eig_floor, sqrt_psd, submatrix, Cholesky, SymMatrix};

/// How the precision matrix `Ω` is obtained.
#[derive(Debug, Clone)]
pub enum PrecisionSpec {
    /// A fixed, user-supplied `Ω`.
    Known(SymMatrix),
    /// `Ω = I`, regardless of the data.
    IdentityWorking,
    /// Graphical lasso on the first split. `None` uses `sqrt(log p / n1)`.
    GraphicalLasso { penalty: Option<f64> },
}

impl PrecisionSpec {
    pub fn glasso() -> Self {
        PrecisionSpec::GraphicalLasso { penalty: None }
    }

    /// `true` when `Ω` does not depend on the data.
    pub fn is_fixed(&self) -> bool {
        !matches!(self, PrecisionSpec::GraphicalLasso { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PrecisionSpec::Known(_) => "known",
            PrecisionSpec::IdentityWorking => "identity",
            PrecisionSpec::GraphicalLasso { .. } => "glasso",
        }
    }
}

pub fn default_glasso_penalty(p: usize, n1: usize) -> f64 {
    ((p as f64).ln() / n1 as f64).sqrt()
}

fn check_known(omega: &SymMatrix) -> Result<()> {
    Cholesky::new(omega).map(|_| ()).map_err(|_| {
        let min = crate::linalg::sym_eigen(omega).map(|e| e.min_value()).unwrap_or(f64::NAN);
        SdaError::NotPsd { min_eigenvalue: min }
    })
}

/// `Ω̂` from the first split `d1` according to `spec`.
pub fn estimate_precision(d1: &DataMatrix, spec: &PrecisionSpec) -> Result<SymMatrix> {
    match spec {
        PrecisionSpec::Known(omega) => {
            if omega.dim() != d1.p() {
                return invalid(format!("precision is {0}x{0} but data have p = {1}", omega.dim(), d1.p()));
            }
            check_known(omega)?;
            Ok(omega.clone())
        }
        PrecisionSpec::IdentityWorking => Ok(SymMatrix::identity(d1.p())),
        PrecisionSpec::GraphicalLasso { penalty } => {
            if d1.n() < 2 {
                return invalid("graphical lasso needs at least two samples in the first split");
            }
            let rows: Vec<usize> = (0..d1.n()).collect();
            let s = d1.covariance_of_rows(&rows);
            glasso_precision(s, penalty.unwrap_or_else(|| default_glasso_penalty(d1.p(), d1.n())))
        }
    }
}

/// Graphical lasso on a sample covariance, with a `1e-4·trace/p` diagonal
/// ridge when the covariance is singular.
pub fn glasso_precision(mut s: SymMatrix, penalty: f64) -> Result<SymMatrix> {
    if !(penalty >= 0.0) {
        return invalid(format!("graphical lasso penalty must be non-negative, got {penalty}"));
    }
    let p = s.dim();
    let singular = Cholesky::new(&s).is_err() || crate::linalg::sym_eigen(&s)?.min_value() <= 1e-10 * s.max_abs();
    if singular {
        let ridge = 1e-4 * s.trace() / p as f64;
        s.add_diagonal(if ridge > 0.0 { ridge } else { 1e-4 });
    }
    graphical_lasso(&s, penalty, GlassoSettings::default())
}

/// `X = Ω^{1/2}` together with its Gram matrix `XᵀX`.
#[derive(Debug, Clone)]
pub struct Whitener {
    x: SymMatrix,
    gram: SymMatrix,
}

impl Whitener {
    pub fn identity(p: usize) -> Self {
        Self { x: SymMatrix::identity(p), gram: SymMatrix::identity(p) }
    }

    pub fn from_precision(omega: &SymMatrix) -> Result<Self> {
        let x = sqrt_psd(omega, default_eig_floor(omega))?;
        Ok(Self::from_root(x))
    }

    /// Uses an already computed symmetric root `x`.
    pub fn from_root(x: SymMatrix) -> Self {
        let gram = x.gram();
        Self { x, gram }
    }

    pub fn x(&self) -> &SymMatrix {
        &self.x
    }

    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}

/// Whitened pseudo-responses for both halves of the split.
#[derive(Debug, Clone)]
pub struct WhitenedProblem {
    pub whitener: Arc<Whitener>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub n1: usize,
    pub n2: usize,
}

impl WhitenedProblem {
    pub fn new(whitener: Arc<Whitener>, xi_bar_1: &[f64], xi_bar_2: &[f64], n1: usize, n2: usize) -> Result<Self> {
        let p = whitener.dim();
        if xi_bar_1.len() != p || xi_bar_2.len() != p {
            return invalid(format!(
                "mean vectors have lengths {} and {}, expected {p}",
                xi_bar_1.len(),
                xi_bar_2.len()
            ));
        }
        if n1 == 0 || n2 == 0 {
            return invalid("both split sizes must be positive");
        }
        let y1 = whitener.x().mul_vec(xi_bar_1);
        let y2 = whitener.x().mul_vec(xi_bar_2);
        Ok(Self { whitener, y1, y2, n1, n2 })
    }

    pub fn x(&self) -> &SymMatrix {
        self.whitener.x()
    }

    pub fn dim(&self) -> usize {
        self.y1.len()
    }
}

/// `y_k = Ω^{1/2} ξ̄_k` for both halves.
pub fn whiten(omega: &SymMatrix, xi_bar_1: &[f64], xi_bar_2: &[f64], n1: usize, n2: usize) -> Result<WhitenedProblem> {
    let whitener = Arc::new(Whitener::from_precision(omega)?);
    WhitenedProblem::new(whitener, xi_bar_1, xi_bar_2, n1, n2)
}

/// Least-squares refit on the screened set.
#[derive(Debug, Clone, PartialEq)]
pub struct RefitResult {
    /// Length `p`, zero off the subset.
    pub mu2: Vec<f64>,
    /// `σ_{S,j}` in subset order.
    pub sigma: Vec<f64>,
    pub subset: Vec<usize>,
    /// `X_SᵀX_S` was singular and a `1e-8` ridge was added.
    pub ridge_fallback: bool,
}

const REFIT_PIVOT_FLOOR: f64 = 1e-10;
pub const REFIT_RIDGE: f64 = 1e-8;

/// `μ̂₂_S = (X_SᵀX_S)⁻¹ X_Sᵀ y₂` and `σ_{S,j}² = [(X_SᵀX_S)⁻¹]_jj`.
pub fn refit_lse(problem: &WhitenedProblem, subset: &[usize]) -> Result<RefitResult> {
    refit_inner(problem, subset, 0.0)
}

/// `refit_lse`, retrying with a ridge on `X_SᵀX_S` when it is singular.
pub fn refit_lse_or_ridge(problem: &WhitenedProblem, subset: &[usize]) -> Result<RefitResult> {
    match refit_inner(problem, subset, 0.0) {
        Err(SdaError::SingularSystem(msg)) => {
            log::warn!("restricted Gram matrix singular ({msg}); refitting with ridge {REFIT_RIDGE:e}");
            let mut r = refit_inner(problem, subset, REFIT_RIDGE)?;
            r.ridge_fallback = true;
            Ok(r)
        }
        other => other,
    }
}

fn refit_inner(problem: &WhitenedProblem, subset: &[usize], ridge: f64) -> Result<RefitResult> {
    let p = problem.dim();
    check_index_set(subset, p)?;
    let mut gram_s = submatrix(problem.whitener.gram(), subset)?;
    if ridge > 0.0 {
        gram_s.add_diagonal(ridge);
    }
    let chol = pivot_checked_cholesky(&gram_s)?;
    let x = problem.x();
    // X_Sᵀ y₂ with X symmetric: row j of X dotted with y₂
    let rhs: Vec<f64> = subset.iter().map(|&j| crate::linalg::dot(x.row(j), &problem.y2)).collect();
    let coef = chol.solve(&rhs);
    let inv = chol.inverse();
    let mut mu2 = vec![0.0; p];
    for (&j, &c) in subset.iter().zip(&coef) {
        mu2[j] = c;
    }
    let sigma: Vec<f64> = (0..subset.len()).map(|k| inv.get(k, k).sqrt()).collect();
    if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(SdaError::SingularSystem("non-positive refit variance".into()));
    }
    Ok(RefitResult { mu2, sigma, subset: subset.to_vec(), ridge_fallback: false })
}

fn pivot_checked_cholesky(a: &SymMatrix) -> Result<Cholesky> {
    let chol = Cholesky::new(a)?;
    if chol.min_pivot() <= REFIT_PIVOT_FLOOR.sqrt() {
        return Err(SdaError::SingularSystem(format!(
            "restricted Gram matrix has pivot {:e}",
            chol.min_pivot() * chol.min_pivot()
        )));
    }
    Ok(chol)
}

/// `Q = Σ_SS − Σ_{S,Sᶜ} Σ_{Sᶜ,Sᶜ}⁻¹ Σ_{Sᶜ,S}`, the covariance of the subset
/// given the rest.
pub fn conditional_covariance(sigma: &SymMatrix, subset: &[usize]) -> Result<SymMatrix> {
    let p = sigma.dim();
    let sigma_ss = submatrix(sigma, subset)?;
    let rest = complement(subset, p);
    if rest.is_empty() {
        return Ok(sigma_ss);
    }
    let chol = Cholesky::new(&submatrix(sigma, &rest)?)?;
    // columns of Σ_{Sᶜ,S} solved against Σ_{Sᶜ,Sᶜ}
    let solved: Vec<Vec<f64>> = subset
        .iter()
        .map(|&s| {
            let col: Vec<f64> = rest.iter().map(|&r| sigma.get(r, s)).collect();
            chol.solve(&col)
        })
        .collect();
    Ok(SymMatrix::from_fn(subset.len(), |a, b| {
        let correction: f64 = rest.iter().zip(&solved[b]).map(|(&r, v)| sigma.get(subset[a], r) * v).sum();
        sigma_ss.get(a, b) - correction
    }))
}
