//! LASSO screening on the first half of the split.
//!
//! The objective is `‖y − Xμ‖² + λ‖μ‖₁` with no ½ or 1/n factor, so the
//! orthogonal-design solution soft-thresholds at `λ/2` and the all-zero
//! solution starts at `λ_max = 2‖Xᵀy‖_∞`.

use crate::error::{invalid, Result};
use crate::linalg::{dot, SymMatrix};

pub const DEFAULT_GRID_LEN: usize = 50;
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

/// Default KKT tolerance, `1e-7·p`.
pub fn default_tol(p: usize) -> f64 {
    1e-7 * p as f64
}

/// Default cap on the screened set, `⌊p/3⌋` (at least one).
pub fn default_cap(p: usize) -> usize {
    (p / 3).max(1)
}

#[derive(Debug, Clone, Copy)]
pub struct LassoProblem<'a> {
    design: &'a SymMatrix,
    response: &'a [f64],
    penalty: f64,
}

impl<'a> LassoProblem<'a> {
    pub fn new(design: &'a SymMatrix, response: &'a [f64], penalty: f64) -> Result<Self> {
        if design.dim() != response.len() {
            return invalid(format!("design is {0}x{0} but response has length {1}", design.dim(), response.len()));
        }
        if !(penalty >= 0.0) || !penalty.is_finite() {
            return invalid(format!("penalty must be finite and non-negative, got {penalty}"));
        }
        Ok(Self { design, response, penalty })
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }
}

/// Output of a single coordinate-descent solve.
#[derive(Debug, Clone)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    pub kkt_residual: f64,
    /// `false` when the sweep budget ran out; `coefficients` is then the last
    /// iterate.
    pub converged: bool,
}

/// Quadratic data in Gram form: `G = XᵀX`, `c = Xᵀy`, `yᵀy`.
#[derive(Debug, Clone)]
pub struct GramSystem<'g> {
    gram: &'g SymMatrix,
    xty: Vec<f64>,
    yty: f64,
}

impl<'g> GramSystem<'g> {
    pub fn new(gram: &'g SymMatrix, xty: Vec<f64>, yty: f64) -> Self {
        assert_eq!(gram.dim(), xty.len(), "Gram/Xᵀy dimension mismatch");
        Self { gram, xty, yty }
    }

    pub fn dim(&self) -> usize {
        self.xty.len()
    }

    /// `2‖Xᵀy‖_∞`, the smallest penalty with an all-zero solution.
    pub fn lambda_max(&self) -> f64 {
        2.0 * self.xty.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `‖y − Xμ‖²`
    pub fn rss(&self, mu: &[f64]) -> f64 {
        let g = self.gradient(mu);
        self.rss_with_gradient(mu, &g)
    }

    fn rss_with_gradient(&self, mu: &[f64], grad: &[f64]) -> f64 {
        // yᵀy − 2cᵀμ + μᵀGμ with Gμ = grad + c
        (self.yty - dot(&self.xty, mu) + dot(mu, grad)).max(0.0)
    }

    pub fn objective(&self, mu: &[f64], penalty: f64) -> f64 {
        self.rss(mu) + penalty * mu.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `Gμ − c`, half the gradient of the smooth part.
    fn gradient(&self, mu: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = self.xty.iter().map(|c| -c).collect();
        for (j, &m) in mu.iter().enumerate() {
            if m != 0.0 {
                axpy(m, self.gram.row(j), &mut g);
            }
        }
        g
    }

    /// Coordinate descent from `start`, cycling 0..p−1 in fixed order.
    /// Full sweeps alternate with sweeps restricted to the current support.
    pub fn solve(&self, penalty: f64, start: &[f64], tol: f64, max_sweeps: usize) -> LassoFit {
        let p = self.dim();
        let mut mu = start.to_vec();
        let mut grad = self.gradient(&mu);
        let half = 0.5 * penalty;
        let mut sweeps = 0;
        let mut kkt = f64::INFINITY;

        while sweeps < max_sweeps {
            for j in 0..p {
                self.update(j, half, &mut mu, &mut grad);
            }
            sweeps += 1;
            kkt = kkt_residual(&mu, &grad, penalty);
            if kkt <= tol {
                return LassoFit { coefficients: mu, sweeps, kkt_residual: kkt, converged: true };
            }
            // settle the support before paying for another full sweep
            let active: Vec<usize> = (0..p).filter(|&j| mu[j] != 0.0).collect();
            while sweeps < max_sweeps {
                for &j in &active {
                    self.update(j, half, &mut mu, &mut grad);
                }
                sweeps += 1;
                let worst = active.iter().map(|&j| coordinate_kkt(mu[j], grad[j], penalty)).fold(0.0_f64, f64::max);
                if worst <= tol {
                    break;
                }
            }
        }
        if sweeps >= max_sweeps {
            kkt = kkt_residual(&mu, &grad, penalty);
        }
        LassoFit { coefficients: mu, sweeps, kkt_residual: kkt, converged: kkt <= tol }
    }

    #[inline]
    fn update(&self, j: usize, half_penalty: f64, mu: &mut [f64], grad: &mut [f64]) {
        let gjj = self.gram.get(j, j);
        if gjj <= 0.0 {
            return;
        }
        let old = mu[j];
        let r = gjj * old - grad[j];
        let new = soft_threshold(r, half_penalty) / gjj;
        if new != old {
            mu[j] = new;
            axpy(new - old, self.gram.row(j), grad);
        }
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

#[inline]
fn coordinate_kkt(mu: f64, half_grad: f64, penalty: f64) -> f64 {
    let g = 2.0 * half_grad;
    if mu != 0.0 {
        (g + penalty * mu.signum()).abs()
    } else {
        (g.abs() - penalty).max(0.0)
    }
}

fn kkt_residual(mu: &[f64], half_grad: &[f64], penalty: f64) -> f64 {
    mu.iter().zip(half_grad).map(|(&m, &g)| coordinate_kkt(m, g, penalty)).fold(0.0_f64, f64::max)
}

/// Solves the LASSO problem from a zero start.
pub fn lasso_cd(problem: &LassoProblem<'_>, tol: f64, max_sweeps: usize) -> Result<LassoFit> {
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let gram = problem.design.gram();
    let xty = problem.design.mul_vec(problem.response);
    let system = GramSystem::new(&gram, xty, dot(problem.response, problem.response));
    let start = vec![0.0; system.dim()];
    Ok(system.solve(problem.penalty, &start, tol, max_sweeps))
}

/// Screened set with the coefficients that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningResult {
    pub coefficients: Vec<f64>,
    pub selected: Vec<usize>,
    pub penalty_used: f64,
    pub aic_value: f64,
    /// Grid points whose solve hit the sweep budget.
    pub nonconverged: usize,
}

impl ScreeningResult {
    pub fn empty(p: usize) -> Self {
        Self { coefficients: vec![0.0; p], selected: Vec::new(), penalty_used: 0.0, aic_value: 0.0, nonconverged: 0 }
    }
}

/// `n_grid` log-spaced penalties from `lambda_max` down to `ratio·lambda_max`.
pub fn lambda_grid(lambda_max: f64, n_grid: usize, ratio: f64) -> Vec<f64> {
    if n_grid == 1 {
        return vec![lambda_max];
    }
    let lo = ratio.ln();
    (0..n_grid).map(|k| lambda_max * (lo * k as f64 / (n_grid - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct PathSettings {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl PathSettings {
    pub fn for_dim(p: usize) -> Self {
        Self { tol: default_tol(p), max_sweeps: DEFAULT_MAX_SWEEPS }
    }
}

/// Warm-started path over `grid`, keeping the point minimizing
/// `AIC(λ) = n1·RSS(λ) + 2·|support|`. Ties keep the larger penalty.
pub fn path_aic(system: &GramSystem<'_>, grid: &[f64], n1: usize, settings: PathSettings) -> Result<ScreeningResult> {
    if grid.is_empty() {
        return invalid("penalty grid is empty");
    }
    if grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return invalid("penalty grid values must be positive and finite");
    }
    if grid.windows(2).any(|w| w[0] <= w[1]) {
        return invalid("penalty grid must be strictly descending");
    }
    if n1 == 0 {
        return invalid("n1 must be at least 1");
    }
    let p = system.dim();
    let mut current = vec![0.0; p];
    let mut best: Option<ScreeningResult> = None;
    let mut nonconverged = 0;
    for &lambda in grid {
        let fit = system.solve(lambda, &current, settings.tol, settings.max_sweeps);
        if !fit.converged {
            nonconverged += 1;
            log::warn!(
                "LASSO at penalty {lambda:e} stopped after {} sweeps with KKT residual {:e}; skipping",
                fit.sweeps,
                fit.kkt_residual
            );
            current = fit.coefficients;
            continue;
        }
        let support: Vec<usize> = (0..p).filter(|&j| fit.coefficients[j] != 0.0).collect();
        let aic = n1 as f64 * system.rss(&fit.coefficients) + 2.0 * support.len() as f64;
        if best.as_ref().is_none_or(|b| aic < b.aic_value) {
            best = Some(ScreeningResult {
                coefficients: fit.coefficients.clone(),
                selected: support,
                penalty_used: lambda,
                aic_value: aic,
                nonconverged: 0,
            });
        }
        current = fit.coefficients;
    }
    match best {
        Some(mut b) => {
            b.nonconverged = nonconverged;
            Ok(b)
        }
        None => Err(crate::error::SdaError::DidNotConverge { what: "LASSO path", iterations: settings.max_sweeps }),
    }
}

/// AIC-selected LASSO screening from an explicit design and response.
pub fn lasso_path_aic(design: &SymMatrix, response: &[f64], grid: &[f64], n1: usize) -> Result<ScreeningResult> {
    LassoProblem::new(design, response, 0.0)?;
    let gram = design.gram();
    let system = GramSystem::new(&gram, design.mul_vec(response), dot(response, response));
    path_aic(&system, grid, n1, PathSettings::for_dim(design.dim()))
}

/// Keeps the `cap` largest `|μ̂₁ⱼ|` (ties to the smaller index) and zeroes
/// the rest.
pub fn cap_selection(mut result: ScreeningResult, cap: usize) -> ScreeningResult {
    let cap = cap.max(1);
    if result.selected.len() <= cap {
        return result;
    }
    let coef = &result.coefficients;
    let mut ranked = result.selected.clone();
    ranked.sort_by(|&a, &b| coef[b].abs().total_cmp(&coef[a].abs()).then(a.cmp(&b)));
    for &j in &ranked[cap..] {
        result.coefficients[j] = 0.0;
    }
    ranked.truncate(cap);
    ranked.sort_unstable();
    result.selected = ranked;
    result
}
