//! Graphical lasso by blockwise coordinate descent on the covariance
//! estimate `W`. Only off-diagonal entries of the precision are penalized,
//! so `W_jj` stays at the sample variance.

use crate::error::{Result, SdaError};
use crate::linalg::{inverse_pd, Cholesky, SymMatrix};
use crate::screening::soft_threshold;

#[derive(Debug, Clone, Copy)]
pub struct GlassoSettings {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Outer loop stops when the mean absolute change of `W` falls below
    /// `tol` times the mean absolute off-diagonal of `S`.
    pub tol: f64,
}

impl Default for GlassoSettings {
    fn default() -> Self {
        Self { max_outer: 200, max_inner: 1000, tol: 1e-4 }
    }
}

/// Sparse precision estimate for covariance `s` with off-diagonal penalty
/// `penalty`.
pub fn graphical_lasso(s: &SymMatrix, penalty: f64, settings: GlassoSettings) -> Result<SymMatrix> {
    let p = s.dim();
    if p == 1 {
        return inverse_pd(s).map_err(|_| SdaError::NotPsd { min_eigenvalue: s.get(0, 0) });
    }
    let mut w = s.clone();
    let mut beta = vec![0.0; p * p]; // column j of the regression in row j
    let off_scale = {
        let mut sum = 0.0;
        for i in 0..p {
            for j in (i + 1)..p {
                sum += s.get(i, j).abs();
            }
        }
        (sum / (p * (p - 1) / 2) as f64).max(f64::MIN_POSITIVE)
    };

    let mut wb = vec![0.0; p];
    let mut converged = false;
    for _ in 0..settings.max_outer {
        let mut change = 0.0;
        for j in 0..p {
            let b = &mut beta[j * p..(j + 1) * p];
            // wb = W₁₁ β over k ≠ j; β_j stays 0
            for k in 0..p {
                wb[k] = if k == j { 0.0 } else { dot_skip(w.row(k), b, j) };
            }
            for _ in 0..settings.max_inner {
                let mut max_delta = 0.0_f64;
                for k in 0..p {
                    if k == j {
                        continue;
                    }
                    let wkk = w.get(k, k);
                    let old = b[k];
                    let r = s.get(k, j) - (wb[k] - wkk * old);
                    let new = soft_threshold(r, penalty) / wkk;
                    if new != old {
                        let delta = new - old;
                        b[k] = new;
                        let wk = w.row(k);
                        for (l, wbl) in wb.iter_mut().enumerate() {
                            if l != j {
                                *wbl += delta * wk[l];
                            }
                        }
                        max_delta = max_delta.max(delta.abs() * wkk.sqrt());
                    }
                }
                if max_delta < 1e-10 {
                    break;
                }
            }
            for k in 0..p {
                if k == j {
                    continue;
                }
                change += (w.get(k, j) - wb[k]).abs();
                w.set_sym(k, j, wb[k]);
            }
        }
        if change / (p * (p - 1)) as f64 <= settings.tol * off_scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SdaError::DidNotConverge { what: "graphical lasso", iterations: settings.max_outer });
    }

    let mut theta = SymMatrix::zeros(p);
    let mut raw = vec![0.0; p * p];
    for j in 0..p {
        let b = &beta[j * p..(j + 1) * p];
        let wjj = w.get(j, j);
        let denom = wjj - dot_skip(w.row(j), b, j);
        let tjj = 1.0 / denom;
        for k in 0..p {
            raw[k * p + j] = if k == j { tjj } else { -b[k] * tjj };
        }
    }
    for i in 0..p {
        for j in i..p {
            theta.set_sym(i, j, 0.5 * (raw[i * p + j] + raw[j * p + i]));
        }
    }
    if theta.is_finite() && Cholesky::new(&theta).is_ok() {
        Ok(theta)
    } else {
        // W is positive definite at every iterate; fall back to its inverse.
        inverse_pd(&w)
    }
}

fn dot_skip(a: &[f64], b: &[f64], skip: usize) -> f64 {
    let mut s = 0.0;
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        if k != skip {
            s += x * y;
        }
    }
    s
}
