//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sda_core::SymMatrix;

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Scans every candidate threshold from the smallest up and returns the
/// first whose estimated FDP is at most `alpha`, with the rejected positions.
pub fn threshold_oracle(w: &[f64], alpha: f64, plus: bool) -> (f64, Vec<usize>) {
    let mut candidates: Vec<f64> = w.iter().filter(|v| **v != 0.0).map(|v| v.abs()).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    for &t in &candidates {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for &v in w {
            if v >= t {
                pos += 1;
            }
            if v <= -t {
                neg += 1;
            }
        }
        let num = neg as f64 + if plus { 1.0 } else { 0.0 };
        if num / (pos.max(1) as f64) <= alpha {
            let rejected = (0..w.len()).filter(|&j| w[j] >= t).collect();
            return (t, rejected);
        }
    }
    (f64::INFINITY, Vec::new())
}

/// Step-up by direct definition: the largest k with k p-values at most
/// `k·alpha/m`, rejecting every p-value at most that cutoff.
pub fn bh_oracle(p: &[f64], alpha: f64) -> Vec<usize> {
    let m = p.len();
    let mut k_hat = 0;
    for k in 1..=m {
        let cut = k as f64 * alpha / m as f64;
        if p.iter().filter(|&&v| v <= cut).count() >= k {
            k_hat = k;
        }
    }
    if k_hat == 0 {
        return Vec::new();
    }
    let mut sorted = p.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cutoff = sorted[k_hat - 1];
    (0..m).filter(|&j| p[j] <= cutoff).collect()
}

/// Random vector whose entries repeat magnitudes and include zeros, to
/// exercise ties.
pub fn tied_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let levels = rng.random_range(1..=len.max(1));
    (0..len)
        .map(|_| {
            let mag = rng.random_range(0..=levels) as f64 * 0.5;
            let sign = if rng.random_bool(0.3) { -1.0 } else { 1.0 };
            sign * mag
        })
        .collect()
}

pub fn continuous_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng) + 1.0).collect()
}

/// Symmetric orthogonal `I − 2vvᵀ/‖v‖²`.
pub fn householder(rng: &mut ChaCha8Rng, p: usize) -> SymMatrix {
    let v: Vec<f64> = (0..p).map(|_| normal(rng)).collect();
    let nv: f64 = v.iter().map(|x| x * x).sum();
    SymMatrix::from_fn(p, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / nv)
}

pub fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// `AAᵀ/p + I` with Gaussian `A`.
pub fn random_pd(rng: &mut ChaCha8Rng, p: usize) -> SymMatrix {
    let a: Vec<f64> = (0..p * p).map(|_| normal(rng)).collect();
    SymMatrix::from_fn(p, |i, j| {
        let s: f64 = (0..p).map(|k| a[i * p + k] * a[j * p + k]).sum();
        s / p as f64 + if i == j { 1.0 } else { 0.0 }
    })
}

/// Gauss-Jordan inverse with partial pivoting, kept separate from the
/// library's Cholesky path.
pub fn gauss_jordan_inverse(a: &SymMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut m: Vec<f64> = a.as_slice().to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].abs().total_cmp(&m[y * n + col].abs())).unwrap();
        for k in 0..n {
            m.swap(col * n + k, piv * n + k);
            inv.swap(col * n + k, piv * n + k);
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                if f != 0.0 {
                    for k in 0..n {
                        m[r * n + k] -= f * m[col * n + k];
                        inv[r * n + k] -= f * inv[col * n + k];
                    }
                }
            }
        }
    }
    inv
}
