//! Dense symmetric-matrix kernels.
//!
//! Everything here works on row-major `Vec<f64>` storage. Matrices in this
//! problem are at most a few thousand rows, so no sparse formats or blocking.

use crate::error::{invalid, Result, SdaError};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Square symmetric matrix, stored row-major. Symmetry is exact: every
/// constructor mirrors the upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn identity(dim: usize) -> Self {
        Self::diag(&vec![1.0; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be positive");
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Validates a row-major buffer. Entries must be finite and symmetric up
    /// to `1e-10 * max|a|`; the stored matrix is the exact average of the two
    /// triangles.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("matrix dimension must be positive");
        }
        if data.len() != dim * dim {
            return invalid(format!("expected {} entries for a {dim}x{dim} matrix, got {}", dim * dim, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("matrix has non-finite entries");
        }
        let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (data[i * dim + j] - data[j * dim + i]).abs() > tol {
                    return invalid(format!("matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(Self::from_fn(dim, |i, j| 0.5 * (data[i * dim + j] + data[j * dim + i])))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `max_ij |a_ij|`
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "dimension mismatch in mul_vec");
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    /// `AᵀA`, which for symmetric `A` is `A·A`.
    pub fn gram(&self) -> SymMatrix {
        Self::from_fn(self.dim, |i, j| dot(self.row(i), self.row(j)))
    }

    /// Adds `value` to every diagonal entry.
    pub fn add_diagonal(&mut self, value: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += value;
        }
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Entrywise sum `self + other`.
    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add");
        SymMatrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    /// `max_ij |a_ij - b_ij|`
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in max_abs_diff");
        self.data.iter().zip(&other.data).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenpairs sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    values: Vec<f64>,
    // row k holds the k-th eigenvector
    vectors_t: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Unit eigenvector for `values()[k]`.
    pub fn vector(&self, k: usize) -> &[f64] {
        let d = self.dim();
        &self.vectors_t[k * d..(k + 1) * d]
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty decomposition")
    }

    /// `V · diag(f(λ)) · Vᵀ`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.dim();
        let weights: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let mut out = SymMatrix::zeros(d);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let v = self.vector(k);
            for i in 0..d {
                let wi = w * v[i];
                if wi == 0.0 {
                    continue;
                }
                let row = &mut out.data[i * d..(i + 1) * d];
                for j in i..d {
                    row[j] += wi * v[j];
                }
            }
        }
        for i in 0..d {
            for j in (i + 1)..d {
                out.data[j * d + i] = out.data[i * d + j];
            }
        }
        out
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.map_spectrum(|v| v)
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn sym_eigen(a: &SymMatrix) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    let n = a.dim;
    let mut m = a.data.clone();
    let mut vt = SymMatrix::identity(n).data;
    let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(EigenDecomposition { values: vec![0.0; n], vectors_t: vt });
    }
    let stop = 1e-15 * frob;

    let mut converged = false;
    let mut row_p = vec![0.0; n];
    let mut row_q = vec![0.0; n];
    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= stop {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                row_p.copy_from_slice(&m[p * n..(p + 1) * n]);
                row_q.copy_from_slice(&m[q * n..(q + 1) * n]);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let new_p = c * row_p[k] - s * row_q[k];
                    let new_q = s * row_p[k] + c * row_q[k];
                    m[p * n + k] = new_p;
                    m[k * n + p] = new_p;
                    m[q * n + k] = new_q;
                    m[k * n + q] = new_q;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;

                let (head, tail) = vt.split_at_mut(q * n);
                let vp = &mut head[p * n..(p + 1) * n];
                let vq = &mut tail[..n];
                for k in 0..n {
                    let a = vp[k];
                    let b = vq[k];
                    vp[k] = c * a - s * b;
                    vq[k] = s * a + c * b;
                }
            }
        }
    }
    if !converged {
        return Err(SdaError::NumericalFailure(format!(
            "Jacobi eigendecomposition did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors_t = Vec::with_capacity(n * n);
    for &i in &order {
        vectors_t.extend_from_slice(&vt[i * n..(i + 1) * n]);
    }
    Ok(EigenDecomposition { values, vectors_t })
}

/// Eigenvalue floor used when the caller has no better scale: `1e-10·‖a‖_max`.
pub fn default_eig_floor(a: &SymMatrix) -> f64 {
    1e-10 * a.max_abs()
}

/// Symmetric PSD square root. Eigenvalues in `[-eig_floor, 0)` are clamped
/// to zero; anything more negative is rejected.
pub fn sqrt_psd(a: &SymMatrix, eig_floor: f64) -> Result<SymMatrix> {
    let eig = sym_eigen(a)?;
    sqrt_from_eigen(&eig, eig_floor)
}

pub fn sqrt_from_eigen(eig: &EigenDecomposition, eig_floor: f64) -> Result<SymMatrix> {
    let min = eig.min_value();
    if min < -eig_floor {
        return Err(SdaError::NotPsd { min_eigenvalue: min });
    }
    Ok(eig.map_spectrum(|v| v.max(0.0).sqrt()))
}

/// Lower-triangular Cholesky factor of a positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Fails with `SingularSystem` when a pivot drops below
    /// `1e-12·‖a‖_max`.
    pub fn new(a: &SymMatrix) -> Result<Self> {
        if !a.is_finite() {
            return invalid("matrix has non-finite entries");
        }
        let n = a.dim;
        let floor = 1e-12 * a.max_abs();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a.get(j, j) - l[j * n..j * n + j].iter().map(|v| v * v).sum::<f64>();
            if d <= floor || !d.is_finite() {
                return Err(SdaError::SingularSystem(format!("pivot {d:e} at column {j} is not positive")));
            }
            d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let s = a.get(i, j) - dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    /// Smallest diagonal entry of the factor.
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim).map(|j| self.lower[j * self.dim + j]).fold(f64::INFINITY, f64::min)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        assert_eq!(b.len(), n, "dimension mismatch in Cholesky::solve");
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let s = dot(&l[i * n..i * n + i], &y[..i]);
            y[i] = (y[i] - s) / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }

    pub fn inverse(&self) -> SymMatrix {
        let n = self.dim;
        let l = &self.lower;
        // L⁻¹ by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹.
        let mut linv = vec![0.0; n * n];
        for j in 0..n {
            linv[j * n + j] = 1.0 / l[j * n + j];
            for i in (j + 1)..n {
                let mut s = 0.0;
                for k in j..i {
                    s += l[i * n + k] * linv[k * n + j];
                }
                linv[i * n + j] = -s / l[i * n + i];
            }
        }
        SymMatrix::from_fn(n, |i, j| {
            let start = i.max(j);
            (start..n).map(|k| linv[k * n + i] * linv[k * n + j]).sum()
        })
    }
}

/// Solves `a·x = b` for positive definite `a`.
pub fn solve_psd(a: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.dim {
        return invalid(format!("right-hand side has length {}, expected {}", b.len(), a.dim));
    }
    Ok(Cholesky::new(a)?.solve(b))
}

pub fn inverse_pd(a: &SymMatrix) -> Result<SymMatrix> {
    Ok(Cholesky::new(a)?.inverse())
}

/// `a[idx, idx]`; `idx` must be non-empty, strictly increasing and in range.
pub fn submatrix(a: &SymMatrix, idx: &[usize]) -> Result<SymMatrix> {
    check_index_set(idx, a.dim)?;
    Ok(SymMatrix::from_fn(idx.len(), |r, c| a.get(idx[r], idx[c])))
}

pub(crate) fn check_index_set(idx: &[usize], dim: usize) -> Result<()> {
    if idx.is_empty() {
        return invalid("index set is empty");
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("index set must be strictly increasing");
    }
    if *idx.last().unwrap() >= dim {
        return invalid(format!("index {} out of range for dimension {dim}", idx.last().unwrap()));
    }
    Ok(())
}

/// Complement of a sorted index set within `0..dim`.
pub fn complement(idx: &[usize], dim: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(dim.saturating_sub(idx.len()));
    let mut it = idx.iter().peekable();
    for j in 0..dim {
        if it.peek() == Some(&&j) {
            it.next();
        } else {
            out.push(j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ar(p: usize, rho: f64) -> SymMatrix {
        SymMatrix::from_fn(p, |i, j| rho.powi((i as i32 - j as i32).abs()))
    }

    fn random_sym(rng: &mut impl Rng, p: usize) -> SymMatrix {
        SymMatrix::from_fn(p, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_psd(rng: &mut impl Rng, p: usize, rank: usize) -> SymMatrix {
        let b: Vec<f64> = (0..p * rank).map(|_| rng.random_range(-1.0..1.0)).collect();
        SymMatrix::from_fn(p, |i, j| (0..rank).map(|k| b[i * rank + k] * b[j * rank + k]).sum())
    }

    fn check_decomposition(a: &SymMatrix, eig: &EigenDecomposition) {
        let n = a.dim();
        let tol = 1e-10 * n as f64 * a.max_abs().max(1.0);
        assert!(eig.reconstruct().max_abs_diff(a) <= tol);
        for i in 0..n {
            for j in 0..n {
                let d = dot(eig.vector(i), eig.vector(j));
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() <= 1e-10, "VᵀV[{i},{j}] = {d}");
            }
        }
        assert!(eig.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn eigen_of_identity() {
        let eig = sym_eigen(&SymMatrix::identity(3)).unwrap();
        assert_eq!(eig.values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn eigen_of_two_by_two() {
        let a = SymMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = sym_eigen(&a).unwrap();
        assert!((eig.values()[0] - 3.0).abs() < 1e-14);
        assert!((eig.values()[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = eig.vector(0);
        assert!((v0[0].abs() - h).abs() < 1e-14 && (v0[0] - v0[1]).abs() < 1e-14);
        let v1 = eig.vector(1);
        assert!((v1[0].abs() - h).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
    }

    #[test]
    fn eigen_of_diagonal() {
        let eig = sym_eigen(&SymMatrix::diag(&[4.0, 9.0])).unwrap();
        assert_eq!(eig.values(), &[9.0, 4.0]);
        assert_eq!(eig.vector(0), &[0.0, 1.0]);
        assert_eq!(eig.vector(1), &[1.0, 0.0]);
    }

    #[test]
    fn eigen_rejects_non_finite() {
        let mut a = SymMatrix::identity(2);
        a.set_sym(0, 1, f64::NAN);
        assert!(matches!(sym_eigen(&a), Err(SdaError::InvalidInput(_))));
    }

    #[test]
    fn eigen_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in [1, 2, 5, 17, 40] {
            let a = random_sym(&mut rng, p);
            check_decomposition(&a, &sym_eigen(&a).unwrap());
        }
    }

    #[test]
    fn sqrt_examples() {
        let i4 = SymMatrix::identity(4);
        assert!(sqrt_psd(&i4, 1e-10).unwrap().max_abs_diff(&i4) < 1e-15);
        let b = sqrt_psd(&SymMatrix::diag(&[4.0, 9.0]), 1e-10).unwrap();
        assert!(b.max_abs_diff(&SymMatrix::diag(&[2.0, 3.0])) < 1e-15);
        let sigma = ar(3, 0.5);
        let root = sqrt_psd(&sigma, default_eig_floor(&sigma)).unwrap();
        assert!(root.gram().max_abs_diff(&sigma) <= 1e-8);
    }

    #[test]
    fn sqrt_clamps_tiny_negative_and_rejects_large_negative() {
        let a = SymMatrix::diag(&[1.0, -1e-12]);
        let b = sqrt_psd(&a, 1e-10).unwrap();
        assert_eq!(b.get(1, 1), 0.0);
        let bad = SymMatrix::diag(&[1.0, -0.5]);
        assert!(matches!(sqrt_psd(&bad, 1e-10), Err(SdaError::NotPsd { .. })));
    }

    #[test]
    fn sqrt_squares_back_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let p = rng.random_range(1..=50);
            let rank = rng.random_range(1..=p);
            let a = random_psd(&mut rng, p, rank);
            let b = sqrt_psd(&a, default_eig_floor(&a)).unwrap();
            assert!(b.gram().max_abs_diff(&a) <= 1e-8 * a.max_abs());
        }
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_psd(&SymMatrix::identity(3), &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        let x = solve_psd(&SymMatrix::diag(&[2.0, 4.0]), &[2.0, 8.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let a = SymMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let x = solve_psd(&a, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = SymMatrix::from_row_major(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(solve_psd(&a, &[1.0, 1.0]), Err(SdaError::SingularSystem(_))));
    }

    #[test]
    fn solve_recovers_random_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = rng.random_range(1..=30);
            let mut a = random_psd(&mut rng, p, p);
            a.add_diagonal(1.0);
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0)).collect();
            let got = solve_psd(&a, &a.mul_vec(&x)).unwrap();
            let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for (g, e) in got.iter().zip(&x) {
                assert!((g - e).abs() <= 1e-7 * scale);
            }
        }
    }

    #[test]
    fn inverse_matches_identity_product() {
        let a = ar(6, 0.7);
        let inv = inverse_pd(&a).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let v: f64 = (0..6).map(|k| a.get(i, k) * inv.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn submatrix_examples() {
        let a = ar(3, 0.5);
        assert_eq!(submatrix(&a, &[0, 1, 2]).unwrap(), a);
        let s = submatrix(&a, &[0, 2]).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 0.25, 0.25, 1.0]);
        assert_eq!(submatrix(&a, &[1]).unwrap().as_slice(), &[1.0]);
        assert!(submatrix(&a, &[]).is_err());
        assert!(submatrix(&a, &[3]).is_err());
        assert!(submatrix(&a, &[2, 1]).is_err());
    }

    #[test]
    fn from_row_major_checks_symmetry() {
        assert!(SymMatrix::from_row_major(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(SymMatrix::from_row_major(2, vec![1.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn complement_of_index_set() {
        assert_eq!(complement(&[1, 3], 5), vec![0, 2, 4]);
        assert_eq!(complement(&[], 2), vec![0, 1]);
    }
}
