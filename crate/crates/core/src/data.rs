use crate::error::{invalid, Result};
use crate::linalg::SymMatrix;

/// `n × p` observations, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn from_row_major(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return invalid(format!("data matrix must be non-empty, got {n}x{p}"));
        }
        if data.len() != n * p {
            return invalid(format!("expected {} values for {n}x{p} data, got {}", n * p, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("data contain non-finite values");
        }
        Ok(Self { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return invalid("data matrix has no rows");
        };
        let p = first.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return invalid(format!("row {i} has {} columns, expected {p}", r.len()));
        }
        Self::from_row_major(rows.len(), p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column means over the given rows.
    pub fn mean_of_rows(&self, rows: &[usize]) -> Vec<f64> {
        let mut mean = vec![0.0; self.p];
        for &i in rows {
            for (m, v) in mean.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let k = rows.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= k);
        mean
    }

    pub fn column_means(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.n).collect();
        self.mean_of_rows(&all)
    }

    /// Sample covariance of the given rows with `1/k` normalization.
    pub fn covariance_of_rows(&self, rows: &[usize]) -> SymMatrix {
        let mean = self.mean_of_rows(rows);
        let p = self.p;
        let mut acc = vec![0.0; p * p];
        let mut centered = vec![0.0; p];
        for &i in rows {
            for ((c, v), m) in centered.iter_mut().zip(self.row(i)).zip(&mean) {
                *c = v - m;
            }
            for a in 0..p {
                let ca = centered[a];
                if ca == 0.0 {
                    continue;
                }
                let row = &mut acc[a * p..(a + 1) * p];
                for b in a..p {
                    row[b] += ca * centered[b];
                }
            }
        }
        let k = rows.len().max(1) as f64;
        SymMatrix::from_fn(p, |a, b| acc[a * p + b] / k)
    }

    /// Per-column variance with `1/(k−1)` normalization.
    pub fn column_variances(&self) -> Vec<f64> {
        let mean = self.column_means();
        let mut var = vec![0.0; self.p];
        for i in 0..self.n {
            for ((s, v), m) in var.iter_mut().zip(self.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let d = (self.n.saturating_sub(1)).max(1) as f64;
        var.iter_mut().for_each(|s| *s /= d);
        var
    }

    /// New matrix holding the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> DataMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.p);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        DataMatrix { n: rows.len(), p: self.p, data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn means_and_covariance() {
        let d = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 6.0]]).unwrap();
        assert_eq!(d.column_means(), vec![2.0, 4.0]);
        let c = d.covariance_of_rows(&[0, 1]);
        assert_eq!(c.as_slice(), &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(d.column_variances(), vec![2.0, 8.0]);
        assert_eq!(d.mean_of_rows(&[1]), vec![3.0, 6.0]);
    }

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(DataMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(DataMatrix::from_rows(&[]).is_err());
        assert!(DataMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
    }
}
