//! Cholesky factorization of symmetric positive-definite banded matrices with
//! constant off-diagonals, as produced by `I + dt * (-Laplacian)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    // factor[i * (p + 1) + k] = L[i, i - k]
    factor: Vec<f64>,
}

impl BandedCholesky {
    /// `diag[i]` is `A[i, i]`; `off[k - 1]` is the constant `A[i, i - k]`.
    pub fn factor(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let p = off.len();
        let w = p + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for k in (1..=p.min(i)).rev() {
                let j = i - k;
                let mut sum = off[k - 1];
                for m in (k + 1)..=p.min(i) {
                    // L[i, i-m] * L[j, i-m], with i - m = j - (m - k)
                    sum -= l[i * w + m] * l[j * w + (m - k)];
                }
                l[i * w + k] = sum / l[j * w];
            }
            let mut d = diag[i];
            for k in 1..=p.min(i) {
                d -= l[i * w + k] * l[i * w + k];
            }
            if !(d > 0.0) {
                return Err(Error::Precondition(format!(
                    "banded matrix not positive definite at row {i}"
                )));
            }
            l[i * w] = d.sqrt();
        }
        Ok(BandedCholesky {
            n,
            bandwidth: p,
            factor: l,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, p, w) = (self.n, self.bandwidth, self.bandwidth + 1);
        let l = &self.factor;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let mut v = b[i];
            for k in 1..=p.min(i) {
                v -= l[i * w + k] * b[i - k];
            }
            b[i] = v / l[i * w];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in 1..=p.min(n - 1 - i) {
                v -= l[(i + k) * w + k] * b[i + k];
            }
            b[i] = v / l[i * w];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_apply(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                for (k, &o) in off.iter().enumerate() {
                    let k = k + 1;
                    if i >= k {
                        v += o * x[i - k];
                    }
                    if i + k < n {
                        v += o * x[i + k];
                    }
                }
                v
            })
            .collect()
    }

    #[test]
    fn solves_pentadiagonal_system() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + 0.1 * i as f64).collect();
        let off = [-4.0 / 3.0, 1.0 / 12.0];
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = dense_apply(&diag, &off, &x);
        let chol = BandedCholesky::factor(&diag, &off).unwrap();
        chol.solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn solves_tridiagonal_system() {
        let n = 25;
        let diag = vec![2.5; n];
        let off = [-1.0];
        let x: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let mut b = dense_apply(&diag, &off, &x);
        BandedCholesky::factor(&diag, &off).unwrap().solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_indefinite() {
        assert!(BandedCholesky::factor(&[1.0, 1.0, 1.0], &[2.0]).is_err());
    }
}
