use num_complex::Complex64;
use num_traits::Zero;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct ComplexLu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl ComplexLu {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::ContractViolation("LU needs a square matrix".into()));
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap_or((k, 0.0));
            if pivot == 0.0 {
                return Err(Error::Conditioning(format!("singular matrix at column {k}")));
            }
            lu.swap_rows(k, p);
            perm.swap(k, p);
            let inv = lu[(k, k)].inv();
            for i in k + 1..n {
                let f = lu[(i, k)] * inv;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// Ratio of smallest to largest `|U_ii|`; a cheap conditioning proxy.
    pub fn pivot_ratio(&self) -> f64 {
        let n = self.lu.rows();
        if n == 0 {
            return 1.0;
        }
        let diag: Vec<f64> = (0..n).map(|i| self.lu[(i, i)].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        min / max
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.rows();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        let n = self.lu.rows();
        let mut out = CMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j));
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let c = |re, im| Complex64::new(re, im);
        let a = CMatrix::from_rows(2, 2, vec![c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), c(1.0, -1.0)]);
        let lu = ComplexLu::new(&a).unwrap();
        let x = vec![c(1.0, 2.0), c(-0.5, 0.25)];
        let b = a.matvec(&x);
        let y = lu.solve_vec(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_is_rejected() {
        let a = CMatrix::zeros(3, 3);
        assert!(matches!(ComplexLu::new(&a), Err(Error::Conditioning(_))));
    }
}
