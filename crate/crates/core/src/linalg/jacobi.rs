//! Cyclic Jacobi rotations for real symmetric matrices, and Hermitian
//! eigendecomposition through the real symmetric embedding
//! `[[Re H, -Im H], [Im H, Re H]]`.

use num_complex::Complex64;

use super::matrix::{CMatrix, RMatrix};
use crate::error::{Error, Result};

pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues (unsorted) and eigenvectors (columns) of a symmetric matrix.
pub fn symmetric_eigen(a: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    if !a.is_square() {
        return Err(Error::ContractViolation("symmetric_eigen needs a square matrix".into()));
    }
    let n = a.rows();
    let mut a = a.clone();
    let mut v = RMatrix::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 || n < 2 {
        return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
    }

    let off_norm = |a: &RMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    for _sweep in 0..MAX_SWEEPS {
        if off_norm(&a) <= OFF_DIAGONAL_TOL * scale {
            return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // negligible against both diagonal entries: drop it
                if apq.abs() < 1e-18 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if off_norm(&a) <= OFF_DIAGONAL_TOL * scale {
        return Ok(((0..n).map(|i| a[(i, i)]).collect(), v));
    }
    Err(Error::NoConvergence(format!("Jacobi iteration exceeded {MAX_SWEEPS} sweeps")))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::ContractViolation("hermitian_eigen needs a square matrix".into()));
    }
    let n = h.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let embed = RMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = h[(ii, jj)];
        match (bi, bj) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let (vals, vecs) = symmetric_eigen(&embed)?;
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));

    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let gap = 1e-11 * scale;

    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n && vals[order[end]] - vals[order[end - 1]] <= gap {
            end += 1;
        }
        let size = end - start;
        if size % 2 != 0 {
            return Err(Error::ContractViolation(
                "embedding eigenvalues did not pair up; input is not Hermitian".into(),
            ));
        }
        let candidates: Vec<Vec<Complex64>> = order[start..end]
            .iter()
            .map(|&c| (0..n).map(|i| Complex64::new(vecs[(i, c)], vecs[(i + n, c)])).collect())
            .collect();
        let basis = pivoted_gram_schmidt(candidates, size / 2);
        if basis.len() != size / 2 {
            return Err(Error::ContractViolation("degenerate cluster lost rank".into()));
        }
        let cluster: Vec<f64> = order[start..end].iter().map(|&c| vals[c]).collect();
        for (pair, vector) in cluster.chunks(2).zip(basis) {
            values.push(0.5 * (pair[0] + pair[1]));
            columns.push(vector);
        }
        start = end;
    }

    let vectors = CMatrix::from_fn(n, n, |i, j| columns[j][i]);
    Ok(HermitianEigen { values, vectors })
}

fn pivoted_gram_schmidt(mut cands: Vec<Vec<Complex64>>, want: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(want);
    while basis.len() < want && !cands.is_empty() {
        // project out the current basis from every candidate
        for c in cands.iter_mut() {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(c.iter()).map(|(x, y)| x.conj() * y).sum();
                for (ci, bi) in c.iter_mut().zip(b) {
                    *ci -= proj * bi;
                }
            }
        }
        let (best, norm) = cands
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if norm < 1e-8 {
            break;
        }
        let mut v = cands.swap_remove(best);
        for z in v.iter_mut() {
            *z /= norm;
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonalizes_small_symmetric() {
        let a = RMatrix::from_rows(3, 3, vec![2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let (mut vals, _) = symmetric_eigen(&a).unwrap();
        vals.sort_by(f64::total_cmp);
        let s2 = 2f64.sqrt();
        let expected = [2.0 - s2, 2.0, 2.0 + s2];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_pauli_y() {
        let h = CMatrix::from_rows(
            2,
            2,
            vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
        );
        let eig = hermitian_eigen(&h).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        for j in 0..2 {
            let v = eig.vectors.column(j);
            let hv = h.matvec(&v);
            for i in 0..2 {
                assert!((hv[i] - v[i] * eig.values[j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_identity_keeps_full_basis() {
        let h = CMatrix::identity(4).scale(Complex64::new(3.0, 0.0));
        let eig = hermitian_eigen(&h).unwrap();
        assert_eq!(eig.values, vec![3.0; 4]);
        let g = eig.vectors.conj_transpose().matmul(&eig.vectors);
        assert!(g.max_abs_diff(&CMatrix::identity(4)) < 1e-13);
    }
}
