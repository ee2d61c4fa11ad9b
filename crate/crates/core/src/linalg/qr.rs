//! Eigenvalues of a general complex matrix: Householder reduction to upper
//! Hessenberg form followed by single-shift implicit QR sweeps.

use num_complex::Complex64;
use num_traits::Zero;

use super::matrix::CMatrix;
use crate::error::{Error, Result};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

pub fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if alpha == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { v[0] / v[0].norm() };
        v[0] += phase * alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vn;
        }
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vt * s * 2.0;
            }
        }
        for i in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vt)| h[(i, k + 1 + t)] * vt).sum();
            for (t, vt) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= s * vt.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::zero();
        }
    }
    h
}

fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::zero());
    }
    if x.norm() == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let c = x.norm() / r;
    let s = (x / x.norm()) * y.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = half_tr + root;
    let l2 = half_tr - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of `a`, in no particular order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::ContractViolation("eigenvalues needs a square matrix".into()));
    }
    let n = a.rows();
    let mut eig = vec![Complex64::zero(); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut h = hessenberg(a);
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let mut diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if diag == 0.0 {
                diag = norm;
            }
            if sub <= eps * diag {
                h[(l, l - 1)] = Complex64::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence(format!("QR iteration stalled at index {hi}")));
        }
        let shift = if iter.is_multiple_of(11) {
            let s = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + Complex64::new(0.75 * s, 0.4375 * s)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::zero();
            rots.push((c, s));
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = l + off;
            for i in l..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eig)
}
