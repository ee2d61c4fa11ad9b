//! Direct spectral solve of the Steklov problem on `r < 1 + eps rho`.
//!
//! Trial functions are the interior harmonics `r^l Y_l^m` for `l <= L`; test
//! functions are `conj(Y_l^m)` on the parameter sphere. This gives the
//! generalized eigenproblem `A c = lambda B c` with
//! `A = int conj(Y) (grad u . n)` and `B = int conj(Y) u` on the boundary.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::{enumerate_indices, eval_complex_with_gradient, multiplicity, AngularPoint, HarmonicIndex};
use crate::linalg::{eigenvalues, CMatrix, ComplexLu};
use crate::perturbation::{assemble_matrix, eigen_spectrum, PerturbationFunction, Route};
use crate::quadrature::{build_grid, integrate_many, SphereGrid};

/// Imaginary parts above this are reported as discretization artifacts.
pub const IMAG_TOL: f64 = 1e-8;
const MIN_PIVOT_RATIO: f64 = 1e-10;

/// Radius `1 + eps rho` and the unit outward normal in the frame
/// `(r_hat, theta_hat_1, ..., theta_hat_d)`.
pub fn boundary_normal(rho: &PerturbationFunction, eps: f64, pt: &AngularPoint) -> Result<(f64, Vec<f64>)> {
    let (v, g) = rho.eval_with_gradient(pt)?;
    normal_from_values(eps, v, &g, pt)
}

fn normal_from_values(eps: f64, v: f64, g: &[f64], pt: &AngularPoint) -> Result<(f64, Vec<f64>)> {
    let r = 1.0 + eps * v;
    if r <= 0.0 {
        return Err(Error::Geometry(format!("radius {r} <= 0 at {:?}", pt.angles())));
    }
    let g2: f64 = g.iter().map(|x| x * x).sum();
    let norm = (r * r + eps * eps * g2).sqrt();
    let mut n = Vec::with_capacity(g.len() + 1);
    n.push(r / norm);
    n.extend(g.iter().map(|x| -eps * x / norm));
    Ok((r, n))
}

/// Assembled Galerkin matrices for one `eps`.
#[derive(Clone, Debug)]
pub struct GalerkinSystem {
    pub d: usize,
    pub band_limit: u32,
    pub eps: f64,
    pub basis: Vec<HarmonicIndex>,
    pub a: CMatrix,
    pub b: CMatrix,
}

/// `L = k + band(rho) + 2`.
pub fn default_band_limit(k: u32, rho: &PerturbationFunction) -> u32 {
    k + rho.band() + 2
}

/// Grid degree for the oracle: `2L + 2 band(rho) + 2`, which integrates every
/// term through second order in `eps` exactly.
pub fn oracle_degree(band_limit: u32, rho: &PerturbationFunction) -> usize {
    (2 * band_limit + 2 * rho.band() + 2) as usize
}

pub fn galerkin_basis(d: usize, band_limit: u32) -> Vec<HarmonicIndex> {
    (0..=band_limit).flat_map(|l| enumerate_indices(d, l)).collect()
}

pub fn assemble_galerkin(rho: &PerturbationFunction, eps: f64, band_limit: u32, grid: &SphereGrid) -> Result<GalerkinSystem> {
    let d = rho.dim();
    if grid.dim() != d {
        return Err(Error::ContractViolation("grid and perturbation dimensions differ".into()));
    }
    let need = (2 * band_limit + rho.band() + 2) as usize;
    if grid.degree() < need {
        return Err(Error::Precision(format!("oracle needs grid degree >= {need}, grid has {}", grid.degree())));
    }
    let basis = galerkin_basis(d, band_limit);
    let n = basis.len();
    let flat = integrate_many(grid, 2 * n * n, |pt, w, acc| {
        let (v, g) = rho.eval_with_gradient(pt)?;
        let (r, _) = normal_from_values(eps, v, &g, pt)?;
        let g2: f64 = g.iter().map(|x| x * x).sum();
        let inv_norm = 1.0 / (r * r + eps * eps * g2).sqrt();
        let mut vals = Vec::with_capacity(n);
        for idx in &basis {
            vals.push(eval_complex_with_gradient(idx, pt)?);
        }
        let (a_part, b_part) = acc.split_at_mut(n * n);
        for (j, (col, (y, gy))) in basis.iter().zip(&vals).enumerate() {
            let l = col.degree() as i32;
            let r_lm1 = r.powi(l - 1);
            let grad_dot: Complex64 = g.iter().zip(gy).map(|(a, b)| b * *a).sum();
            let flux = (*y * (l as f64 * r) - grad_dot * eps) * (r_lm1 * inv_norm * w);
            let trace = *y * (r_lm1 * r * w);
            for (i, (yi, _)) in vals.iter().enumerate() {
                let c = yi.conj();
                a_part[i * n + j] += c * flux;
                b_part[i * n + j] += c * trace;
            }
        }
        Ok(())
    })?;
    let (a, b) = flat.split_at(n * n);
    Ok(GalerkinSystem {
        d,
        band_limit,
        eps,
        basis,
        a: CMatrix::from_rows(n, n, a.to_vec()),
        b: CMatrix::from_rows(n, n, b.to_vec()),
    })
}

/// All eigenvalues of `B^{-1} A`.
pub fn full_spectrum(system: &GalerkinSystem) -> Result<Vec<Complex64>> {
    let lu = ComplexLu::new(&system.b)?;
    let ratio = lu.pivot_ratio();
    if ratio < MIN_PIVOT_RATIO {
        return Err(Error::Conditioning(format!("B pivot ratio {ratio:e} below {MIN_PIVOT_RATIO:e}")));
    }
    eigenvalues(&lu.solve_matrix(&system.a))
}

/// The `N(d,k)` eigenvalues nearest to `k`, sorted by real part.
#[derive(Clone, Debug, Serialize)]
pub struct ClusterSpectrum {
    pub k: u32,
    pub values: Vec<f64>,
    pub max_imag: f64,
    pub flagged: bool,
}

pub fn steklov_spectrum(system: &GalerkinSystem, k: u32) -> Result<ClusterSpectrum> {
    if k > system.band_limit {
        return Err(Error::Domain(format!("k = {k} exceeds band limit {}", system.band_limit)));
    }
    let mut all = full_spectrum(system)?;
    let target = Complex64::new(k as f64, 0.0);
    all.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
    all.truncate(multiplicity(system.d, k) as usize);
    let max_imag = all.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut values: Vec<f64> = all.iter().map(|z| z.re).collect();
    values.sort_by(f64::total_cmp);
    Ok(ClusterSpectrum { k, values, max_imag, flagged: max_imag > IMAG_TOL })
}

/// Degree-`k` cluster at a single `eps`, with default band limit and grid.
pub fn cluster_at(rho: &PerturbationFunction, k: u32, eps: f64, band_limit: Option<u32>) -> Result<ClusterSpectrum> {
    let l = band_limit.unwrap_or_else(|| default_band_limit(k, rho));
    let grid = build_grid(rho.dim(), oracle_degree(l, rho))?;
    steklov_spectrum(&assemble_galerkin(rho, eps, l, &grid)?, k)
}

/// Central-difference slopes `(lambda(eps) - lambda(-eps)) / 2 eps` of the
/// sorted cluster. Ascending order at `+eps` corresponds to descending order
/// at `-eps`, so the `-eps` cluster is reversed before differencing.
pub fn central_difference_slopes(plus: &[f64], minus: &[f64], eps: f64) -> Vec<f64> {
    let mut s: Vec<f64> = plus.iter().zip(minus.iter().rev()).map(|(p, m)| (p - m) / (2.0 * eps)).collect();
    s.sort_by(f64::total_cmp);
    s
}

/// `max_i |s_i - m_i| / max_i |m_i|`.
pub fn relative_error(slopes: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let diff = slopes.iter().zip(reference).fold(0.0f64, |a, (s, m)| a.max((s - m).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Slope study across several `eps` against the sorted spectrum of `M^(d,k)`.
#[derive(Clone, Debug, Serialize)]
pub struct SlopeStudy {
    pub d: usize,
    pub k: u32,
    pub band_limit: u32,
    pub eps_list: Vec<f64>,
    pub slopes: Vec<Vec<f64>>,
    pub m_eigs: Vec<f64>,
    pub rel_errors: Vec<f64>,
    pub max_rel_err: f64,
    /// `log2(err_i / err_{i+1})` for consecutive entries of `eps_list`.
    pub orders: Vec<f64>,
    pub max_imag: f64,
}

pub fn slope_study(rho: &PerturbationFunction, k: u32, eps_list: &[f64], band_limit: Option<u32>) -> Result<SlopeStudy> {
    if eps_list.is_empty() {
        return Err(Error::Domain("eps list is empty".into()));
    }
    let l = band_limit.unwrap_or_else(|| default_band_limit(k, rho));
    let grid = build_grid(rho.dim(), oracle_degree(l, rho))?;
    let m = assemble_matrix(Route::Wigner, k, rho)?;
    let m_eigs = eigen_spectrum(&m, rho.a01())?.lambda1;

    let mut slopes = Vec::with_capacity(eps_list.len());
    let mut rel_errors = Vec::with_capacity(eps_list.len());
    let mut max_imag: f64 = 0.0;
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {eps}")));
        }
        let plus = steklov_spectrum(&assemble_galerkin(rho, eps, l, &grid)?, k)?;
        let minus = steklov_spectrum(&assemble_galerkin(rho, -eps, l, &grid)?, k)?;
        max_imag = max_imag.max(plus.max_imag).max(minus.max_imag);
        let s = central_difference_slopes(&plus.values, &minus.values, eps);
        rel_errors.push(relative_error(&s, &m_eigs));
        slopes.push(s);
    }
    let orders = rel_errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let max_rel_err = rel_errors.iter().cloned().fold(0.0, f64::max);
    Ok(SlopeStudy { d: rho.dim(), k, band_limit: l, eps_list: eps_list.to_vec(), slopes, m_eigs, rel_errors, max_rel_err, orders, max_imag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_area;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn y2() -> PerturbationFunction {
        PerturbationFunction::single(HarmonicIndex::new(2, vec![0, 2]).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn normal_is_unit_and_radial_for_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = PerturbationFunction::new(
            3,
            vec![
                (HarmonicIndex::new(2, vec![1, 2]).unwrap(), 0.8),
                (HarmonicIndex::new(3, vec![-1, 1]).unwrap(), -0.5),
            ],
        )
        .unwrap();
        let c = PerturbationFunction::constant(3);
        for _ in 0..20 {
            let pt = AngularPoint::new(vec![rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0)]).unwrap();
            let (_, n) = boundary_normal(&rho, 0.1, &pt).unwrap();
            assert!((n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
            let (_, n0) = boundary_normal(&rho, 0.0, &pt).unwrap();
            assert_eq!(n0, vec![1.0, 0.0, 0.0, 0.0]);
            let (r, nc) = boundary_normal(&c, 0.3, &pt).unwrap();
            assert!((r - 1.0 - 0.3 / sphere_area(3).sqrt()).abs() < 1e-15);
            assert_eq!(nc[0], 1.0);
            assert!(nc[1..].iter().all(|x| *x == 0.0));
        }
        let neg = PerturbationFunction::constant(3);
        let pt = AngularPoint::new(vec![0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(boundary_normal(&neg, -100.0, &pt), Err(Error::Geometry(_))));
    }

    #[test]
    fn unperturbed_system_is_diagonal() {
        let rho = y2();
        let l = 4;
        let grid = build_grid(3, oracle_degree(l, &rho)).unwrap();
        let sys = assemble_galerkin(&rho, 0.0, l, &grid).unwrap();
        let n = sys.basis.len();
        let diag = CMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(sys.basis[i].degree() as f64, 0.0) } else { Complex64::new(0.0, 0.0) });
        assert!(sys.a.max_abs_diff(&diag) < 1e-12);
        assert!(sys.b.max_abs_diff(&CMatrix::identity(n)) < 1e-12);
        let c = steklov_spectrum(&sys, 2).unwrap();
        assert_eq!(c.values.len(), 9);
        assert!(c.values.iter().all(|v| (v - 2.0).abs() < 1e-10));
    }

    #[test]
    fn constant_rho_scales_the_spectrum() {
        let rho = PerturbationFunction::constant(3);
        let eps = 0.05;
        let radius = 1.0 + eps / sphere_area(3).sqrt();
        for k in 1..=3 {
            let c = cluster_at(&rho, k, eps, None).unwrap();
            for v in &c.values {
                assert!((v - k as f64 / radius).abs() < 1e-8, "k={k}: {v}");
            }
        }
    }

    #[test]
    fn slope_matches_matrix_for_y2() {
        let study = slope_study(&y2(), 1, &[1e-3], None).unwrap();
        assert!(study.max_rel_err < 1e-3, "{study:?}");
    }

    #[test]
    fn slope_pairing_reverses_minus_branch() {
        // lambda = k + eps s + eps^2 c for two branches
        let (s, c) = ([-1.0, 2.0], [3.0, -5.0]);
        let eps = 1e-2;
        let mut plus: Vec<f64> = (0..2).map(|i| 1.0 + eps * s[i] + eps * eps * c[i]).collect();
        let mut minus: Vec<f64> = (0..2).map(|i| 1.0 - eps * s[i] + eps * eps * c[i]).collect();
        plus.sort_by(f64::total_cmp);
        minus.sort_by(f64::total_cmp);
        let got = central_difference_slopes(&plus, &minus, eps);
        assert!((got[0] + 1.0).abs() < 1e-12 && (got[1] - 2.0).abs() < 1e-12);
    }
}
