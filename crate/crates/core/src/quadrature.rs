//! Tensor-product quadrature on `S^d`.
//!
//! The azimuth uses the uniform (trapezoidal) rule, exact for trigonometric
//! polynomials below the node count. Each inclination axis `j >= 2` uses a
//! Gauss rule in `z = cos(theta_j)` for the weight `(1 - z^2)^{(j-2)/2}`, i.e.
//! Gauss-Gegenbauer with parameter `(j-1)/2`; this absorbs the surface element
//! `sin^{j-1}(theta_j)` exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harmonics::AngularPoint;
use crate::linalg::{symmetric_eigen, RMatrix};
use crate::perturbation::PerturbationFunction;
use crate::special::{ln_gamma, sphere_area};

pub const DEFAULT_NODE_CAP: u128 = 100_000_000;
pub const NODE_CAP_ENV: &str = "STEKLOV_NODE_CAP";

/// Node cap from `STEKLOV_NODE_CAP`, falling back to [`DEFAULT_NODE_CAP`].
pub fn node_cap_from_env() -> u128 {
    std::env::var(NODE_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_NODE_CAP)
}

/// Gauss nodes and weights for `int_{-1}^{1} (1 - z^2)^{lambda - 1/2} f(z) dz`.
pub fn gauss_gegenbauer(n: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && lambda > 0.0);
    let b = |k: usize| {
        let k = k as f64;
        (k * (k + 2.0 * lambda - 1.0) / (4.0 * (k + lambda) * (k + lambda - 1.0))).sqrt()
    };
    let mu0 = (0.5 * PI.ln() + ln_gamma(lambda + 0.5).unwrap() - ln_gamma(lambda + 1.0).unwrap()).exp();

    let jac = RMatrix::from_fn(n, n, |i, j| if i + 1 == j { b(j) } else if j + 1 == i { b(i) } else { 0.0 });
    let (mut nodes, _) = symmetric_eigen(&jac).expect("tridiagonal Jacobi matrix");
    nodes.sort_by(f64::total_cmp);

    // orthonormal polynomial values p_0..p_n at z
    let orthonormal = |z: f64| {
        let mut p = Vec::with_capacity(n + 1);
        p.push(1.0 / mu0.sqrt());
        if n >= 1 {
            p.push(z * p[0] / b(1));
        }
        for k in 1..n {
            let next = (z * p[k] - b(k) * p[k - 1]) / b(k + 1);
            p.push(next);
        }
        p
    };

    let mut weights = Vec::with_capacity(n);
    for x in nodes.iter_mut() {
        // Newton polish on p_n, with p_n' from the standard derivative identity
        for _ in 0..3 {
            let p = orthonormal(*x);
            let pn = p[n];
            let pn1 = p[n - 1];
            let denom = 1.0 - *x * *x;
            if denom <= 0.0 {
                break;
            }
            // (1 - z^2) C_n' = -n z C_n + (n + 2 lambda - 1) C_{n-1}, rewritten for the
            // orthonormal family: (1 - z^2) p_n' = -n z p_n + 2 (n + lambda) b_n p_{n-1}
            let nf = n as f64;
            let dpn = (-nf * *x * pn + 2.0 * (nf + lambda) * b(n) * pn1) / denom;
            if dpn == 0.0 {
                break;
            }
            let step = pn / dpn;
            *x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let p = orthonormal(*x);
        weights.push(1.0 / p[..n].iter().map(|v| v * v).sum::<f64>());
    }
    (nodes, weights)
}

/// Quadrature grid on `S^d`.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    d: usize,
    degree: usize,
    phi: Vec<f64>,
    phi_weight: f64,
    /// `axes[j - 2]` holds `(z nodes, weights)` for `theta_j`.
    axes: Vec<(Vec<f64>, Vec<f64>)>,
    total: usize,
}

/// Grid exact for harmonic products of total degree `max_degree`, with the
/// node cap taken from the environment.
pub fn build_grid(d: usize, max_degree: usize) -> Result<SphereGrid> {
    build_grid_with_cap(d, max_degree, node_cap_from_env())
}

pub fn build_grid_with_cap(d: usize, max_degree: usize, cap: u128) -> Result<SphereGrid> {
    if d < 3 {
        return Err(Error::Domain(format!("grid dimension must be >= 3, got {d}")));
    }
    if max_degree < 1 {
        return Err(Error::Domain("grid degree must be >= 1".into()));
    }
    let n_phi = max_degree + 2;
    let n_z = (max_degree + 3) / 2;
    let nodes = (n_phi as u128).saturating_mul((n_z as u128).saturating_pow(d as u32 - 1));
    if nodes > cap {
        return Err(Error::ResourceCap { nodes, cap });
    }
    let phi: Vec<f64> = (0..n_phi).map(|i| 2.0 * PI * i as f64 / n_phi as f64).collect();
    let axes = (2..=d).map(|j| gauss_gegenbauer(n_z, (j as f64 - 1.0) / 2.0)).collect();
    Ok(SphereGrid { d, degree: max_degree, phi, phi_weight: 2.0 * PI / n_phi as f64, axes, total: nodes as usize })
}

impl SphereGrid {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Highest total harmonic degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn node_count(&self) -> usize {
        self.total
    }

    pub fn azimuth_nodes(&self) -> &[f64] {
        &self.phi
    }

    pub fn axis(&self, j: usize) -> (&[f64], &[f64]) {
        let (z, w) = &self.axes[j - 2];
        (z, w)
    }

    /// The `i`-th node and its weight; the azimuth index varies fastest.
    pub fn node(&self, i: usize) -> (AngularPoint, f64) {
        let n_phi = self.phi.len();
        let n_z = self.axes[0].0.len();
        let mut rest = i / n_phi;
        let mut w = self.phi_weight;
        let mut z = Vec::with_capacity(self.d - 1);
        for (nodes, weights) in &self.axes {
            let k = rest % n_z;
            rest /= n_z;
            z.push(nodes[k]);
            w *= weights[k];
        }
        (AngularPoint::from_azimuth_and_cosines(self.phi[i % n_phi], &z), w)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.total).map(move |i| self.node(i).1)
    }

    fn chunk_size(&self) -> usize {
        (self.total / 64).max(256)
    }
}

fn tree_sum(mut parts: Vec<Vec<Complex64>>) -> Vec<Complex64> {
    if parts.is_empty() {
        return Vec::new();
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// `int f dsigma` over the grid.
pub fn integrate_surface<F>(grid: &SphereGrid, f: F) -> Result<Complex64>
where
    F: Fn(&AngularPoint) -> Result<Complex64> + Sync,
{
    let v = integrate_many(grid, 1, |pt, w, acc| {
        acc[0] += f(pt)? * w;
        Ok(())
    })?;
    Ok(v[0])
}

/// Vector-valued integration. `f(point, weight, acc)` adds its weighted
/// contribution into `acc`. Summation order depends only on the grid, never
/// on the thread count.
pub fn integrate_many<F>(grid: &SphereGrid, len: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(&AngularPoint, f64, &mut [Complex64]) -> Result<()> + Sync,
{
    let chunk = grid.chunk_size();
    let n_chunks = grid.total.div_ceil(chunk);
    let parts: Result<Vec<Vec<Complex64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for i in c * chunk..((c + 1) * chunk).min(grid.total) {
                let (pt, w) = grid.node(i);
                f(&pt, w, &mut acc)?;
            }
            Ok(acc)
        })
        .collect();
    Ok(tree_sum(parts?))
}

/// `|Omega_eps| = (d+1)^{-1} int (1 + eps rho)^{d+1} dsigma`.
pub fn volume_of_perturbed(grid: &SphereGrid, rho: &PerturbationFunction, eps: f64) -> Result<f64> {
    if grid.dim() != rho.dim() {
        return Err(Error::ContractViolation(format!(
            "grid dimension {} does not match perturbation dimension {}",
            grid.dim(),
            rho.dim()
        )));
    }
    let d = grid.dim();
    let needed = (d + 1) * rho.band() as usize;
    if grid.degree() < needed {
        return Err(Error::Precision(format!("volume needs grid degree {needed}, grid has {}", grid.degree())));
    }
    let v = integrate_surface(grid, |pt| {
        let r = 1.0 + eps * rho.eval(pt)?;
        if r <= 0.0 {
            return Err(Error::Geometry(format!("radius {r} <= 0 at {:?}", pt.angles())));
        }
        Ok(Complex64::new(r.powi(d as i32 + 1), 0.0))
    })?;
    Ok(v.re / (d as f64 + 1.0))
}

/// Grid degree used for `(1 + eps rho)^{d+1}`.
pub fn volume_degree(d: usize, rho: &PerturbationFunction) -> usize {
    ((d + 1) * rho.band() as usize).max(1)
}

/// Volume of the unit ball in `R^{d+1}`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / (d as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{enumerate_indices, eval_complex, HarmonicIndex};

    #[test]
    fn gauss_legendre_three_points() {
        let (x, w) = gauss_gegenbauer(3, 0.5);
        let r = (0.6f64).sqrt();
        assert!((x[0] + r).abs() < 1e-15 && x[1].abs() < 1e-15 && (x[2] - r).abs() < 1e-15);
        assert!((w[0] - 5.0 / 9.0).abs() < 1e-14 && (w[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_rule_moments() {
        // int (1-z^2)^{lambda-1/2} z^{2m} dz = B(m + 1/2, lambda + 1/2)
        for &lambda in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            let n = 6;
            let (x, w) = gauss_gegenbauer(n, lambda);
            assert!(w.iter().all(|&v| v > 0.0));
            for m in 0..n {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * m as i32)).sum();
                let a = m as f64 + 0.5;
                let b = lambda + 0.5;
                let want = (ln_gamma(a).unwrap() + ln_gamma(b).unwrap() - ln_gamma(a + b).unwrap()).exp();
                assert!((got - want).abs() < 1e-13 * want, "lambda={lambda} m={m}");
            }
        }
    }

    #[test]
    fn surface_area() {
        for d in 3..=6 {
            let g = build_grid(d, 8).unwrap();
            let a = integrate_surface(&g, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
            assert!((a.re - sphere_area(d)).abs() < 1e-12 * sphere_area(d));
            assert!(g.weights().all(|w| w > 0.0));
        }
        let g = build_grid(3, 8).unwrap();
        let a = integrate_surface(&g, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((a.re - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_degree_three_in_d4() {
        let g = build_grid(4, 6).unwrap();
        let basis = enumerate_indices(4, 3);
        for a in &basis {
            for b in &basis {
                let v = integrate_surface(&g, |p| Ok(eval_complex(a, p)? * eval_complex(b, p)?.conj())).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - want).norm() < 1e-12, "{a} {b}: {v}");
            }
        }
    }

    #[test]
    fn mean_zero_harmonics() {
        let g = build_grid(3, 4).unwrap();
        for idx in enumerate_indices(3, 1) {
            let v = integrate_surface(&g, |p| eval_complex(&idx, p)).unwrap();
            assert!(v.norm() < 1e-12);
        }
        let idx = HarmonicIndex::new(2, vec![1, 2]).unwrap();
        let v = integrate_surface(&g, |p| Ok(eval_complex(&idx, p)?.norm_sqr().into())).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn node_cap_is_enforced() {
        match build_grid_with_cap(5, 20, 1000) {
            Err(Error::ResourceCap { nodes, cap }) => {
                assert_eq!(cap, 1000);
                assert_eq!(nodes, 22 * 11u128.pow(4));
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn integration_is_linear_and_deterministic() {
        let g = build_grid(3, 10).unwrap();
        let f = |p: &AngularPoint| p.angles()[1].cos() * p.angles()[0].sin() + 0.3;
        let h = |p: &AngularPoint| p.angles()[2].sin().powi(3);
        let a = Complex64::new(0.7, -1.3);
        let b = Complex64::new(-2.1, 0.4);
        let lhs = integrate_surface(&g, |p| Ok(a * f(p) + b * h(p))).unwrap();
        let rhs = a * integrate_surface(&g, |p| Ok(f(p).into())).unwrap()
            + b * integrate_surface(&g, |p| Ok(h(p).into())).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
        let again = integrate_surface(&g, |p| Ok(a * f(p) + b * h(p))).unwrap();
        assert_eq!(lhs, again);
    }
}
