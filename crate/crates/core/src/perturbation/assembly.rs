use num_complex::Complex64;

use super::closed_form::{ClosedFormEngine, TripleTower};
use super::{PerturbMatrix, PerturbationFunction, Route};
use crate::error::{Error, Result};
use crate::harmonics::{enumerate_indices, eval_complex, eval_complex_with_gradient, eval_real, HarmonicIndex};
use crate::linalg::CMatrix;
use crate::quadrature::{build_grid, integrate_many, integrate_surface, SphereGrid};

/// Grid degree that makes the quadrature route exact: `2k + P + 2`.
pub fn assembly_degree(k: u32, rho: &PerturbationFunction) -> usize {
    (2 * k + rho.band() + 2) as usize
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::Domain("cluster degree k must be >= 1".into()));
    }
    Ok(())
}

/// `W^{p,k}_{q,m,n}` by quadrature.
pub fn triple_integral_quadrature(
    grid: &SphereGrid,
    q: &HarmonicIndex,
    m: &HarmonicIndex,
    n: &HarmonicIndex,
) -> Result<Complex64> {
    if q.dim() != grid.dim() || m.dim() != grid.dim() || n.dim() != grid.dim() {
        return Err(Error::ContractViolation("index dimensions do not match the grid".into()));
    }
    let need = (q.degree() + m.degree() + n.degree()) as usize;
    if grid.degree() < need {
        return Err(Error::Precision(format!("triple integral needs grid degree {need}, grid has {}", grid.degree())));
    }
    integrate_surface(grid, |pt| Ok(eval_real(q, pt)? * eval_complex(m, pt)? * eval_complex(n, pt)?.conj()))
}

/// `M_{mn} = int rho (-k(k+d) Y^m conj(Y^n) + grad Y^m . grad conj(Y^n)) dsigma`.
pub fn assemble_matrix_quadrature(grid: &SphereGrid, k: u32, rho: &PerturbationFunction) -> Result<PerturbMatrix> {
    check_k(k)?;
    let d = rho.dim();
    if grid.dim() != d {
        return Err(Error::ContractViolation(format!("grid dimension {} but perturbation dimension {d}", grid.dim())));
    }
    let need = assembly_degree(k, rho);
    if grid.degree() < need {
        return Err(Error::Precision(format!("assembly needs grid degree {need}, grid has {}", grid.degree())));
    }
    let basis = enumerate_indices(d, k);
    let n = basis.len();
    let kk = (k * (k + d as u32)) as f64;
    if rho.is_empty() {
        return Ok(PerturbMatrix { d, k, route: Route::Quadrature, basis, matrix: CMatrix::zeros(n, n) });
    }
    let flat = integrate_many(grid, n * n, |pt, w, acc| {
        let r = rho.eval(pt)?;
        if r == 0.0 {
            return Ok(());
        }
        let mut vals = Vec::with_capacity(n);
        for idx in &basis {
            vals.push(eval_complex_with_gradient(idx, pt)?);
        }
        let rw = r * w;
        for (a, (ya, ga)) in vals.iter().enumerate() {
            for (b, (yb, gb)) in vals.iter().enumerate() {
                let dot: Complex64 = ga.iter().zip(gb).map(|(x, y)| x * y.conj()).sum();
                acc[a * n + b] += (ya * yb.conj() * (-kk) + dot) * rw;
            }
        }
        Ok(())
    })?;
    let matrix = CMatrix::from_rows(n, n, flat);
    Ok(PerturbMatrix { d, k, route: Route::Quadrature, basis, matrix })
}

/// `M_{mn} = -1/2 sum A_{p,q} (p(p+d-1) + 2k) W^{p,k}_{q,m,n}` using the
/// closed-form triple integrals. Only `m <= n` is evaluated; the rest is the
/// conjugate, so the result is Hermitian by construction.
pub fn assemble_matrix_wigner(engine: &mut ClosedFormEngine, k: u32, rho: &PerturbationFunction) -> Result<PerturbMatrix> {
    check_k(k)?;
    let d = rho.dim();
    let basis = enumerate_indices(d, k);
    let n = basis.len();
    let mut matrix = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for term in rho.terms() {
                let p = term.index.degree();
                let weight = -0.5 * term.coeff * (p * (p + d as u32 - 1) + 2 * k) as f64;
                if weight == 0.0 {
                    continue;
                }
                let tower = TripleTower::new(&term.index, &basis[a], &basis[b])?;
                let w = engine.triple_integral(&tower);
                if w != Complex64::new(0.0, 0.0) {
                    acc += w * weight;
                }
            }
            matrix[(a, b)] = acc;
            matrix[(b, a)] = acc.conj();
        }
    }
    Ok(PerturbMatrix { d, k, route: Route::Wigner, basis, matrix })
}

/// Assemble by the named route, building an exact grid when needed.
pub fn assemble_matrix(route: Route, k: u32, rho: &PerturbationFunction) -> Result<PerturbMatrix> {
    match route {
        Route::Wigner => assemble_matrix_wigner(&mut ClosedFormEngine::new(), k, rho),
        Route::Quadrature => {
            let grid = build_grid(rho.dim(), assembly_degree(k, rho))?;
            assemble_matrix_quadrature(&grid, k, rho)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_area;

    #[test]
    fn constant_rho_gives_scaled_identity() {
        for d in 3..=4 {
            for k in 1..=2 {
                let rho = PerturbationFunction::constant(d);
                let want = -(k as f64) / sphere_area(d).sqrt();
                for route in [Route::Quadrature, Route::Wigner] {
                    let m = assemble_matrix(route, k, &rho).unwrap();
                    let n = m.size();
                    let id = CMatrix::identity(n).scale(Complex64::new(want, 0.0));
                    assert!(m.matrix.max_abs_diff(&id) < 1e-12, "{route} d={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn small_cross_route_check() {
        let rho = PerturbationFunction::single(HarmonicIndex::new(2, vec![0, 2]).unwrap(), 1.0).unwrap();
        let q = assemble_matrix(Route::Quadrature, 1, &rho).unwrap();
        let w = assemble_matrix(Route::Wigner, 1, &rho).unwrap();
        assert!(q.matrix.max_abs_diff(&w.matrix) < 1e-10, "{:?}\n{:?}", q.matrix, w.matrix);
    }

    #[test]
    fn triple_integral_routes_agree() {
        let grid = build_grid(3, 12).unwrap();
        let mut e = ClosedFormEngine::new();
        for q in crate::harmonics::enumerate_indices(3, 2) {
            for m in crate::harmonics::enumerate_indices(3, 2) {
                for n in crate::harmonics::enumerate_indices(3, 2) {
                    let a = triple_integral_quadrature(&grid, &q, &m, &n).unwrap();
                    let b = e.triple_integral(&TripleTower::new(&q, &m, &n).unwrap());
                    assert!((a - b).norm() < 1e-12, "{q} {m} {n}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let rho = PerturbationFunction::single(HarmonicIndex::new(4, vec![0, 2]).unwrap(), 1.0).unwrap();
        let grid = build_grid(3, 6).unwrap();
        assert!(matches!(assemble_matrix_quadrature(&grid, 2, &rho), Err(Error::Precision(_))));
        let q = HarmonicIndex::zonal(3, 4);
        let m = HarmonicIndex::zonal(3, 2);
        assert!(matches!(triple_integral_quadrature(&grid, &q, &m, &m), Err(Error::Precision(_))));
    }
}
