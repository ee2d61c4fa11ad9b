use num_complex::Complex64;
use serde::Serialize;

use super::{global_index_range, PerturbMatrix};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::quadrature::ball_volume;
use crate::special::sphere_area;

/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_GAP: f64 = 1e-9;

/// Sorted first-order eigenvalues of `M^(d,k)` and their decomposition
/// `M = scalar_part * I + E`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub d: usize,
    pub k: u32,
    pub index_range: (u64, u64),
    pub lambda1: Vec<f64>,
    pub e: Vec<f64>,
    pub scalar_part: f64,
    pub trace_residual: f64,
    /// Index groups of (numerically) degenerate eigenvalues.
    pub clusters: Vec<Vec<usize>>,
    /// Columns are the eigenvectors, aligned with `lambda1`.
    #[serde(skip)]
    pub eigenvectors: CMatrix,
}

fn hermitian_tolerance(m: &CMatrix) -> f64 {
    1e-10 * m.max_abs().max(1.0)
}

pub fn eigen_spectrum(m: &PerturbMatrix, a01: f64) -> Result<SpectrumReport> {
    let defect = m.matrix.hermitian_defect();
    if defect > hermitian_tolerance(&m.matrix) {
        return Err(Error::ContractViolation(format!("matrix is not Hermitian: max |M - M^H| = {defect:e}")));
    }
    let eig = hermitian_eigen(&m.matrix)?;
    let kf = m.k as f64;
    let root_area = sphere_area(m.d).sqrt();
    let scalar_part = -kf * a01 / root_area;
    let e: Vec<f64> = eig.values.iter().map(|l| l - scalar_part).collect();
    let n = m.size() as f64;
    let trace_residual = m.matrix.trace().re + kf * a01 * n / root_area;

    let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, v) in eig.values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - eig.values[*c.last().unwrap()]).abs() <= CLUSTER_GAP * scale => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }

    Ok(SpectrumReport {
        d: m.d,
        k: m.k,
        index_range: global_index_range(m.d, m.k)?,
        lambda1: eig.values,
        e,
        scalar_part,
        trace_residual,
        clusters,
        eigenvectors: eig.vectors,
    })
}

/// `E = M + (k A_{0,1} / |S^d|^{1/2}) I`, the trace-free part.
pub fn traceless_part(m: &PerturbMatrix, a01: f64) -> CMatrix {
    let shift = m.k as f64 * a01 / sphere_area(m.d).sqrt();
    m.matrix.add(&CMatrix::identity(m.size()).scale(Complex64::new(shift, 0.0)))
}

/// `(Lambda^0, Lambda^1_j)` for each branch of the volume-normalized expansion
/// `Lambda = k |B|^{1/(d+1)} + eps e_j |B|^{1/(d+1)} + O(eps^2)`.
pub fn normalized_expansion(report: &SpectrumReport) -> Vec<(f64, f64)> {
    let b = ball_volume(report.d).powf(1.0 / (report.d as f64 + 1.0));
    report.e.iter().map(|e| (report.k as f64 * b, e * b)).collect()
}
