//! The first-order perturbation matrix `M^(d,k)`: perturbation functions,
//! triple-product integrals, the two assembly routes, and spectral reports.

mod assembly;
mod closed_form;
mod spectrum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::{eval_real, eval_real_with_gradient, multiplicity, AngularPoint, HarmonicIndex};
use crate::linalg::CMatrix;

pub use assembly::{
    assemble_matrix, assemble_matrix_quadrature, assemble_matrix_wigner, assembly_degree, triple_integral_quadrature,
};
pub use closed_form::{diagnose_p2k, ClosedFormEngine, ExactPiRational, P2kDiagnostic, TripleTower};
pub use spectrum::{eigen_spectrum, normalized_expansion, traceless_part, SpectrumReport, CLUSTER_GAP};

/// One term `A * Y_{p,q}` of a perturbation function.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationTerm {
    pub index: HarmonicIndex,
    pub coeff: f64,
}

/// `rho = sum A_{p,q} Y_{p,q}` over a finite set of real harmonics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPerturbation", into = "RawPerturbation")]
pub struct PerturbationFunction {
    d: usize,
    terms: Vec<PerturbationTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturbation {
    d: usize,
    terms: Vec<RawTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    p: u32,
    q: Vec<i32>,
    #[serde(rename = "A")]
    a: f64,
}

impl TryFrom<RawPerturbation> for PerturbationFunction {
    type Error = Error;
    fn try_from(raw: RawPerturbation) -> Result<Self> {
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let idx = HarmonicIndex::new(t.p, t.q).map_err(|e| Error::InvalidPerturbation(e.to_string()))?;
            terms.push((idx, t.a));
        }
        PerturbationFunction::new(raw.d, terms)
    }
}

impl From<PerturbationFunction> for RawPerturbation {
    fn from(f: PerturbationFunction) -> Self {
        RawPerturbation {
            d: f.d,
            terms: f
                .terms
                .into_iter()
                .map(|t| RawTerm { p: t.index.degree(), q: t.index.tuple().to_vec(), a: t.coeff })
                .collect(),
        }
    }
}

impl PerturbationFunction {
    pub fn new(d: usize, terms: Vec<(HarmonicIndex, f64)>) -> Result<Self> {
        if d < 3 {
            return Err(Error::InvalidPerturbation(format!("dimension must be >= 3, got {d}")));
        }
        let mut out: Vec<PerturbationTerm> = Vec::with_capacity(terms.len());
        for (index, coeff) in terms {
            if index.dim() != d {
                return Err(Error::InvalidPerturbation(format!("term {index} has dimension {}, expected {d}", index.dim())));
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidPerturbation(format!("coefficient of {index} is not finite")));
            }
            if out.iter().any(|t| t.index == index) {
                return Err(Error::InvalidPerturbation(format!("duplicate term {index}")));
            }
            out.push(PerturbationTerm { index, coeff });
        }
        Ok(Self { d, terms: out })
    }

    pub fn zero(d: usize) -> Self {
        assert!(d >= 3, "dimension must be at least 3");
        Self { d, terms: Vec::new() }
    }

    /// `coeff * Y_{p,q}`.
    pub fn single(index: HarmonicIndex, coeff: f64) -> Result<Self> {
        Self::new(index.dim(), vec![(index, coeff)])
    }

    /// `Y_{0,(0,...,0)}`, the constant function `|S^d|^{-1/2}`.
    pub fn constant(d: usize) -> Self {
        Self { d, terms: vec![PerturbationTerm { index: HarmonicIndex::zonal(d, 0), coeff: 1.0 }] }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidPerturbation(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[PerturbationTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest degree `p` present (0 for the empty function).
    pub fn band(&self) -> u32 {
        self.terms.iter().map(|t| t.index.degree()).max().unwrap_or(0)
    }

    /// Coefficient of the constant harmonic.
    pub fn a01(&self) -> f64 {
        self.terms.iter().find(|t| t.index.degree() == 0).map_or(0.0, |t| t.coeff)
    }

    pub fn eval(&self, pt: &AngularPoint) -> Result<f64> {
        let mut s = 0.0;
        for t in &self.terms {
            s += t.coeff * eval_real(&t.index, pt)?;
        }
        Ok(s)
    }

    /// Value and surface gradient.
    pub fn eval_with_gradient(&self, pt: &AngularPoint) -> Result<(f64, Vec<f64>)> {
        let mut v = 0.0;
        let mut g = vec![0.0; self.d];
        for t in &self.terms {
            let (tv, tg) = eval_real_with_gradient(&t.index, pt)?;
            v += t.coeff * tv;
            for (a, b) in g.iter_mut().zip(tg) {
                *a += t.coeff * b;
            }
        }
        Ok((v, g))
    }

    /// `a * self + b * other`, merging equal harmonics.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::InvalidPerturbation("dimension mismatch".into()));
        }
        let mut terms: Vec<(HarmonicIndex, f64)> = self.terms.iter().map(|t| (t.index.clone(), a * t.coeff)).collect();
        for t in &other.terms {
            match terms.iter_mut().find(|(i, _)| *i == t.index) {
                Some(slot) => slot.1 += b * t.coeff,
                None => terms.push((t.index.clone(), b * t.coeff)),
            }
        }
        Self::new(self.d, terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Quadrature,
    Wigner,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Quadrature => "quadrature",
            Route::Wigner => "wigner",
        })
    }
}

/// Dense `M^(d,k)` in the canonical tuple order.
#[derive(Clone, Debug)]
pub struct PerturbMatrix {
    pub d: usize,
    pub k: u32,
    pub route: Route,
    pub basis: Vec<HarmonicIndex>,
    pub matrix: CMatrix,
}

impl PerturbMatrix {
    pub fn size(&self) -> usize {
        self.basis.len()
    }
}

/// Inclusive range `(1 + N_{d,k}, N_{d,k+1})` of global eigenvalue indices
/// belonging to the degree-`k` cluster, where `N_{d,k} = sum_{l=1}^{k-1} N(d,l)`.
pub fn global_index_range(d: usize, k: u32) -> Result<(u64, u64)> {
    if k < 1 {
        return Err(Error::Domain("global_index_range needs k >= 1".into()));
    }
    let below: u64 = (1..k).map(|l| multiplicity(d, l)).sum();
    Ok((1 + below, below + multiplicity(d, k)))
}
