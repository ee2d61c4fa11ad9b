//! Hyperspherical harmonics on `S^d`: index enumeration, complex and real
//! evaluation, surface gradients and normalization constants.
//!
//! Coordinates are `(theta_1, ..., theta_d)` with `theta_1` the azimuth in
//! `[0, 2 pi)` and `theta_j` in `[0, pi]` for `j >= 2`. The scale factor of
//! axis `j` is `eta_j = prod_{i > j} sin(theta_i)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    assoc_legendre_dtheta, assoc_legendre_unchecked, gegenbauer_unchecked, ln_factorial, ln_gamma,
    pochhammer, sphere_area,
};

/// Degree `l` and tuple `(m_1, ..., m_{d-1})`; the dimension is `m.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawIndex", into = "RawIndex")]
pub struct HarmonicIndex {
    l: u32,
    m: Vec<i32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndex {
    l: u32,
    m: Vec<i32>,
}

impl TryFrom<RawIndex> for HarmonicIndex {
    type Error = Error;
    fn try_from(raw: RawIndex) -> Result<Self> {
        HarmonicIndex::new(raw.l, raw.m)
    }
}

impl From<HarmonicIndex> for RawIndex {
    fn from(idx: HarmonicIndex) -> Self {
        RawIndex { l: idx.l, m: idx.m }
    }
}

impl HarmonicIndex {
    pub fn new(l: u32, m: Vec<i32>) -> Result<Self> {
        if m.len() < 2 {
            return Err(Error::InvalidIndex(format!(
                "tuple of length {} gives dimension {}, need d >= 3",
                m.len(),
                m.len() + 1
            )));
        }
        let mut prev = m[0].unsigned_abs();
        for (i, &mi) in m.iter().enumerate().skip(1) {
            if mi < 0 || (mi as u32) < prev {
                return Err(Error::InvalidIndex(format!("chain condition fails at m_{}: {:?}", i + 1, m)));
            }
            prev = mi as u32;
        }
        if prev > l {
            return Err(Error::InvalidIndex(format!("m_{} = {} exceeds degree {}", m.len(), prev, l)));
        }
        Ok(Self { l, m })
    }

    /// The all-zero tuple of degree `l`.
    pub fn zonal(d: usize, l: u32) -> Self {
        assert!(d >= 3, "dimension must be at least 3");
        Self { l, m: vec![0; d - 1] }
    }

    pub fn dim(&self) -> usize {
        self.m.len() + 1
    }

    pub fn degree(&self) -> u32 {
        self.l
    }

    pub fn tuple(&self) -> &[i32] {
        &self.m
    }

    pub fn m1(&self) -> i32 {
        self.m[0]
    }

    /// `[|m_1|, m_2, ..., m_{d-1}, l]`, the chain with `m_d = l` appended.
    pub fn chain(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.m.iter().map(|x| x.unsigned_abs()).collect();
        c.push(self.l);
        c
    }

    fn order_key(&self) -> (Vec<i32>, bool) {
        let mut key: Vec<i32> = self.m[1..].iter().rev().copied().collect();
        key.push(self.m[0].abs());
        (key, self.m[0] < 0)
    }
}

impl std::fmt::Display for HarmonicIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(l={}, m={:?})", self.l, self.m)
    }
}

fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < k {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Dimension of the space of degree-`l` harmonics on `S^d`.
pub fn multiplicity(d: usize, l: u32) -> u64 {
    if l == 0 {
        return 1;
    }
    let (d, l) = (d as i64, l as i64);
    (binomial(d + l, d) - binomial(d + l - 2, d)) as u64
}

/// All tuples of degree `l` on `S^d` in the canonical order: lexicographic in
/// `(m_{d-1}, ..., m_2, |m_1|)`, with `m_1 >= 0` before `-m_1`. The zonal tuple
/// comes first.
pub fn enumerate_indices(d: usize, l: u32) -> Vec<HarmonicIndex> {
    assert!(d >= 3, "dimension must be at least 3");
    let mut out = Vec::with_capacity(multiplicity(d, l) as usize);
    let mut chain = vec![0u32; d - 1];
    fill_chain(&mut chain, d - 2, l, &mut out, l);
    out.sort_by_key(|a| a.order_key());
    out
}

fn fill_chain(chain: &mut [u32], pos: usize, upper: u32, out: &mut Vec<HarmonicIndex>, l: u32) {
    for v in 0..=upper {
        chain[pos] = v;
        if pos == 0 {
            let rest: Vec<i32> = chain[1..].iter().map(|&x| x as i32).collect();
            let mut m = vec![v as i32];
            m.extend(&rest);
            out.push(HarmonicIndex { l, m: m.clone() });
            if v > 0 {
                m[0] = -(v as i32);
                out.push(HarmonicIndex { l, m });
            }
        } else {
            fill_chain(chain, pos - 1, v, out, l);
        }
    }
}

/// Point on `S^d` with cached trigonometric values and scale factors.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularPoint {
    theta: Vec<f64>,
    sin: Vec<f64>,
    cos: Vec<f64>,
    eta: Vec<f64>,
}

impl AngularPoint {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.len() < 3 {
            return Err(Error::InvalidPoint(format!("need at least 3 angles, got {}", theta.len())));
        }
        if !(0.0..2.0 * PI).contains(&theta[0]) {
            return Err(Error::InvalidPoint(format!("azimuth {} outside [0, 2pi)", theta[0])));
        }
        for (j, &t) in theta.iter().enumerate().skip(1) {
            if !(0.0..=PI).contains(&t) {
                return Err(Error::InvalidPoint(format!("theta_{} = {t} outside [0, pi]", j + 1)));
            }
        }
        Ok(Self::from_angles_unchecked(theta))
    }

    pub(crate) fn from_angles_unchecked(theta: Vec<f64>) -> Self {
        let d = theta.len();
        let (sin, cos): (Vec<f64>, Vec<f64>) = theta.iter().map(|t| t.sin_cos()).unzip();
        let mut eta = vec![1.0; d];
        for j in (0..d - 1).rev() {
            eta[j] = eta[j + 1] * sin[j + 1];
        }
        Self { theta, sin, cos, eta }
    }

    /// Build from `cos(theta_j)` values for the inclination axes; used by
    /// quadrature, where the Gauss nodes live in `z = cos(theta)`.
    pub(crate) fn from_azimuth_and_cosines(phi: f64, z: &[f64]) -> Self {
        let d = z.len() + 1;
        let mut theta = Vec::with_capacity(d);
        let mut sin = Vec::with_capacity(d);
        let mut cos = Vec::with_capacity(d);
        theta.push(phi);
        let (s, c) = phi.sin_cos();
        sin.push(s);
        cos.push(c);
        for &zj in z {
            theta.push(zj.acos());
            sin.push((1.0 - zj * zj).max(0.0).sqrt());
            cos.push(zj);
        }
        let mut eta = vec![1.0; d];
        for j in (0..d - 1).rev() {
            eta[j] = eta[j + 1] * sin[j + 1];
        }
        Self { theta, sin, cos, eta }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.theta
    }

    /// `eta_j` for `j = 1..=d`, stored zero-based.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Cartesian coordinates in `R^{d+1}`.
    pub fn unit_vector(&self) -> Vec<f64> {
        let d = self.dim();
        let mut x = vec![0.0; d + 1];
        x[0] = self.eta[0] * self.cos[0];
        x[1] = self.eta[0] * self.sin[0];
        for j in 1..d {
            x[j + 1] = self.eta[j] * self.cos[j];
        }
        x
    }
}

fn check_dims(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<()> {
    if idx.dim() != pt.dim() {
        return Err(Error::InvalidPoint(format!(
            "point has dimension {} but harmonic has dimension {}",
            pt.dim(),
            idx.dim()
        )));
    }
    Ok(())
}

/// `mu_j(a, b)`, the normalization of `sin^a(theta) C_{b-a}^{(a+(j-1)/2)}(cos theta)`
/// under the measure `sin^{j-1}(theta) d theta`.
pub fn mu_normalization(j: usize, m_lo: u32, m_hi: u32) -> Result<f64> {
    if j < 3 || m_lo > m_hi {
        return Err(Error::Domain(format!("mu_normalization needs j >= 3 and m_lo <= m_hi, got j={j}, {m_lo}, {m_hi}")));
    }
    Ok((0.5 * ln_mu_squared(j, m_lo, m_hi)).exp())
}

pub(crate) fn ln_mu_squared(j: usize, a: u32, b: u32) -> f64 {
    let (jf, af, bf) = (j as f64, a as f64, b as f64);
    let half = (jf - 1.0) / 2.0;
    (4.0 * PI).ln() + ln_gamma(bf + af + jf - 1.0).expect("positive") - (2.0 * af + jf) * 2f64.ln()
        - ln_factorial(b - a)
        - (bf + half).ln()
        - 2.0 * ln_gamma(af + half).expect("positive")
}

/// `K(d, l) = N(d, l) / (|S^d| C_l^{((d-1)/2)}(1))`.
pub fn addition_constant(d: usize, l: u32) -> f64 {
    let alpha = (d as f64 - 1.0) / 2.0;
    multiplicity(d, l) as f64 / (sphere_area(d) * gegenbauer_at_one(l, alpha))
}

pub(crate) fn gegenbauer_at_one(n: u32, alpha: f64) -> f64 {
    (pochhammer(2.0 * alpha, n).ln() - ln_factorial(n)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Basis {
    Complex,
    Real,
}

/// Factorized evaluation `Y = az(phi) * f2(theta_2) * prod_j g_j(theta_j)`
/// together with the derivative of every factor.
struct Factors {
    az: Complex64,
    daz: Complex64,
    f2: f64,
    df2: f64,
    higher: Vec<(f64, f64)>,
}

impl Factors {
    fn new(idx: &HarmonicIndex, pt: &AngularPoint, basis: Basis, with_derivs: bool) -> Self {
        let chain = idx.chain();
        let m1 = idx.m1();
        let a = m1.unsigned_abs();
        let n = chain[1];
        let phi = pt.theta[0];
        let af = a as f64;
        let parity = if a.is_multiple_of(2) { 1.0 } else { -1.0 };

        let (az, daz) = match (basis, m1.signum()) {
            (_, 0) => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            (Basis::Complex, 1) => {
                let e = Complex64::from_polar(1.0, af * phi);
                (e, e * Complex64::new(0.0, af))
            }
            (Basis::Complex, _) => {
                let e = Complex64::from_polar(parity, -af * phi);
                (e, e * Complex64::new(0.0, -af))
            }
            (Basis::Real, 1) => {
                let (s, c) = (af * phi).sin_cos();
                let k = parity * std::f64::consts::SQRT_2;
                (Complex64::new(k * c, 0.0), Complex64::new(-k * af * s, 0.0))
            }
            (Basis::Real, _) => {
                let (s, c) = (af * phi).sin_cos();
                let k = parity * std::f64::consts::SQRT_2;
                (Complex64::new(k * s, 0.0), Complex64::new(k * af * c, 0.0))
            }
        };

        let norm2 = ((2.0 * n as f64 + 1.0) / (4.0 * PI)).ln() + ln_factorial(n - a) - ln_factorial(n + a);
        let norm2 = (0.5 * norm2).exp();
        let f2 = norm2 * assoc_legendre_unchecked(n, a, pt.cos[1], pt.sin[1]);
        let df2 = if with_derivs { norm2 * assoc_legendre_dtheta(n, a, pt.theta[1]) } else { 0.0 };

        let d = pt.dim();
        let mut higher = Vec::with_capacity(d.saturating_sub(2));
        for j in 3..=d {
            let (lo, hi) = (chain[j - 2], chain[j - 1]);
            let inv_mu = (-0.5 * ln_mu_squared(j, lo, hi)).exp();
            let alpha = lo as f64 + (j as f64 - 1.0) / 2.0;
            let (s, c) = (pt.sin[j - 1], pt.cos[j - 1]);
            let deg = hi - lo;
            let gc = gegenbauer_unchecked(deg, alpha, c);
            let g = inv_mu * s.powi(lo as i32) * gc;
            let dg = if with_derivs {
                let dgc = if deg == 0 { 0.0 } else { 2.0 * alpha * gegenbauer_unchecked(deg - 1, alpha + 1.0, c) };
                let first = if lo == 0 { 0.0 } else { lo as f64 * s.powi(lo as i32 - 1) * c * gc };
                inv_mu * (first - s.powi(lo as i32 + 1) * dgc)
            } else {
                0.0
            };
            higher.push((g, dg));
        }
        Self { az, daz, f2, df2, higher }
    }

    fn value(&self) -> Complex64 {
        self.az * self.f2 * self.higher.iter().map(|h| h.0).product::<f64>()
    }

    /// `partial_j Y` for `j = 1..=d` (zero-based output).
    fn partials(&self) -> Vec<Complex64> {
        let d = self.higher.len() + 2;
        let mut out = Vec::with_capacity(d);
        let prod_higher: f64 = self.higher.iter().map(|h| h.0).product();
        out.push(self.daz * self.f2 * prod_higher);
        out.push(self.az * self.df2 * prod_higher);
        for j in 0..self.higher.len() {
            let mut p = self.higher[j].1;
            for (i, h) in self.higher.iter().enumerate() {
                if i != j {
                    p *= h.0;
                }
            }
            out.push(self.az * self.f2 * p);
        }
        out
    }
}

pub fn eval_complex(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<Complex64> {
    check_dims(idx, pt)?;
    Ok(Factors::new(idx, pt, Basis::Complex, false).value())
}

/// Real harmonic `Y_{l,m}`: cosine-type for `m_1 > 0`, sine-type for `m_1 < 0`.
pub fn eval_real(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<f64> {
    check_dims(idx, pt)?;
    Ok(Factors::new(idx, pt, Basis::Real, false).value().re)
}

fn scaled_gradient(partials: Vec<Complex64>, pt: &AngularPoint) -> Result<Vec<Complex64>> {
    if pt.sin[1..].contains(&0.0) {
        return Err(Error::Pole(format!("gradient undefined at {:?}", pt.theta)));
    }
    Ok(partials.into_iter().zip(&pt.eta).map(|(p, e)| p / *e).collect())
}

/// Surface gradient components `(1/eta_j) partial_j Y` in the orthonormal frame.
pub fn eval_gradient(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<Vec<Complex64>> {
    check_dims(idx, pt)?;
    scaled_gradient(Factors::new(idx, pt, Basis::Complex, true).partials(), pt)
}

pub fn eval_real_gradient(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<Vec<f64>> {
    check_dims(idx, pt)?;
    let g = scaled_gradient(Factors::new(idx, pt, Basis::Real, true).partials(), pt)?;
    Ok(g.into_iter().map(|z| z.re).collect())
}

/// Value and surface gradient together; avoids evaluating the factors twice.
pub fn eval_complex_with_gradient(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<(Complex64, Vec<Complex64>)> {
    check_dims(idx, pt)?;
    let f = Factors::new(idx, pt, Basis::Complex, true);
    Ok((f.value(), scaled_gradient(f.partials(), pt)?))
}

pub fn eval_real_with_gradient(idx: &HarmonicIndex, pt: &AngularPoint) -> Result<(f64, Vec<f64>)> {
    check_dims(idx, pt)?;
    let f = Factors::new(idx, pt, Basis::Real, true);
    let g = scaled_gradient(f.partials(), pt)?;
    Ok((f.value().re, g.into_iter().map(|z| z.re).collect()))
}
