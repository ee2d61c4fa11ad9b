//! Closed-form evaluation of `W^{p,k}_{q,m,n} = int Y_{p,q} Y_k^m conj(Y_k^n) dsigma`
//! as `I(T_1, T_2) prod_{j>=3} I(T_{j-1}, T_j)`.
//!
//! `I(T_1, T_2)` comes from the three-dimensional Gaunt formula. Each higher
//! factor is `H / (mu^(1) mu^(2) mu^(3))` where `H` is a finite sum of
//! rational numbers times a fixed power of `pi`; `H` is accumulated exactly
//! so that all selection-rule cancellations are exact zeros.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::harmonics::{ln_mu_squared, HarmonicIndex};
use crate::wigner::{wigner3j_with, ExactSignedSqrt, FactorialTable, ThreeJ};

/// The aligned triples `T_j = (q_j, m_j, n_j)`, `j = 1..=d`, with
/// `T_d = (p, k, k)`. Only `T_1` may have negative entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TripleTower {
    t: Vec<[i64; 3]>,
}

impl TripleTower {
    pub fn new(q: &HarmonicIndex, m: &HarmonicIndex, n: &HarmonicIndex) -> Result<Self> {
        let d = q.dim();
        if m.dim() != d || n.dim() != d {
            return Err(Error::ContractViolation("tower indices have different dimensions".into()));
        }
        if m.degree() != n.degree() {
            return Err(Error::ContractViolation("m and n must share the degree k".into()));
        }
        let mut t = Vec::with_capacity(d);
        for j in 0..d - 1 {
            t.push([q.tuple()[j] as i64, m.tuple()[j] as i64, n.tuple()[j] as i64]);
        }
        t.push([q.degree() as i64, m.degree() as i64, n.degree() as i64]);
        Ok(Self { t })
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    /// `T_j`, one-based.
    pub fn triple(&self, j: usize) -> [i64; 3] {
        self.t[j - 1]
    }

    /// `s_j = q_j + m_j + n_j`.
    pub fn s(&self, j: usize) -> i64 {
        self.t[j - 1].iter().sum()
    }

    /// `delta_j^i = t_j^i - t_{j-1}^i` for `j >= 2`, `i = 1..=3`.
    pub fn delta(&self, j: usize, i: usize) -> i64 {
        self.t[j - 1][i - 1] - self.t[j - 2][i - 1]
    }

    /// `nu_j = (j - 1) / 2`.
    pub fn nu(j: usize) -> f64 {
        (j as f64 - 1.0) / 2.0
    }

    fn unsigned(&self, j: usize) -> [u32; 3] {
        self.t[j - 1].map(|x| x as u32)
    }
}

/// `value * pi^pi_power`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPiRational {
    pub value: BigRational,
    pub pi_power: u32,
}

impl ExactPiRational {
    pub fn zero() -> Self {
        Self { value: BigRational::zero(), pi_power: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN) * PI.powi(self.pi_power as i32)
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rising(a: &BigRational, n: i64) -> BigRational {
    let mut acc = BigRational::one();
    let mut x = a.clone();
    for _ in 0..n {
        acc *= &x;
        x += BigRational::one();
    }
    acc
}

/// `Gamma(n / 2)` as `(rational, sqrt(pi) exponent)`, or `None` at a pole.
fn half_gamma(n: i64, facts: &FactorialTable) -> Option<(BigRational, i32)> {
    if n > 0 && n % 2 == 0 {
        let f = facts.get((n / 2 - 1) as usize).clone();
        return Some((BigRational::from_integer(f), 0));
    }
    if n > 0 {
        // (n-2)!! / 2^{(n-1)/2} sqrt(pi)
        let mut num = BigInt::one();
        let mut i = 1;
        while i <= n - 2 {
            num *= BigInt::from(i);
            i += 2;
        }
        let den = BigInt::one() << ((n - 1) / 2) as usize;
        return Some((BigRational::new(num, den), 1));
    }
    if n % 2 == 0 {
        return None;
    }
    // Gamma(1/2 - r) = (-4)^r r! / (2r)! sqrt(pi)
    let r = (1 - n) / 2;
    let mut num = BigInt::from(4).pow(r as u32) * facts.get(r as usize);
    if r % 2 == 1 {
        num = -num;
    }
    Some((BigRational::new(num, facts.get(2 * r as usize).clone()), 1))
}

/// Evaluation engine with caches for 3j squares, `L` and `H`.
#[derive(Debug, Default)]
pub struct ClosedFormEngine {
    facts: FactorialTable,
    zero_m_sq: HashMap<[u32; 3], BigRational>,
    l_cache: HashMap<(i64, i64), ExactPiRational>,
    h_cache: HashMap<(usize, [u32; 3], [u32; 3]), ExactPiRational>,
}

impl ClosedFormEngine {
    pub fn new() -> Self {
        Self::default()
    }

    fn threej(&mut self, q: ThreeJ) -> ExactSignedSqrt {
        self.facts.ensure(q.j_sum() as usize + 2);
        wigner3j_with(&self.facts, &q)
    }

    fn zero_m_squared(&mut self, a: u32, b: u32, c: u32) -> BigRational {
        if let Some(v) = self.zero_m_sq.get(&[a, b, c]) {
            return v.clone();
        }
        let v = self.threej(ThreeJ::zero_m(a, b, c)).square();
        self.zero_m_sq.insert([a, b, c], v.clone());
        v
    }

    /// `L = int_{-1}^{1} (1 - z^2)^{gamma - 1} P_tau(z) dz` with `2 gamma = two_gamma`.
    fn l_value(&mut self, two_gamma: i64, tau: i64) -> ExactPiRational {
        if let Some(v) = self.l_cache.get(&(two_gamma, tau)) {
            return v.clone();
        }
        self.facts.ensure((two_gamma + tau + 4) as usize);
        let facts = &self.facts;
        let num = half_gamma(two_gamma, facts).expect("gamma > 0");
        let dens = [
            half_gamma(two_gamma + 1 + tau, facts),
            half_gamma(two_gamma - tau, facts),
            half_gamma(tau + 2, facts),
            half_gamma(1 - tau, facts),
        ];
        let value = if dens.iter().any(|d| d.is_none()) {
            ExactPiRational::zero()
        } else {
            let mut v = &num.0 * &num.0;
            let mut sqrt_pi = 2 + 2 * num.1;
            for (r, e) in dens.into_iter().flatten() {
                v /= r;
                sqrt_pi -= e;
            }
            assert!(sqrt_pi >= 0 && sqrt_pi % 2 == 0, "L must be a rational multiple of an integer power of pi");
            ExactPiRational { value: v, pi_power: (sqrt_pi / 2) as u32 }
        };
        self.l_cache.insert((two_gamma, tau), value.clone());
        value
    }

    /// Exact `H(T_{j-1}, T_j)`.
    pub fn h(&mut self, j: usize, prev: [u32; 3], cur: [u32; 3]) -> ExactPiRational {
        let key = (j, prev, cur);
        if let Some(v) = self.h_cache.get(&key) {
            return v.clone();
        }
        let delta: [i64; 3] = [0, 1, 2].map(|i| cur[i] as i64 - prev[i] as i64);
        assert!(delta.iter().all(|&x| x >= 0), "chain condition violated in tower");
        let s: i64 = prev.iter().map(|&x| x as i64).sum();
        let two_gamma = s + j as i64;

        // V(beta, alpha, l) for each column, alpha = t_{j-1} + (j-1)/2
        let v_table: Vec<Vec<BigRational>> = (0..3)
            .map(|i| {
                let beta = delta[i];
                let alpha = rat(2 * prev[i] as i64 + j as i64 - 1, 2);
                let alpha_half = &alpha - rat(1, 2);
                (0..=beta / 2)
                    .map(|l| {
                        rat(1 + 2 * beta - 4 * l, 1) * rising(&alpha, beta - l) / rising(&rat(3, 2), beta - l)
                            * rising(&alpha_half, l)
                            / BigRational::from_integer(self.facts_get(l))
                    })
                    .collect()
            })
            .collect();

        let mut total = BigRational::zero();
        let mut pi_power: Option<u32> = None;
        for (l1, v1) in v_table[0].iter().enumerate() {
            let c = delta[0] - 2 * l1 as i64;
            for (l2, v2) in v_table[1].iter().enumerate() {
                let a = delta[1] - 2 * l2 as i64;
                for (l3, v3) in v_table[2].iter().enumerate() {
                    let b = delta[2] - 2 * l3 as i64;
                    let vprod = v1 * v2 * v3;
                    if vprod.is_zero() {
                        continue;
                    }
                    let mut inner = BigRational::zero();
                    // tau1 in [|a-b|, a+b] with a+b+tau1 even
                    let mut tau1 = (a - b).abs();
                    while tau1 <= a + b {
                        // tau2 even and c + tau1 + tau2 even, so c + tau1 must be even
                        if (c + tau1) % 2 == 0 {
                            let w1 = self.zero_m_squared(a as u32, b as u32, tau1 as u32);
                            debug_assert!(!w1.is_zero(), "allowed 3j symbol vanished");
                            let mut tau2 = (c - tau1).abs();
                            while tau2 <= c + tau1 {
                                let w2 = self.zero_m_squared(c as u32, tau1 as u32, tau2 as u32);
                                let l = self.l_value(two_gamma, tau2);
                                if !l.is_zero() {
                                    match pi_power {
                                        None => pi_power = Some(l.pi_power),
                                        Some(e) => assert_eq!(e, l.pi_power, "mixed powers of pi within one H"),
                                    }
                                    inner += rat((2 * tau1 + 1) * (2 * tau2 + 1), 1) * &l.value * &w1 * w2;
                                }
                                tau2 += 2;
                            }
                        }
                        tau1 += 2;
                    }
                    total += vprod * inner;
                }
            }
        }
        let value = if total.is_zero() {
            ExactPiRational::zero()
        } else {
            ExactPiRational { value: total, pi_power: pi_power.unwrap_or(0) }
        };
        self.h_cache.insert(key, value.clone());
        value
    }

    fn facts_get(&mut self, n: i64) -> BigInt {
        self.facts.ensure(n as usize);
        self.facts.get(n as usize).clone()
    }

    /// `I(T_{j-1}, T_j) = H / (mu^(1) mu^(2) mu^(3))`.
    pub fn higher_factor(&mut self, j: usize, prev: [u32; 3], cur: [u32; 3]) -> f64 {
        let h = self.h(j, prev, cur);
        if h.is_zero() {
            return 0.0;
        }
        let ln_mu: f64 = (0..3).map(|i| ln_mu_squared(j, prev[i], cur[i])).sum();
        h.to_f64() * (-0.5 * ln_mu).exp()
    }

    /// `I(T_1, T_2)` with the real harmonic in the first column.
    pub fn first_factor(&mut self, t1: [i64; 3], t2: [u32; 3]) -> Complex64 {
        let [q1, m1, n1] = t1;
        let [q2, m2, n2] = t2;
        let zero_m = self.threej(ThreeJ::zero_m(q2, m2, n2));
        if zero_m.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let mut q = |x: i64| self.threej(ThreeJ::new(q2, m2, n2, x as i32, m1 as i32, -n1 as i32));
        let sign = |e: i64| if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        // Q(x) vanishes unless x = n1 - m1, so at most one of Q(q1), Q(-q1) survives
        let qv = if q1 == 0 {
            if m1 != n1 {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::new(sign(m1) * zero_m.mul(&q(0)).to_f64(), 0.0)
        } else if q1 > 0 {
            let v = zero_m.mul(&q(-q1)).to_f64() + sign(q1) * zero_m.mul(&q(q1)).to_f64();
            Complex64::new(sign(n1) * v / SQRT_2, 0.0)
        } else {
            let v = zero_m.mul(&q(q1)).to_f64() - sign(q1) * zero_m.mul(&q(-q1)).to_f64();
            Complex64::new(0.0, sign(n1) * v / SQRT_2)
        };
        let c = ((2 * q2 + 1) as f64 * (2 * m2 + 1) as f64 * (2 * n2 + 1) as f64 / (4.0 * PI)).sqrt();
        qv * c
    }

    /// `W^{p,k}_{q,m,n}`.
    pub fn triple_integral(&mut self, tower: &TripleTower) -> Complex64 {
        let d = tower.dim();
        let mut w = self.first_factor(tower.triple(1), tower.unsigned(2));
        if w == Complex64::new(0.0, 0.0) {
            return w;
        }
        for j in 3..=d {
            let f = self.higher_factor(j, tower.unsigned(j - 1), tower.unsigned(j));
            if f == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            w *= f;
        }
        w
    }

    /// Whether `W` is an exact zero, decided without any floating point.
    pub fn is_exact_zero(&mut self, tower: &TripleTower) -> bool {
        if self.first_factor(tower.triple(1), tower.unsigned(2)) == Complex64::new(0.0, 0.0) {
            return true;
        }
        (3..=tower.dim()).any(|j| self.h(j, tower.unsigned(j - 1), tower.unsigned(j)).is_zero())
    }
}

/// Result of the `p = 2k + 2 xi` diagnostic.
#[derive(Clone, Debug, serde::Serialize)]
pub struct P2kDiagnostic {
    pub d: usize,
    pub k: u32,
    pub xi: u32,
    pub p: u32,
    pub q: Vec<i32>,
    pub m: Vec<i32>,
    pub w: f64,
    pub exact_zero: bool,
    /// `(j, H)` for `j = 3..=d`, `H` as a decimal string with its power of `pi`.
    pub h_factors: Vec<(usize, String, u32)>,
    pub first_factor: f64,
}

/// Evaluates `W^{p,k}_{q,m,m}` for `p = 2k + 2 xi`, `q = (0, 2k, ..., 2k)`,
/// `m = (k, ..., k)`, reporting each factor exactly.
pub fn diagnose_p2k(engine: &mut ClosedFormEngine, d: usize, k: u32, xi: u32) -> Result<P2kDiagnostic> {
    if d < 3 || k < 1 {
        return Err(Error::Domain("diagnose_p2k needs d >= 3 and k >= 1".into()));
    }
    let p = 2 * k + 2 * xi;
    let mut q = vec![2 * k as i32; d - 1];
    q[0] = 0;
    let m = vec![k as i32; d - 1];
    let qi = HarmonicIndex::new(p, q.clone())?;
    let mi = HarmonicIndex::new(k, m.clone())?;
    let tower = TripleTower::new(&qi, &mi, &mi)?;
    let first = engine.first_factor(tower.triple(1), tower.unsigned(2));
    let mut h_factors = Vec::new();
    for j in 3..=d {
        let h = engine.h(j, tower.unsigned(j - 1), tower.unsigned(j));
        h_factors.push((j, h.value.to_string(), h.pi_power));
    }
    let w = engine.triple_integral(&tower).re;
    let exact_zero = engine.is_exact_zero(&tower);
    Ok(P2kDiagnostic { d, k, xi, p, q, m, w, exact_zero, h_factors, first_factor: first.re })
}
