//! Exact Wigner 3j symbols for integer angular momenta.
//!
//! Values are returned as `sign * sqrt(r)` with `r` an exact rational,
//! evaluated by the Racah single-sum formula over big-integer factorials.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arguments `(j1 j2 j3; m1 m2 m3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ThreeJ {
    pub j: [u32; 3],
    pub m: [i32; 3],
}

impl ThreeJ {
    pub fn new(j1: u32, j2: u32, j3: u32, m1: i32, m2: i32, m3: i32) -> Self {
        Self { j: [j1, j2, j3], m: [m1, m2, m3] }
    }

    /// `(j1 j2 j3; 0 0 0)`.
    pub fn zero_m(j1: u32, j2: u32, j3: u32) -> Self {
        Self::new(j1, j2, j3, 0, 0, 0)
    }

    pub fn j_sum(&self) -> u32 {
        self.j.iter().sum()
    }
}

/// `sign * sqrt(radicand)` with `radicand >= 0`; zero iff `sign == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactSignedSqrt {
    sign: i8,
    radicand: BigRational,
}

impl ExactSignedSqrt {
    pub fn zero() -> Self {
        Self { sign: 0, radicand: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self { sign: 1, radicand: BigRational::one() }
    }

    pub fn new(sign: i8, radicand: BigRational) -> Self {
        assert!(!radicand.is_negative(), "radicand must be nonnegative");
        if sign == 0 || radicand.is_zero() {
            return Self::zero();
        }
        Self { sign: sign.signum(), radicand }
    }

    /// The signed square root of `x`: `sign(x) sqrt(|x|)`.
    pub fn from_signed_square(x: BigRational) -> Self {
        let sign = if x.is_zero() { 0 } else if x.is_positive() { 1 } else { -1 };
        Self::new(sign, x.abs())
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn radicand(&self) -> &BigRational {
        &self.radicand
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `sign * radicand`, the value squared with its sign kept.
    pub fn signed_square(&self) -> BigRational {
        match self.sign {
            0 => BigRational::zero(),
            1 => self.radicand.clone(),
            _ => -self.radicand.clone(),
        }
    }

    /// The plain square `radicand` (zero if the value is zero).
    pub fn square(&self) -> BigRational {
        self.radicand.clone()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.sign * other.sign, &self.radicand * &other.radicand)
    }

    pub fn neg(&self) -> Self {
        Self { sign: -self.sign, radicand: self.radicand.clone() }
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let r = self.radicand.to_f64().unwrap_or(f64::NAN);
        self.sign as f64 * r.sqrt()
    }
}

impl fmt::Display for ExactSignedSqrt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "sqrt({})", self.radicand),
            _ => write!(f, "-sqrt({})", self.radicand),
        }
    }
}

/// Cache of `n!` as big integers. Grows on demand through `&mut self`;
/// read-only lookups through `&self`.
#[derive(Clone, Debug)]
pub struct FactorialTable {
    table: Vec<BigInt>,
}

impl Default for FactorialTable {
    fn default() -> Self {
        Self::new(16)
    }
}

impl FactorialTable {
    pub fn new(max: usize) -> Self {
        let mut t = Self { table: vec![BigInt::one()] };
        t.ensure(max);
        t
    }

    pub fn ensure(&mut self, max: usize) {
        while self.table.len() <= max {
            let n = self.table.len();
            let next = &self.table[n - 1] * BigInt::from(n);
            self.table.push(next);
        }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn get(&self, n: usize) -> &BigInt {
        &self.table[n]
    }
}

/// True iff the symbol is allowed by the selection rules.
pub fn selection_check(q: &ThreeJ) -> bool {
    let [j1, j2, j3] = q.j.map(|x| x as i64);
    let [m1, m2, m3] = q.m.map(|x| x as i64);
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return false;
    }
    if m1 + m2 + m3 != 0 {
        return false;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return false;
    }
    if m1 == 0 && m2 == 0 && m3 == 0 && (j1 + j2 + j3) % 2 != 0 {
        return false;
    }
    true
}

/// Exact 3j symbol using a caller-supplied factorial table, which must
/// cover `j1 + j2 + j3 + 1`.
pub fn wigner3j_with(facts: &FactorialTable, q: &ThreeJ) -> ExactSignedSqrt {
    if !selection_check(q) {
        return ExactSignedSqrt::zero();
    }
    let [j1, j2, j3] = q.j.map(|x| x as i64);
    let [m1, m2, m3] = q.m.map(|x| x as i64);
    assert!(facts.max() as i64 > j1 + j2 + j3, "factorial table too small");
    let f = |n: i64| facts.get(n as usize);

    let delta_num = f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3);
    let delta_den = f(j1 + j2 + j3 + 1).clone();
    let prod = f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3);

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = f(k) * f(j3 - j2 + k + m1) * f(j3 - j1 + k - m2) * f(j1 + j2 - j3 - k) * f(j1 - k - m1) * f(j2 - k + m2);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return ExactSignedSqrt::zero();
    }
    let phase_negative = (j1 - j2 - m3).rem_euclid(2) == 1;
    let sign: i8 = if sum.is_negative() != phase_negative { -1 } else { 1 };
    let radicand = BigRational::new(delta_num * prod, delta_den) * &sum * &sum;
    ExactSignedSqrt::new(sign, radicand)
}

/// Exact 3j symbol with a freshly built factorial table.
pub fn wigner3j(q: &ThreeJ) -> ExactSignedSqrt {
    let facts = FactorialTable::new(q.j_sum() as usize + 1);
    wigner3j_with(&facts, q)
}

/// `(2 j3 + 1) sum_{m1, m2} (j1 j2 j3; m1 m2 m3)^2` for fixed `m3`, which is 1
/// whenever the triangle condition holds.
pub fn orthogonality_sum(facts: &FactorialTable, j1: u32, j2: u32, j3: u32, m3: i32) -> BigRational {
    let mut total = BigRational::zero();
    for m1 in -(j1 as i32)..=(j1 as i32) {
        let m2 = -m1 - m3;
        if m2.unsigned_abs() > j2 {
            continue;
        }
        total += wigner3j_with(facts, &ThreeJ::new(j1, j2, j3, m1, m2, m3)).square();
    }
    total * BigRational::from_integer(BigInt::from(2 * j3 + 1))
}
