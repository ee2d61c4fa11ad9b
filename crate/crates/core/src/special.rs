//! Scalar special functions: log-gamma, Pochhammer symbols, Gegenbauer and
//! associated Legendre polynomials.
//!
//! Gegenbauer polynomials are evaluated by the forward three-term recurrence,
//! which is stable on `[-1, 1]` for the parameter ranges used by the harmonic
//! machinery (`alpha >= 1/2`, degree at most a few dozen).

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_COF: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_048_8e-4,
    2.174_396_181_152_126_5e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_140_8e-5,
    3.689_918_265_953_162_5e-6,
];

fn ln_gamma_positive(x: f64) -> f64 {
    let mut y = x;
    let tmp = x + 5.242_187_5;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_1;
    for c in LANCZOS_COF {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Natural logarithm of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    // Exact for small integers, where the approximation is already good but
    // bit-exact zeros at 1 and 2 are convenient.
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    Ok(ln_gamma_positive(x))
}

/// `(sign, ln|Γ(x)|)` for any real `x` that is not a pole; `None` at
/// `x = 0, -1, -2, ...`.
pub fn signed_ln_gamma(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return Some((1.0, ln_gamma(x).ok()?));
    }
    if x == x.floor() {
        return None;
    }
    // Γ(x) Γ(1 - x) = π / sin(πx)
    let s = (PI * x).sin();
    let ln_abs = PI.ln() - s.abs().ln() - ln_gamma_positive(1.0 - x);
    Some((s.signum(), ln_abs))
}

pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma_positive(n as f64 + 1.0)
    }
}

/// Rising factorial `(a)_n = a (a + 1) ... (a + n - 1)`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    if n <= 64 {
        return (0..n).map(|i| a + i as f64).product();
    }
    match (signed_ln_gamma(a + n as f64), signed_ln_gamma(a)) {
        (Some((s1, l1)), Some((s2, l2))) => s1 * s2 * (l1 - l2).exp(),
        // a pole on either side means the product crosses zero
        _ => (0..n).map(|i| a + i as f64).product(),
    }
}

fn check_gegenbauer(alpha: f64, z: f64) -> Result<()> {
    if !(alpha > -0.5) || alpha == 0.0 {
        return Err(Error::Domain(format!(
            "Gegenbauer parameter must satisfy alpha > -1/2, alpha != 0; got {alpha}"
        )));
    }
    if !(z.abs() <= 1.0) {
        return Err(Error::Domain(format!("argument {z} outside [-1, 1]")));
    }
    Ok(())
}

pub(crate) fn gegenbauer_unchecked(n: u32, alpha: f64, z: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 2.0 * alpha * z;
    for k in 2..=n {
        let kf = k as f64;
        let next = (2.0 * (kf + alpha - 1.0) * z * cur - (kf + 2.0 * alpha - 2.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Gegenbauer polynomial `C_n^(alpha)(z)`.
pub fn gegenbauer(n: u32, alpha: f64, z: f64) -> Result<f64> {
    check_gegenbauer(alpha, z)?;
    Ok(gegenbauer_unchecked(n, alpha, z))
}

/// `d/dz C_n^(alpha)(z) = 2 alpha C_{n-1}^(alpha + 1)(z)`.
pub fn gegenbauer_derivative(n: u32, alpha: f64, z: f64) -> Result<f64> {
    check_gegenbauer(alpha, z)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * alpha * gegenbauer_unchecked(n - 1, alpha + 1.0, z))
}

/// Associated Legendre function `P_n^m(z)` including the Condon-Shortley
/// phase `(-1)^m`. Returns zero for `m > n`.
pub fn assoc_legendre(n: u32, m: u32, z: f64) -> Result<f64> {
    if !(z.abs() <= 1.0) {
        return Err(Error::Domain(format!("argument {z} outside [-1, 1]")));
    }
    Ok(assoc_legendre_unchecked(n, m, z, (1.0 - z * z).max(0.0).sqrt()))
}

/// Same as [`assoc_legendre`] with `sqrt(1 - z^2)` supplied by the caller,
/// which keeps full accuracy near the poles when `z = cos(theta)`.
pub(crate) fn assoc_legendre_unchecked(n: u32, m: u32, z: f64, sin_theta: f64) -> f64 {
    if m > n {
        return 0.0;
    }
    // P_m^m = (-1)^m (2m - 1)!! (1 - z^2)^{m/2}
    let mut pmm = 1.0;
    for i in 1..=m {
        pmm *= -((2 * i - 1) as f64) * sin_theta;
    }
    if n == m {
        return pmm;
    }
    let mut pm1 = z * (2 * m + 1) as f64 * pmm;
    if n == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for l in (m + 2)..=n {
        let next = (z * (2 * l - 1) as f64 * pm1 - (l + m - 1) as f64 * pm0) / (l - m) as f64;
        pm0 = pm1;
        pm1 = next;
    }
    pm1
}

/// `d/dθ P_n^m(cos θ)` from the mixed-index identity
/// `2 dP_n^m/dθ = P_n^{m+1} - (n + m)(n - m + 1) P_n^{m-1}`.
pub fn assoc_legendre_dtheta(n: u32, m: u32, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let s = s.abs();
    if m > n {
        return 0.0;
    }
    if m == 0 {
        return assoc_legendre_unchecked(n, 1, c, s);
    }
    let up = assoc_legendre_unchecked(n, m + 1, c, s);
    let down = assoc_legendre_unchecked(n, m - 1, c, s);
    0.5 * (up - ((n + m) * (n - m + 1)) as f64 * down)
}

/// Surface area of the unit sphere `S^d` in `R^{d+1}`.
pub fn sphere_area(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    2.0 * (h * PI.ln() - ln_gamma_positive(h)).exp()
}
