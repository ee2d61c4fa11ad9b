use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_core::dtn::slope_study;
use steklov_core::harmonics::{
    addition_constant, enumerate_indices, eval_complex, eval_gradient, eval_real, multiplicity, AngularPoint, HarmonicIndex,
};
use steklov_core::perturbation::{assemble_matrix, PerturbationFunction, Route};
use steklov_core::special::{gegenbauer, sphere_area};
use steklov_core::wigner::{orthogonality_sum, wigner3j, wigner3j_with, ExactSignedSqrt, FactorialTable, ThreeJ};

use crate::config::*;

const SEED: u64 = 0x5eed;
const TRIALS: usize = 10;
const ORDER_MIN: f64 = 1.8;

struct Check {
    name: String,
    residual: f64,
    passed: bool,
}

impl Check {
    fn within(name: String, residual: f64, tol: f64) -> Self {
        Check { name, residual, passed: residual <= tol }
    }
}

fn random_point(rng: &mut ChaCha8Rng, d: usize) -> CliResult<AngularPoint> {
    let mut t = vec![rng.gen_range(0.0..2.0 * PI)];
    t.extend((1..d).map(|_| rng.gen_range(0.05..PI - 0.05)));
    Ok(AngularPoint::new(t)?)
}

fn random_rho(rng: &mut ChaCha8Rng, d: usize, degrees: &[u32], per_degree: usize) -> CliResult<PerturbationFunction> {
    let mut terms: Vec<(HarmonicIndex, f64)> = Vec::new();
    for &p in degrees {
        let all = enumerate_indices(d, p);
        for _ in 0..per_degree {
            let i = all[rng.gen_range(0..all.len())].clone();
            if !terms.iter().any(|(t, _)| *t == i) {
                terms.push((i, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    Ok(PerturbationFunction::new(d, terms)?)
}

pub fn run(a: VerifyArgs) -> CliResult<()> {
    a.common.apply()?;
    let loaded = a.rho.as_ref().map(load_rho).transpose()?;
    let d = a.common.resolve_dim(loaded.as_ref(), 3)?;
    let (default_kmax, default_tol) = match a.suite {
        Suite::Trace => (3, 1e-10),
        Suite::Addition => (4, 1e-9),
        Suite::Wigner => (8, 0.0),
        Suite::Parity => (3, 1e-11),
        Suite::CrossRoute => (3, 1e-9),
        Suite::Oracle => (2, 1e-3),
    };
    let kmax = a.kmax.unwrap_or(default_kmax);
    let tol = if a.suite == Suite::Wigner { a.tol.unwrap_or(0.0) } else { check_tol(a.tol, default_tol)? };
    let eps = check_eps(&a.eps)?;
    let mut cfg = ConfigEcho::new("verify");
    cfg.suite = Some(a.suite);
    cfg.dim = Some(d);
    cfg.kmax = Some(kmax);
    cfg.tol = Some(tol);

    let checks = match a.suite {
        Suite::Trace => trace(d, kmax, tol)?,
        Suite::Addition => addition(d, kmax, tol)?,
        Suite::Wigner => wigner(kmax),
        Suite::Parity => parity(d, kmax, tol)?,
        Suite::CrossRoute => cross_route(d, kmax, tol)?,
        Suite::Oracle => {
            let rho = match loaded {
                Some(r) => r,
                None => default_oracle_rho(d)?,
            };
            cfg = cfg.with_rho(a.rho.as_ref(), &rho);
            cfg.eps = Some(eps.clone());
            oracle(&rho, kmax, &eps, tol)?
        }
    };

    let mut out = format!("# config {}\n", serde_json::to_string(&cfg.to_value()).expect("json"));
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        out.push_str(&format!("{} {} residual={:e}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.residual));
    }
    out.push_str(&format!("summary: {} passed, {failed} failed\n", checks.len() - failed));
    a.common.write(&out)?;
    if failed > 0 {
        Err(CliError::VerifyFailed)
    } else {
        Ok(())
    }
}

fn trace(d: usize, kmax: u32, tol: f64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for trial in 0..TRIALS {
        let rho = random_rho(&mut rng, d, &[0, 1, 2, 3, 4], 3)?;
        for k in 1..=kmax {
            let m = assemble_matrix(Route::Wigner, k, &rho)?;
            let r = m.matrix.trace().re + k as f64 * rho.a01() * multiplicity(d, k) as f64 / sphere_area(d).sqrt();
            out.push(Check::within(format!("trace d={d} k={k} trial={trial}"), r.abs(), tol));
        }
    }
    Ok(out)
}

fn addition(d: usize, lmax: u32, tol: f64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let points: Vec<(AngularPoint, AngularPoint)> =
        (0..50).map(|_| Ok((random_point(&mut rng, d)?, random_point(&mut rng, d)?))).collect::<CliResult<_>>()?;
    let alpha = (d as f64 - 1.0) / 2.0;
    let alpha_hi = (d as f64 + 1.0) / 2.0;
    let mut out = Vec::new();
    for l in 0..=lmax {
        let idx = enumerate_indices(d, l);
        let k = addition_constant(d, l);
        let (mut f_err, mut r_err, mut g_err) = (0.0f64, 0.0f64, 0.0f64);
        for (p, q) in &points {
            let u: f64 = p.unit_vector().iter().zip(q.unit_vector()).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            let want = k * gegenbauer(l, alpha, u)?;
            let mut sum = Complex64::new(0.0, 0.0);
            let mut rsum = 0.0;
            for i in &idx {
                sum += eval_complex(i, p)? * eval_complex(i, q)?.conj();
                rsum += eval_real(i, p)? * eval_real(i, q)?;
            }
            f_err = f_err.max((sum - want).norm());
            r_err = r_err.max((rsum - want).abs());
            if l > 0 {
                let gwant = (d - 1) as f64 * k * gegenbauer(l - 1, alpha_hi, 1.0)?;
                let mut comp = vec![0.0; d];
                for i in &idx {
                    for (s, g) in comp.iter_mut().zip(eval_gradient(i, p)?) {
                        *s += g.norm_sqr();
                    }
                }
                g_err = g_err.max(comp.iter().map(|s| (s - gwant).abs()).fold(0.0, f64::max));
            }
        }
        out.push(Check::within(format!("addition complex d={d} l={l}"), f_err, tol));
        out.push(Check::within(format!("addition real d={d} l={l}"), r_err, tol));
        if l > 0 {
            out.push(Check::within(format!("addition gradient d={d} l={l}"), g_err, tol));
        }
    }
    Ok(out)
}

fn wigner(jmax: u32) -> Vec<Check> {
    let facts = FactorialTable::new(3 * jmax as usize + 2);
    let one = num_rational::BigRational::one();
    let mut out = Vec::new();
    for j1 in 0..=jmax {
        for j2 in 0..=jmax {
            for j3 in j1.abs_diff(j2)..=(j1 + j2).min(jmax) {
                let exact = (-(j3 as i32)..=(j3 as i32)).all(|m3| orthogonality_sum(&facts, j1, j2, j3, m3) == one);
                out.push(Check { name: format!("orthogonality ({j1} {j2} {j3})"), residual: if exact { 0.0 } else { 1.0 }, passed: exact });
                if (j1 + j2 + j3) % 2 == 1 {
                    let z = wigner3j_with(&facts, &ThreeJ::zero_m(j1, j2, j3)).is_zero();
                    out.push(Check { name: format!("parity zero ({j1} {j2} {j3}; 0 0 0)"), residual: if z { 0.0 } else { 1.0 }, passed: z });
                }
            }
        }
    }
    let unit = wigner3j(&ThreeJ::zero_m(0, 0, 0)) == ExactSignedSqrt::one();
    out.push(Check { name: "(0 0 0; 0 0 0) = 1".into(), residual: if unit { 0.0 } else { 1.0 }, passed: unit });
    out
}

fn parity(d: usize, kmax: u32, tol: f64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for trial in 0..TRIALS {
        let rho = random_rho(&mut rng, d, &[1, 3, 5], 3)?;
        for k in 1..=kmax {
            let w = assemble_matrix(Route::Wigner, k, &rho)?.matrix.max_abs();
            out.push(Check { name: format!("parity wigner d={d} k={k} trial={trial}"), residual: w, passed: w == 0.0 });
            let q = assemble_matrix(Route::Quadrature, k, &rho)?.matrix.max_abs();
            out.push(Check::within(format!("parity quadrature d={d} k={k} trial={trial}"), q, tol));
        }
    }
    Ok(out)
}

fn cross_route(d: usize, kmax: u32, tol: f64) -> CliResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::new();
    for trial in 0..3 {
        let rho = random_rho(&mut rng, d, &[0, 1, 2, 3, 4], 4)?;
        for k in 1..=kmax {
            let w = assemble_matrix(Route::Wigner, k, &rho)?;
            let q = assemble_matrix(Route::Quadrature, k, &rho)?;
            out.push(Check::within(format!("cross-route d={d} k={k} trial={trial}"), w.matrix.max_abs_diff(&q.matrix), tol));
        }
    }
    Ok(out)
}

fn oracle(rho: &PerturbationFunction, kmax: u32, eps: &[f64], tol: f64) -> CliResult<Vec<Check>> {
    let mut out = Vec::new();
    for k in 1..=kmax {
        let s = slope_study(rho, k, eps, None)?;
        let last = *s.rel_errors.last().expect("nonempty eps");
        out.push(Check::within(format!("oracle slope d={} k={k} eps={:e}", s.d, eps[eps.len() - 1]), last, tol));
        let order = s.orders.iter().cloned().fold(f64::INFINITY, f64::min);
        if order.is_finite() {
            out.push(Check { name: format!("oracle order d={} k={k} (>= {ORDER_MIN})", s.d), residual: order, passed: order >= ORDER_MIN });
        }
    }
    Ok(out)
}
