mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_point, random_rho, sparse_random_rho, axial_quadrupole_rho};
use steklov_core::dtn::slope_study;
use steklov_core::harmonics::*;
use steklov_core::perturbation::*;
use steklov_core::quadrature::{ball_volume, build_grid, integrate_many, volume_degree, volume_of_perturbed};
use steklov_core::special::{gegenbauer, sphere_area};
use steklov_core::wigner::*;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn multiplicity_and_enumeration() -> Check {
    for l in 0..=8u32 {
        let want = ((l + 1) * (l + 1)) as u64;
        ensure(multiplicity(3, l) == want, || format!("N(3,{l}) = {}", multiplicity(3, l)))?;
        ensure(enumerate_indices(3, l).len() as u64 == want, || format!("enumeration count at l={l}"))?;
    }
    let got: BTreeSet<Vec<i32>> = enumerate_indices(3, 2).into_iter().map(|i| i.tuple().to_vec()).collect();
    let want: BTreeSet<Vec<i32>> = [[0, 0], [0, 1], [0, 2], [1, 1], [1, 2], [-1, 1], [-1, 2], [2, 2], [-2, 2]]
        .iter()
        .map(|t| t.to_vec())
        .collect();
    ensure(got == want, || format!("d=3 l=2 tuples {got:?}"))?;
    ensure(enumerate_indices(3, 2)[0].tuple() == [0, 0], || "first tuple is not trivial".into())?;
    Ok("N(3,l) and counts for l<=8, nine (3,2) tuples".into())
}

fn harmonic_analysis() -> Check {
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    for d in 3..=4 {
        let basis: Vec<HarmonicIndex> = (0..=4).flat_map(|l| enumerate_indices(d, l)).collect();
        let n = basis.len();
        let grid = build_grid(d, 8).map_err(|e| e.to_string())?;
        let gram = integrate_many(&grid, 3 * n * n + n, |pt, w, acc| {
            let c: Vec<(Complex64, Vec<Complex64>)> = basis.iter().map(|i| eval_complex_with_gradient(i, pt)).collect::<Result<_, _>>()?;
            let r: Vec<f64> = basis.iter().map(|i| eval_real(i, pt)).collect::<Result<_, _>>()?;
            for a in 0..n {
                for b in 0..n {
                    acc[a * n + b] += c[a].0 * c[b].0.conj() * w;
                    acc[n * n + a * n + b] += r[a] * r[b] * w;
                }
                let e: f64 = c[a].1.iter().map(|g| g.norm_sqr()).sum();
                acc[2 * n * n + a] += e * w;
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in 0..n {
                let id = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[a * n + b] - id).norm()).max((gram[n * n + a * n + b] - id).norm());
            }
            let l = basis[a].degree() as f64;
            worst = worst.max((gram[2 * n * n + a].re - l * (l + d as f64 - 1.0)).abs());
        }
        ensure(worst < tol, || format!("orthonormality/energy defect {worst:e} at d={d}"))?;

        let mut rng = ChaCha8Rng::seed_from_u64(20 + d as u64);
        let alpha = (d as f64 - 1.0) / 2.0;
        let alpha_hi = (d as f64 + 1.0) / 2.0;
        for _ in 0..50 {
            let p = random_point(&mut rng, d);
            let q = random_point(&mut rng, d);
            let u: f64 = p.unit_vector().iter().zip(q.unit_vector()).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            for l in 0..=4 {
                let idx = enumerate_indices(d, l);
                let k = addition_constant(d, l);
                let sum: Complex64 = idx.iter().map(|i| eval_complex(i, &p).unwrap() * eval_complex(i, &q).unwrap().conj()).sum();
                let want = k * gegenbauer(l, alpha, u).unwrap();
                worst = worst.max((sum - want).norm());
                let rsum: f64 = idx.iter().map(|i| eval_real(i, &p).unwrap() * eval_real(i, &q).unwrap()).sum();
                worst = worst.max((rsum - want).abs());
                if l > 0 {
                    let gwant = (d - 1) as f64 * k * gegenbauer(l - 1, alpha_hi, 1.0).unwrap();
                    let mut comp = vec![0.0; d];
                    for i in &idx {
                        for (s, g) in comp.iter_mut().zip(eval_gradient(i, &p).unwrap()) {
                            *s += g.norm_sqr();
                        }
                    }
                    worst = worst.max(comp.iter().map(|s| (s - gwant).abs()).fold(0.0, f64::max));
                }
            }
        }
        ensure(worst < tol, || format!("addition theorem defect {worst:e} at d={d}"))?;
    }
    Ok(format!("max defect {worst:.2e}"))
}

fn wigner_exactness() -> Check {
    let mut facts = FactorialTable::new(30);
    facts.ensure(30);
    let one = BigRational::one();
    let mut count = 0;
    for j1 in 0..=8u32 {
        for j2 in 0..=8u32 {
            for j3 in j1.abs_diff(j2)..=(j1 + j2).min(8) {
                for m3 in -(j3 as i32)..=(j3 as i32) {
                    let s = orthogonality_sum(&facts, j1, j2, j3, m3);
                    ensure(s == one, || format!("orthogonality sum ({j1} {j2} {j3}; m3={m3}) = {s}"))?;
                    count += 1;
                }
                if (j1 + j2 + j3) % 2 == 1 {
                    let z = wigner3j_with(&facts, &ThreeJ::zero_m(j1, j2, j3));
                    ensure(z.is_zero(), || format!("parity-odd ({j1} {j2} {j3}; 0 0 0) not zero"))?;
                }
            }
        }
    }
    ensure(wigner3j(&ThreeJ::zero_m(0, 0, 0)) == ExactSignedSqrt::one(), || "(000;000) != 1".into())?;
    Ok(format!("{count} exact orthogonality sums"))
}

fn cross_route() -> Check {
    let mut worst: f64 = 0.0;
    for d in 3..=4 {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + d as u64);
        let rho = random_rho(&mut rng, d, &[0, 1, 2, 3, 4]);
        for k in 1..=3 {
            let q = assemble_matrix(Route::Quadrature, k, &rho).map_err(|e| e.to_string())?;
            let w = assemble_matrix(Route::Wigner, k, &rho).map_err(|e| e.to_string())?;
            let diff = q.matrix.max_abs_diff(&w.matrix);
            worst = worst.max(diff);
            ensure(diff < 1e-9, || format!("d={d} k={k}: {diff:e}"))?;
        }
    }
    Ok(format!("max |M_quad - M_wigner| = {worst:.2e}"))
}

fn trace_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        for d in 3..=4 {
            let rho = sparse_random_rho(&mut rng, d, &[0, 1, 2, 3, 4], 3);
            for k in 1..=3 {
                let m = assemble_matrix(Route::Wigner, k, &rho).map_err(|e| e.to_string())?;
                let r = (m.matrix.trace().re + k as f64 * rho.a01() * multiplicity(d, k) as f64 / sphere_area(d).sqrt()).abs();
                worst = worst.max(r);
            }
        }
    }
    ensure(worst < 1e-10, || format!("trace residual {worst:e}"))?;
    Ok(format!("max residual {worst:.2e}"))
}

fn ball_and_parity_cases() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for d in 3..=4 {
        let c = PerturbationFunction::constant(d);
        let odd = random_rho(&mut rng, d, &[1, 3]);
        for k in 1..=3 {
            let want = -(k as f64) / sphere_area(d).sqrt();
            for route in [Route::Wigner, Route::Quadrature] {
                let m = assemble_matrix(route, k, &c).map_err(|e| e.to_string())?;
                let n = m.size();
                let id = steklov_core::linalg::CMatrix::identity(n).scale(Complex64::new(want, 0.0));
                let diff = m.matrix.max_abs_diff(&id);
                ensure(diff < 1e-12, || format!("constant rho, {route} d={d} k={k}: {diff:e}"))?;
            }
            let w = assemble_matrix(Route::Wigner, k, &odd).map_err(|e| e.to_string())?;
            ensure(w.matrix.as_slice().iter().all(|z| z.re == 0.0 && z.im == 0.0), || format!("odd p Wigner d={d} k={k} not exactly zero"))?;
            let q = assemble_matrix(Route::Quadrature, k, &odd).map_err(|e| e.to_string())?;
            ensure(q.matrix.max_abs() < 1e-11, || format!("odd p quadrature d={d} k={k}: {:e}", q.matrix.max_abs()))?;
        }
    }
    Ok("Y_{0,1} scalar, odd p zero".into())
}

fn nonincreasing_mechanism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let mut trivial = 0;
    let mut worst_sum: f64 = 0.0;
    for trial in 0..100 {
        let rho = if trial % 10 == 0 {
            let odd = sparse_random_rho(&mut rng, 3, &[1, 3], 3);
            odd.combine(1.0, &PerturbationFunction::constant(3), 0.7).map_err(|e| e.to_string())?
        } else {
            sparse_random_rho(&mut rng, 3, &[0, 1, 2, 3, 4], 3)
        };
        for k in 1..=3 {
            let m = assemble_matrix(Route::Wigner, k, &rho).map_err(|e| e.to_string())?;
            let r = eigen_spectrum(&m, rho.a01()).map_err(|e| e.to_string())?;
            let e_max = traceless_part(&m, rho.a01()).max_abs();
            let e1 = r.e[0];
            ensure(e1 <= 1e-12, || format!("trial {trial} k={k}: e_1 = {e1:e}"))?;
            if e_max >= 1e-12 {
                ensure(e1 < 0.0, || format!("trial {trial} k={k}: e_1 = {e1:e} with |E|_max = {e_max:e}"))?;
            } else {
                trivial += 1;
            }
            let s: f64 = normalized_expansion(&r).iter().map(|(_, l1)| l1).sum();
            worst_sum = worst_sum.max(s.abs());
            ensure(s.abs() < 1e-10, || format!("trial {trial} k={k}: branch sum {s:e}"))?;
        }
    }
    Ok(format!("{trivial} cases with E = 0, max branch sum {worst_sum:.2e}"))
}

fn ball_not_maximal() -> Check {
    let mut least = f64::INFINITY;
    for d in 3..=4 {
        let rho = axial_quadrupole_rho(d);
        for k in 1..=4 {
            let m = assemble_matrix(Route::Wigner, k, &rho).map_err(|e| e.to_string())?;
            let r = eigen_spectrum(&m, rho.a01()).map_err(|e| e.to_string())?;
            let top = *r.lambda1.last().unwrap();
            let big = normalized_expansion(&r).iter().map(|(_, l1)| *l1).fold(f64::NEG_INFINITY, f64::max);
            ensure(top > 1e-6 && big > 0.0, || format!("d={d} k={k}: max lambda1 = {top:e}"))?;
            least = least.min(top);
        }
    }
    Ok(format!("smallest max eigenvalue {least:.4}"))
}

fn dtn_oracle() -> Check {
    let rho = axial_quadrupole_rho(3);
    let mut summary = Vec::new();
    for k in 1..=2 {
        let s = slope_study(&rho, k, &[4e-3, 2e-3, 1e-3], None).map_err(|e| e.to_string())?;
        let last = *s.rel_errors.last().unwrap();
        ensure(last < 1e-3, || format!("k={k}: relative error {last:e} at eps=1e-3"))?;
        ensure(s.orders.iter().all(|o| *o >= 1.8), || format!("k={k}: orders {:?}", s.orders))?;
        summary.push(format!("k={k} err={last:.2e} order={:.3}", s.orders.iter().cloned().fold(f64::INFINITY, f64::min)));
    }
    Ok(summary.join(", "))
}

fn volume_expansion() -> Check {
    let eps = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst: f64 = 0.0;
    for d in 3..=4 {
        let rho = sparse_random_rho(&mut rng, d, &[0, 1, 2, 3], 3);
        let grid = build_grid(d, volume_degree(d, &rho)).map_err(|e| e.to_string())?;
        let p = 1.0 / (d as f64 + 1.0);
        let plus = volume_of_perturbed(&grid, &rho, eps).map_err(|e| e.to_string())?.powf(p);
        let minus = volume_of_perturbed(&grid, &rho, -eps).map_err(|e| e.to_string())?.powf(p);
        let slope = (plus - minus) / (2.0 * eps);
        let want = rho.a01() * ball_volume(d).powf(p) / sphere_area(d).sqrt();
        let err = (slope - want).abs();
        worst = worst.max(err);
        ensure(err < 5.0 * eps, || format!("d={d}: slope {slope} vs {want}"))?;
    }
    Ok(format!("max error {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check, Option<Duration>); 10] = [
        ("1 multiplicity and enumeration", multiplicity_and_enumeration, Some(Duration::from_secs(1))),
        ("2 harmonic analysis suite", harmonic_analysis, Some(Duration::from_secs(60))),
        ("3 Wigner exactness", wigner_exactness, Some(Duration::from_secs(10))),
        ("4 cross-route equivalence", cross_route, Some(Duration::from_secs(300))),
        ("5 trace identity", trace_identity, None),
        ("6 constant and odd perturbations", ball_and_parity_cases, None),
        ("7 nonincreasing mechanism", nonincreasing_mechanism, None),
        ("8 ball is not a maximizer", ball_not_maximal, None),
        ("9 DtN oracle validation", dtn_oracle, Some(Duration::from_secs(600))),
        ("10 volume expansion", volume_expansion, None),
    ];
    let mut failures = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("runtime {elapsed:.2?} exceeds {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{elapsed:.2?}]: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name} [{elapsed:.2?}]: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
