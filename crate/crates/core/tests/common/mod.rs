#![allow(dead_code)]

use rand::Rng;
use std::f64::consts::PI;
use steklov_core::harmonics::{enumerate_indices, AngularPoint, HarmonicIndex};
use steklov_core::perturbation::PerturbationFunction;

pub fn random_point<R: Rng>(rng: &mut R, d: usize) -> AngularPoint {
    let mut t = vec![rng.gen_range(0.0..2.0 * PI)];
    t.extend((1..d).map(|_| rng.gen_range(0.05..PI - 0.05)));
    AngularPoint::new(t).unwrap()
}

/// Random coefficients in `[-1, 1]` on every index of the listed degrees.
pub fn random_rho<R: Rng>(rng: &mut R, d: usize, degrees: &[u32]) -> PerturbationFunction {
    let terms: Vec<(HarmonicIndex, f64)> = degrees
        .iter()
        .flat_map(|&p| enumerate_indices(d, p))
        .map(|i| (i, rng.gen_range(-1.0..1.0)))
        .collect();
    PerturbationFunction::new(d, terms).unwrap()
}

/// Random coefficients on up to `per_degree` random indices of each listed degree.
pub fn sparse_random_rho<R: Rng>(rng: &mut R, d: usize, degrees: &[u32], per_degree: usize) -> PerturbationFunction {
    let mut terms = Vec::new();
    for &p in degrees {
        let all = enumerate_indices(d, p);
        for _ in 0..per_degree.min(all.len()) {
            let i = all[rng.gen_range(0..all.len())].clone();
            if !terms.iter().any(|(t, _): &(HarmonicIndex, f64)| *t == i) {
                terms.push((i, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    PerturbationFunction::new(d, terms).unwrap()
}

/// `Y_{2,(0,2,...,2)}` on `S^d`.
pub fn axial_quadrupole_rho(d: usize) -> PerturbationFunction {
    let mut m = vec![2; d - 1];
    m[0] = 0;
    PerturbationFunction::single(HarmonicIndex::new(2, m).unwrap(), 1.0).unwrap()
}
