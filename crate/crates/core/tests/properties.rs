mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::sparse_random_rho;
use steklov_core::harmonics::{enumerate_indices, multiplicity, HarmonicIndex};
use steklov_core::perturbation::*;
use steklov_core::special::sphere_area;
use steklov_core::wigner::{wigner3j, ThreeJ};

fn rho_strategy(d: usize) -> impl Strategy<Value = PerturbationFunction> {
    any::<u64>().prop_map(move |seed| sparse_random_rho(&mut ChaCha8Rng::seed_from_u64(seed), d, &[0, 1, 2, 3, 4], 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assembly_is_linear_in_rho(a in rho_strategy(3), b in rho_strategy(3), s in -2.0f64..2.0, t in -2.0f64..2.0, k in 1u32..=3) {
        let ma = assemble_matrix(Route::Wigner, k, &a).unwrap().matrix;
        let mb = assemble_matrix(Route::Wigner, k, &b).unwrap().matrix;
        let mc = assemble_matrix(Route::Wigner, k, &a.combine(s, &b, t).unwrap()).unwrap().matrix;
        let want = ma.scale(Complex64::new(s, 0.0)).add(&mb.scale(Complex64::new(t, 0.0)));
        prop_assert!(mc.max_abs_diff(&want) < 1e-11);
    }

    #[test]
    fn trace_matches_constant_coefficient(rho in rho_strategy(4), k in 1u32..=3) {
        let m = assemble_matrix(Route::Wigner, k, &rho).unwrap();
        let want = -(k as f64) * rho.a01() * multiplicity(4, k) as f64 / sphere_area(4).sqrt();
        prop_assert!((m.matrix.trace().re - want).abs() < 1e-10);
        prop_assert!(m.matrix.hermitian_defect() == 0.0);
    }

    #[test]
    fn spectrum_invariant_under_basis_permutation(rho in rho_strategy(3), k in 1u32..=3, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let m = assemble_matrix(Route::Wigner, k, &rho).unwrap();
        let mut perm: Vec<usize> = (0..m.size()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut pm = m.clone();
        pm.matrix = m.matrix.permuted(&perm);
        let a = eigen_spectrum(&m, rho.a01()).unwrap().lambda1;
        let b = eigen_spectrum(&pm, rho.a01()).unwrap().lambda1;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_degrees_do_not_contribute(seed in any::<u64>(), k in 1u32..=3, d in 3usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let odd = sparse_random_rho(&mut rng, d, &[1, 3, 5], 4);
        let m = assemble_matrix(Route::Wigner, k, &odd).unwrap();
        prop_assert!(m.matrix.max_abs() == 0.0);
    }

    #[test]
    fn traceless_part_sums_to_zero(rho in rho_strategy(3), k in 1u32..=3) {
        let m = assemble_matrix(Route::Wigner, k, &rho).unwrap();
        let r = eigen_spectrum(&m, rho.a01()).unwrap();
        prop_assert!(r.e.iter().sum::<f64>().abs() < 1e-10);
        prop_assert!(r.e[0] <= 1e-12);
    }

    #[test]
    fn three_j_vanishes_outside_selection(j1 in 0u32..6, j2 in 0u32..6, j3 in 0u32..6, m1 in -6i32..=6, m2 in -6i32..=6) {
        let q = ThreeJ::new(j1, j2, j3, m1, m2, -m1 - m2);
        if !steklov_core::wigner::selection_check(&q) {
            prop_assert!(wigner3j(&q).is_zero());
        }
    }
}

#[test]
fn json_round_trip_preserves_assembly() {
    let rho = sparse_random_rho(&mut ChaCha8Rng::seed_from_u64(9), 3, &[0, 2, 4], 3);
    let back = PerturbationFunction::from_json(&rho.to_json()).unwrap();
    let a = assemble_matrix(Route::Wigner, 2, &rho).unwrap().matrix;
    let b = assemble_matrix(Route::Wigner, 2, &back).unwrap().matrix;
    assert_eq!(a.max_abs_diff(&b), 0.0);
}

#[test]
fn global_index_ranges_tile_the_integers() {
    for d in 3..=5 {
        let mut next = 1u64;
        for k in 1..=6 {
            let (lo, hi) = global_index_range(d, k).unwrap();
            assert_eq!(lo, next);
            assert_eq!(hi - lo + 1, multiplicity(d, k));
            next = hi + 1;
        }
    }
    assert_eq!(enumerate_indices(3, 0), vec![HarmonicIndex::zonal(3, 0)]);
}
