//! Property tests for the operator, relation, spectral and differential layers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use sectorial::diffop::{
    analytic_quotient, galerkin_adjoint_matrix, galerkin_matrix, obstruction_index, quadrature_quotient, DiffOpProblem, GalerkinBasis,
};
use sectorial::numlin::random::{gaussian_matrix, haar_unitary, random_contraction, seeded, unit_vector};
use sectorial::numlin::{general_eigenvalues, hermitian_eigenvalues, inner, vec_norm, ComplexMatrix};
use sectorial::oprange::{classify_operator, hausdorff_distance, range_boundary, real_part, semi_angle};
use sectorial::relcalc::{
    cayley_triple, classify_relation, is_m_sectorial, random_sectorial_operator, random_sectorial_relation, relation_from_contraction,
    rotate_relation, LinearRelation,
};
use sectorial::spectheory::{factorize, sector_spectrum_report};

fn lambda_min(h: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(h, f64::INFINITY).unwrap()[0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semi_angle_separates_classification(seed in any::<u64>(), n in 1usize..=16, phi in 0.02f64..1.5) {
        let t = random_sectorial_operator(n, phi, seed).unwrap();
        let star = semi_angle(&t, 1e-12).unwrap().unwrap();
        prop_assert!(!classify_operator(&t, star - 0.01, 1e-12).unwrap().class_flags.m_sectorial);
        prop_assert!(classify_operator(&t, (star + 0.01).min(FRAC_PI_2), 1e-12).unwrap().class_flags.m_sectorial);
    }

    #[test]
    fn eigenvalues_lie_in_the_sector(seed in any::<u64>(), n in 1usize..=16, phi in 0.0f64..1.5) {
        let t = random_sectorial_operator(n, phi, seed).unwrap();
        let star = semi_angle(&t, 1e-12).unwrap().unwrap();
        let tan = (star + 1e-6).tan();
        let slack = 1e-9 * t.norm2();
        for z in general_eigenvalues(&t).unwrap() {
            prop_assert!(z.im.abs() <= tan * z.re + slack, "{z}");
        }
    }

    #[test]
    fn range_boundary_is_unitarily_invariant(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = seeded(seed);
        let t = gaussian_matrix(n, n, &mut rng);
        let u = haar_unitary(n, &mut rng);
        let similar = &(&u.adjoint() * &t) * &u;
        let a = range_boundary(&t, 64).unwrap();
        let b = range_boundary(&similar, 64).unwrap();
        prop_assert!(hausdorff_distance(&a.points, &b.points) <= 1e-8);
    }

    #[test]
    fn semi_angle_is_scale_invariant(seed in any::<u64>(), n in 1usize..=8, phi in 0.0f64..1.5, c in 0.1f64..10.0) {
        let t = random_sectorial_operator(n, phi, seed).unwrap();
        let a = semi_angle(&t, 1e-13).unwrap().unwrap();
        let b = semi_angle(&t.scale_real(c), 1e-13).unwrap().unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn cayley_round_trip(seed in any::<u64>(), n in 1usize..=8, phi in 0.0f64..FRAC_PI_2) {
        let k = random_contraction(n, seed % 2 == 0, &mut seeded(seed));
        let theta = relation_from_contraction(&k, 1e-10).unwrap();
        // V and W need not exist for an arbitrary m-accretive relation; K always does
        if let Ok(triple) = cayley_triple(&theta, phi) {
            prop_assert!((&triple.k - &k).norm2() <= 1e-9);
        }
    }

    #[test]
    fn reverse_cayley_round_trip(seed in any::<u64>(), n in 1usize..=8, phi in 0.0f64..1.5) {
        let theta = random_sectorial_relation(n, phi, seed).unwrap();
        let k = cayley_triple(&theta, phi).unwrap().k;
        prop_assert!(theta.distance(&relation_from_contraction(&k, 1e-10).unwrap()) <= 1e-9);
    }

    #[test]
    fn transforms_contract_exactly_above_the_semi_angle(seed in any::<u64>(), n in 1usize..=6, star in 0.0f64..1.5) {
        let theta = random_sectorial_relation(n, star, seed).unwrap();
        for j in 0..32 {
            let phi = j as f64 * FRAC_PI_2 / 32.0;
            if (phi - star).abs() < 1e-6 {
                continue;
            }
            let t = cayley_triple(&theta, phi).unwrap();
            let (_, v, w) = t.norms();
            let contractive = v <= 1.0 + 1e-10 && w <= 1.0 + 1e-10;
            prop_assert_eq!(contractive, phi >= star - 1e-6, "φ = {}, φ* = {}, ‖V‖ = {}, ‖W‖ = {}", phi, star, v, w);
        }
    }

    #[test]
    fn m_sectorial_equals_flag_conjunction(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=12, phi in 0.0f64..FRAC_PI_2) {
        let mut rng = seeded(seed);
        let theta = if seed % 2 == 0 {
            random_sectorial_relation(n, phi * rng.random_range(0.5..1.5f64).min(1.5), seed).unwrap()
        } else {
            LinearRelation::from_spanning(n, &gaussian_matrix(2 * n, k.min(2 * n), &mut rng)).unwrap()
        };
        let base = classify_relation(&theta, 1e-9).unwrap();
        let up = classify_relation(&rotate_relation(&theta, phi), 1e-9).unwrap();
        let down = classify_relation(&rotate_relation(&theta, -phi), 1e-9).unwrap();
        prop_assert_eq!(
            is_m_sectorial(&theta, phi, 1e-9).unwrap(),
            base.accretive && base.maximal && up.dissipative && down.accumulative
        );
    }

    #[test]
    fn contraction_defect_identity(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=12) {
        let theta = LinearRelation::from_spanning(n, &gaussian_matrix(2 * n, k.min(2 * n), &mut seeded(seed))).unwrap();
        let (x, xp) = (theta.domain_block(), theta.value_block());
        for j in 0..theta.dim() {
            let (a, b) = (x.column(j), xp.column(j));
            let diff: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| q - p).collect();
            let sum: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| q + p).collect();
            let lhs = vec_norm(&diff).powi(2);
            let rhs = vec_norm(&sum).powi(2) - 4.0 * inner(&b, &a).re;
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }

    #[test]
    fn factorization_identities(seed in any::<u64>(), n in 1usize..=32, extra in 0.05f64..2.0) {
        let t = gaussian_matrix(n, n, &mut seeded(seed));
        let alpha = (-lambda_min(&real_part(&t).unwrap())).max(0.0) + extra;
        let r = factorize(&t, alpha, 16, seed).unwrap();
        prop_assert!(r.residual <= 1e-11);
        prop_assert!(r.identity_gap <= 1e-10);
        prop_assert!(r.resolvent_residual.unwrap() <= 1e-10);
    }

    #[test]
    fn accretive_lower_bound(seed in any::<u64>(), n in 1usize..=16, phi in 0.0f64..1.5, alpha in 0.01f64..3.0) {
        let t = random_sectorial_operator(n, phi, seed).unwrap();
        let r = factorize(&t, alpha, 32, seed).unwrap();
        prop_assert!(r.p_min_real_quotient >= alpha - 1e-10 * (1.0 + alpha));
    }

    #[test]
    fn generator_spectrum_stays_in_sector(seed in any::<u64>(), n in 2usize..=32, which in 0usize..4) {
        let phi = [0.0, FRAC_PI_8, FRAC_PI_4, FRAC_PI_3][which];
        let t = random_sectorial_operator(n, phi, seed).unwrap();
        prop_assert_eq!(sector_spectrum_report(&t, 1e-9 * t.norm2()).unwrap().sector_violations, 0);
    }

    #[test]
    fn quadrature_matches_analytic(seed in any::<u64>(), d in 1usize..=4, n in 1usize..=64, phi in 0.0f64..1.5) {
        let a = random_sectorial_operator(d, phi, seed).unwrap();
        let f = unit_vector(d, &mut seeded(seed ^ 0x5eed));
        let prob = DiffOpProblem::new(0.0, 1.0 + (seed % 3) as f64, a, ComplexMatrix::zeros(d, d), 64 * n, 4).unwrap();
        let exact = analytic_quotient(&prob, &f, n).unwrap();
        let quad = quadrature_quotient(&prob, &f, n).unwrap();
        prop_assert!((exact.quotient - quad.quotient).norm() <= 1e-8);
        prop_assert!(quad.endpoint_max <= 1e-12);
    }

    #[test]
    fn galerkin_hermitian_part_and_adjoint(seed in any::<u64>(), d in 1usize..=4, m in 1usize..=16) {
        let mut rng = seeded(seed);
        let a = gaussian_matrix(d, d, &mut rng);
        let prob = DiffOpProblem::with_coefficient(-0.5, 1.5, a.clone()).unwrap();
        let g = galerkin_matrix(&prob, GalerkinBasis::Sine, m);
        let expected = ComplexMatrix::identity(m).kron(&real_part(&a).unwrap());
        prop_assert!((&real_part(&g).unwrap() - &expected).max_abs() <= 1e-12);
        prop_assert!((&galerkin_adjoint_matrix(&prob, GalerkinBasis::Sine, m) - &g.adjoint()).max_abs() <= 1e-12);
    }

    #[test]
    fn obstruction_index_leaves_the_sector(seed in any::<u64>(), d in 1usize..=4, phi in 0.0f64..1.56, len in 0.1f64..5.0) {
        let mut rng = seeded(seed);
        let g = gaussian_matrix(d, d, &mut rng);
        let a = &g.adjoint() * &g;
        let f = unit_vector(d, &mut rng);
        let prob = DiffOpProblem::with_coefficient(0.0, len, a.clone()).unwrap();
        let af = inner(&a.apply(&f), &f);
        prop_assume!(af.re > 1e-6);
        let n_star = obstruction_index(af, len, phi);
        prop_assert!(analytic_quotient(&prob, &f, n_star).unwrap().angle_lower_bound() > phi);
    }

    #[test]
    fn test_modes_meet_every_boundary_condition(seed in any::<u64>(), d in 1usize..=4, n in 1usize..=16) {
        let mut rng = seeded(seed);
        let k = random_contraction(d, true, &mut rng);
        let a = gaussian_matrix(d, d, &mut rng);
        let f = unit_vector(d, &mut rng);
        let prob = DiffOpProblem::new(0.0, 2.0, a, k, 64 * n, 4).unwrap();
        prop_assert!(quadrature_quotient(&prob, &f, n).unwrap().endpoint_max <= 1e-12);
    }
}
