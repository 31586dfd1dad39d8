use cartan_core::classify::{block_decompose, classify, spectrum_normal};
use cartan_core::fixed_points::{detect_generic, enumerate_generic, Conclusion};
use cartan_core::generate::{generate, normal_instance, GenKind};
use cartan_core::linalg::{projector, random_contraction};
use cartan_core::{
    caratheodory_distance, compose, decompose, factorize, inverse, mobius_apply, mobius_inverse, Complex64,
    Contraction, GIsometry, MobiusMap, ToleranceConfig,
};
use proptest::prelude::*;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=5, 1usize..=5).prop_filter("m != n", |(m, n)| m != n)
}

fn point(seed: u64, m: usize, n: usize, norm: f64) -> Contraction {
    Contraction::open(random_contraction(seed, m, n, norm), &tol()).unwrap()
}

fn element(seed: u64, m: usize, n: usize) -> GIsometry {
    generate(GenKind::Random, m, n, seed, 0.8, &tol()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inverse_composes_to_identity((m, n) in shape(), seed in any::<u64>()) {
        let t = element(seed, m, n);
        let id = compose(&t, &inverse(&t), &tol()).unwrap();
        prop_assert!(id.matrix().identity_residual() < 1e-10);
    }

    #[test]
    fn factorization_roundtrip((m, n) in shape(), seed in any::<u64>()) {
        let t = element(seed, m, n);
        let f = factorize(&t, &tol()).unwrap();
        prop_assert!(f.matrix().distance(t.matrix()) < 1e-10);
        for r in f.positive_relations() {
            prop_assert!(r < 1e-10);
        }
    }

    #[test]
    fn mobius_sends_zero_to_center((m, n) in shape(), seed in any::<u64>(), norm in 0.05f64..0.95) {
        let b = point(seed, m, n, norm);
        let map = MobiusMap::new(b.clone(), &tol()).unwrap();
        let image = mobius_apply(&map, &Contraction::zero(m, n), &tol()).unwrap();
        prop_assert!(image.matrix().distance(b.matrix()) < 1e-12);
        let a = point(seed.wrapping_add(1), m, n, 0.7);
        let back = mobius_apply(&mobius_inverse(&map), &mobius_apply(&map, &a, &tol()).unwrap(), &tol()).unwrap();
        prop_assert!(back.matrix().distance(a.matrix()) < 1e-9);
    }

    #[test]
    fn distance_is_symmetric((m, n) in shape(), seed in any::<u64>()) {
        let a = point(seed, m, n, 0.6);
        let b = point(seed.wrapping_add(7), m, n, 0.5);
        let d1 = caratheodory_distance(&a, &b, &tol()).unwrap();
        let d2 = caratheodory_distance(&b, &a, &tol()).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-10);
        prop_assert!(caratheodory_distance(&a, &a, &tol()).unwrap() < 1e-7);
    }

    #[test]
    fn decomposition_ignores_global_phase((m, n) in shape(), seed in any::<u64>(), phase in 0.0f64..std::f64::consts::TAU) {
        let t = element(seed, m, n);
        let rotated = t.with_phase(Complex64::from_polar(1.0, phase));
        let s1 = decompose(&factorize(&t, &tol()).unwrap(), &tol()).unwrap();
        let s2 = decompose(&factorize(&rotated, &tol()).unwrap(), &tol()).unwrap();
        prop_assert_eq!(s1.k, s2.k);
        for (b1, b2) in s1.blocks.iter().zip(&s2.blocks) {
            prop_assert!((b1.a - b2.a).abs() < 1e-9);
            prop_assert!(projector(&b1.basis_k).distance(&projector(&b2.basis_k)) < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn detection_matches_classification((m, n) in shape(), seed in any::<u64>(), normal in any::<bool>()) {
        let kind = if normal { GenKind::Normal } else { GenKind::Random };
        let t = generate(kind, m, n, seed, 0.85, &tol()).unwrap();
        let c = classify(&t, &tol()).unwrap();
        let r = detect_generic(&t, &tol()).unwrap();
        prop_assert_eq!(c.is_non_unitary_normal, r.conclusion == Conclusion::NonUnitaryNormal);
        if c.is_non_unitary_normal {
            prop_assert_eq!(r.count, 1usize << r.k);
        }
    }

    #[test]
    fn block_view_reconstructs((m, n) in shape(), seed in any::<u64>()) {
        let k = 1 + (seed as usize % m.min(n));
        let t = normal_instance(m, n, k, seed, 0.85, false, &tol()).unwrap();
        let view = block_decompose(&t, &tol()).unwrap();
        prop_assert!(view.pattern_residual < 1e-8);
        prop_assert!(view.reconstruct().distance(t.matrix()) < 1e-8);
    }

    #[test]
    fn fixed_point_eigenvalues_match_spectrum((m, n) in shape(), seed in any::<u64>()) {
        let k = 1 + (seed as usize % m.min(n).min(3));
        let t = normal_instance(m, n, k, seed, 0.85, false, &tol()).unwrap();
        let pts = enumerate_generic(&t, &tol()).unwrap();
        let spectrum: Vec<Complex64> = spectrum_normal(&t, &tol()).unwrap().eigenvalues.iter().map(|e| e.value).collect();
        for p in &pts {
            for ev in &p.eigenvalues {
                prop_assert!(spectrum.iter().any(|s| (s - ev).norm() < 1e-8));
            }
        }
        // flipping one sign changes F only along that direction
        let n_cols = pts[0].z_basis.cols();
        for j in 0..k {
            let flipped = 1usize << (k - 1 - j);
            let diff = &pts[0].f - &pts[flipped].f;
            for c in (0..n_cols).filter(|&c| c != j) {
                let z = pts[0].z_basis.columns_range(c, 1);
                prop_assert!((&diff * &z).operator_norm() < 1e-9);
            }
        }
    }
}
