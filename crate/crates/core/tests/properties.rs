use proptest::prelude::*;

use psido_core::algebra::{block_adjoint_mul_acc_scaled, block_mul_acc_scaled, AlgebraElement, C64};
use psido_core::fourier::fourier;
use psido_core::rng::CounterRng;
use psido_core::sampling::{make_test_function, random_element};
use psido_core::{cstar_norm, module_inner, module_norm, GridSpec, Recipe};

fn element(seed: u64, k: usize) -> AlgebraElement {
    random_element(&mut CounterRng::new(seed), k)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn svd_norm(a: &AlgebraElement) -> f64 {
    a.to_matrix().singular_values().iter().copied().fold(0.0, f64::max)
}

const SCHWARTZ: [Recipe; 3] = [Recipe::GaussianPoly, Recipe::ModulatedGaussian, Recipe::Bump];

proptest! {
    #[test]
    fn cstar_identity_and_involution(seed in any::<u64>(), k in 1usize..5) {
        let a = element(seed, k);
        let n = cstar_norm(&a).unwrap();
        prop_assert!(close(cstar_norm(&a.adjoint()).unwrap(), n, 1e-12));
        prop_assert!(close(cstar_norm(&a.adjoint().mul(&a)).unwrap(), n * n, 1e-12));
        prop_assert!(close(n, svd_norm(&a), 1e-12));
    }

    #[test]
    fn norm_is_submultiplicative(s1 in any::<u64>(), s2 in any::<u64>(), k in 1usize..5) {
        let (a, b) = (element(s1, k), element(s2, k));
        let ab = cstar_norm(&a.mul(&b)).unwrap();
        prop_assert!(ab <= cstar_norm(&a).unwrap() * cstar_norm(&b).unwrap() * (1.0 + 1e-12));
        let sum = cstar_norm(&a.add(&b)).unwrap();
        prop_assert!(sum <= (cstar_norm(&a).unwrap() + cstar_norm(&b).unwrap()) * (1.0 + 1e-12));
    }

    #[test]
    fn block_kernels_match_element_arithmetic(s1 in any::<u64>(), s2 in any::<u64>(), k in 1usize..6, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (a, b) = (element(s1, k), element(s2, k));
        let s = C64::new(re, im);
        let mut out = vec![C64::new(0.0, 0.0); k * k];
        block_mul_acc_scaled(k, s, a.entries(), b.entries(), &mut out);
        let expected = a.mul(&b).scale(s);
        for (x, y) in out.iter().zip(expected.entries()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
        let mut out = vec![C64::new(0.0, 0.0); k * k];
        block_adjoint_mul_acc_scaled(k, s, a.entries(), b.entries(), &mut out);
        let expected = a.adjoint().mul(&b).scale(s);
        for (x, y) in out.iter().zip(expected.entries()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>(), label in any::<u64>()) {
        let draw = |r: &mut CounterRng| (0..8).map(|_| r.next_u64()).collect::<Vec<_>>();
        let base = CounterRng::new(seed);
        prop_assert_eq!(draw(&mut base.split(label)), draw(&mut base.split(label)));
        prop_assert_ne!(draw(&mut base.split(label)), draw(&mut base.split(label.wrapping_add(1))));
        let mut r = CounterRng::new(seed);
        for _ in 0..64 {
            let u = r.uniform();
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn module_inner_product_axioms(s1 in any::<u64>(), s2 in any::<u64>(), r1 in 0usize..3, r2 in 0usize..3, s3 in any::<u64>()) {
        let grid = GridSpec::new(1, 10.0, 128).unwrap();
        let f = make_test_function(SCHWARTZ[r1], grid, 2, s1).unwrap();
        let g = make_test_function(SCHWARTZ[r2], grid, 2, s2).unwrap();
        let fg = module_inner(&f, &g).unwrap();
        let (nf, ng) = (module_norm(&f).unwrap(), module_norm(&g).unwrap());
        // Cauchy-Schwarz for Hilbert modules
        prop_assert!(cstar_norm(&fg).unwrap() <= nf * ng * (1.0 + 1e-12));
        // <f, f> is positive and <g, f> = <f, g>^*
        let ff = module_inner(&f, &f).unwrap();
        prop_assert!(ff.min_hermitian_eigenvalue() >= -1e-12 * nf * nf);
        let gf = module_inner(&g, &f).unwrap();
        prop_assert!(cstar_norm(&gf.sub(&fg.adjoint())).unwrap() <= 1e-12 * nf * ng);
        // right A-linearity
        let a = element(s3, 2);
        let lhs = module_inner(&f, &g.mul_right(&a)).unwrap();
        prop_assert!(cstar_norm(&lhs.sub(&fg.mul(&a))).unwrap() <= 1e-12 * nf * ng * cstar_norm(&a).unwrap());
    }

    #[test]
    fn fourier_preserves_the_inner_product(s1 in any::<u64>(), s2 in any::<u64>(), r1 in 0usize..3, r2 in 0usize..3) {
        let grid = GridSpec::new(1, 10.0, 256).unwrap();
        let f = make_test_function(SCHWARTZ[r1], grid, 2, s1).unwrap();
        let g = make_test_function(SCHWARTZ[r2], grid, 2, s2).unwrap();
        let lhs = module_inner(&f, &g).unwrap();
        let rhs = module_inner(&fourier(&f).unwrap(), &fourier(&g).unwrap()).unwrap();
        let bound = 1e-8 * (module_norm(&f).unwrap() * module_norm(&g).unwrap() + 1.0);
        prop_assert!(cstar_norm(&lhs.sub(&rhs)).unwrap() <= bound);
    }
}
