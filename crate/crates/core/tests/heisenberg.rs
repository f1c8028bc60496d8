use std::sync::Arc;

use psido_core::algebra::AlgebraElement;
use psido_core::deformation::DeformationMatrix;
use psido_core::heisenberg::{
    commutant_check, conjugate_operator, extract_field, heisenberg_inverse, heisenberg_translate,
    heisenberg_translate_with, heissmooth_check, heissmooth_deviation, smoothness_probe, CommutantThresholds,
    TranslateMode,
};
use psido_core::quantize::quantize_apply;
use psido_core::rng::CounterRng;
use psido_core::sampling::{make_test_function, module_norm, random_element, relative_distance, Recipe};
use psido_core::symbol::SymbolFn;
use psido_core::{Error, GridSpec, ModuleFunction, OperatorHandle, Symbol};

fn grid1() -> GridSpec {
    GridSpec::new(1, 10.0, 256).unwrap()
}

fn grid2() -> GridSpec {
    GridSpec::new(2, 6.0, 64).unwrap()
}

fn element(seed: u64) -> AlgebraElement {
    random_element(&mut CounterRng::new(seed), 2)
}

/// `exp(-|x - c|^2 - |xi - d|^2) * coeff`, optionally translated in phase space.
fn gaussian_symbol(grid: GridSpec, c: f64, d: f64, coeff: AlgebraElement) -> SymbolFn {
    SymbolFn::on_phase_space(grid, coeff.dim(), move |x, xi, out| {
        let r2: f64 = x.iter().map(|v| (v - c).powi(2)).sum::<f64>() + xi.iter().map(|v| (v - d).powi(2)).sum::<f64>();
        let w = (-r2).exp();
        for (o, e) in out.iter_mut().zip(coeff.entries()) {
            *o = e * w;
        }
    })
}

fn field_symbol(grid: GridSpec, theta: f64, sign: f64, sigma: f64, coeff: AlgebraElement) -> SymbolFn {
    SymbolFn::on_phase_space(grid, coeff.dim(), move |x, xi, out| {
        let y = [x[0] + sign * theta * xi[1] - 0.2, x[1] - sign * theta * xi[0] + 0.1];
        let w = (-(y[0] * y[0] + y[1] * y[1]) / (2.0 * sigma * sigma)).exp();
        for (o, e) in out.iter_mut().zip(coeff.entries()) {
            *o = e * w;
        }
    })
}

#[test]
fn trivial_translation_is_identity() {
    let f = make_test_function(Recipe::GaussianPoly, grid1(), 2, 1).unwrap();
    let g = heisenberg_translate(&f, &[0.0], &[0.0], 0.0).unwrap();
    assert_eq!(g.values(), f.values());
}

#[test]
fn translation_is_an_isometry_with_inverse() {
    let grid = grid1();
    let h = grid.spacing();
    for seed in 0..4 {
        let f = make_test_function(Recipe::ModulatedGaussian, grid, 2, seed).unwrap();
        let (z, zeta, t) = ([6.0 * h], [0.7], 1.3);
        let g = heisenberg_translate(&f, &z, &zeta, t).unwrap();
        let (a, b) = (module_norm(&f).unwrap(), module_norm(&g).unwrap());
        assert!((a - b).abs() <= 1e-10 * a);
        let back = heisenberg_inverse(&g, &z, &zeta, t, TranslateMode::Exact).unwrap();
        assert!(back.sub(&f).unwrap().sup_norm() <= 1e-10 * f.sup_norm());
    }
}

#[test]
fn off_grid_exact_translation_is_rejected() {
    let f = make_test_function(Recipe::GaussianPoly, grid1(), 2, 1).unwrap();
    let h = grid1().spacing();
    assert!(matches!(heisenberg_translate(&f, &[0.5 * h], &[0.0], 0.0), Err(Error::Precondition(_))));
    assert!(heisenberg_translate_with(&f, &[0.5 * h], &[0.0], 0.0, TranslateMode::Bandlimited).is_ok());
}

#[test]
fn conjugation_does_not_depend_on_t() {
    let grid = grid1();
    let h = grid.spacing();
    let a: Arc<dyn Symbol> = Arc::new(gaussian_symbol(grid, 0.3, -0.5, element(3)));
    let op = OperatorHandle::from_symbol(a);
    let phi = make_test_function(Recipe::GaussianPoly, grid, 2, 4).unwrap();
    let (z, zeta) = ([4.0 * h], [0.6]);
    let p0 = conjugate_operator(&op, &z, &zeta, 0.0, TranslateMode::Exact).apply(&phi).unwrap();
    let p1 = conjugate_operator(&op, &z, &zeta, 1.3, TranslateMode::Exact).apply(&phi).unwrap();
    assert!(p0.sub(&p1).unwrap().sup_norm() <= 1e-10 * p0.sup_norm());
    let same = conjugate_operator(&op, &[0.0], &[0.0], 0.0, TranslateMode::Exact).apply(&phi).unwrap();
    assert!(same.sub(&op.apply(&phi).unwrap()).unwrap().sup_norm() <= 1e-12 * same.sup_norm());
}

#[test]
fn conjugation_translates_the_symbol() {
    let grid = grid1();
    let h = grid.spacing();
    let coeff = element(5);
    let op = OperatorHandle::from_symbol(Arc::new(gaussian_symbol(grid, 0.3, -0.5, coeff.clone())));
    let (z, zeta) = (8.0 * h, 0.9);
    let moved = gaussian_symbol(grid, 0.3 - z, -0.5 - zeta, coeff);
    let conj = conjugate_operator(&op, &[z], &[zeta], 0.0, TranslateMode::Exact);
    for seed in 0..3 {
        let phi = make_test_function(Recipe::GaussianPoly, grid, 2, seed).unwrap();
        let lhs = conj.apply(&phi).unwrap();
        let rhs = quantize_apply(&moved, &phi).unwrap();
        let d = relative_distance(&lhs, &rhs).unwrap();
        assert!(d <= 1e-5, "{d}");
    }
}

#[test]
fn smoothness_probe_matches_symbol_derivative() {
    let grid = GridSpec::new(1, 6.0, 1024).unwrap();
    let h = grid.spacing();
    let coeff = AlgebraElement::identity(2);
    let op = OperatorHandle::from_symbol(Arc::new(gaussian_symbol(grid, 0.0, 0.0, coeff.clone())));
    let builder = |z: &[f64], zeta: &[f64]| Ok(conjugate_operator(&op, z, zeta, 0.0, TranslateMode::Exact));
    let phi = ModuleFunction::gaussian(grid, &[0.2], 0.8, &coeff).unwrap();
    let dx = SymbolFn::on_phase_space(grid, 2, |x, xi, out| {
        let w = -2.0 * x[0] * (-x[0] * x[0] - xi[0] * xi[0]).exp();
        out.copy_from_slice(&[w.into(), 0.0.into(), 0.0.into(), w.into()]);
    });
    let oracle = quantize_apply(&dx, &phi).unwrap();
    let probe = smoothness_probe(&builder, &phi, &[1], &[0], 2.0 * h).unwrap();
    let d = relative_distance(&probe, &oracle).unwrap();
    assert!(d <= 1e-3, "{d}");

    let coarse = module_norm(&smoothness_probe(&builder, &phi, &[1], &[0], 4.0 * h).unwrap()).unwrap();
    let fine = module_norm(&probe).unwrap();
    assert!((coarse / fine - 1.0).abs() <= 0.05);

    let flat = |_: &[f64], _: &[f64]| Ok(op.clone());
    let zero = smoothness_probe(&flat, &phi, &[1], &[1], 2.0 * h).unwrap();
    assert_eq!(zero.sup_norm(), 0.0);
    assert!(matches!(smoothness_probe(&builder, &phi, &[1], &[0], 0.5 * h), Err(Error::Resolution(_))));
}

fn samples() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![0.3, -0.2], vec![0.5, 0.0]),
        (vec![0.0, 0.4], vec![-0.3, 0.7]),
        (vec![-0.5, 0.1], vec![0.2, -0.6]),
        (vec![0.2, 0.2], vec![1.0, 0.4]),
        (vec![0.0, 0.0], vec![-0.8, -0.5]),
    ]
}

#[test]
fn left_representation_is_heisenberg_covariant() {
    let grid = grid2();
    let j = DeformationMatrix::theta(0.5);
    let f = ModuleFunction::gaussian(grid, &[0.2, -0.1], 0.8, &element(7)).unwrap();
    let op = OperatorHandle::left_rep(f, j.clone());
    let phis: Vec<_> = (0..2)
        .map(|s| make_test_function(Recipe::GaussianPoly, grid, 2, s).unwrap())
        .collect();
    let report = heissmooth_check(&op, &j, &samples(), &phis, 1e-4).unwrap();
    assert!(report.pass, "{:?}", report.metrics);
    let zero_zeta: Vec<_> = samples().into_iter().map(|(z, _)| (z, vec![0.0, 0.0])).collect();
    assert_eq!(heissmooth_deviation(&op, &j, &zero_zeta, &phis).unwrap(), 0.0);
}

#[test]
fn multiplication_symbol_is_not_heisenberg_covariant() {
    let grid = grid2();
    let j = DeformationMatrix::theta(0.5);
    let a = SymbolFn::on_phase_space(grid, 2, |x, _, out| {
        let w = (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
        out.copy_from_slice(&[w.into(), 0.0.into(), 0.0.into(), w.into()]);
    });
    let op = OperatorHandle::from_symbol(Arc::new(a));
    let phis = vec![make_test_function(Recipe::GaussianPoly, grid, 2, 0).unwrap()];
    let dev = heissmooth_deviation(&op, &j, &samples(), &phis).unwrap();
    assert!(dev > 1e-2, "{dev}");
}

fn g_suite(grid: GridSpec) -> Vec<ModuleFunction> {
    vec![
        ModuleFunction::gaussian(grid, &[0.3, 0.0], 0.8, &element(81)).unwrap(),
        ModuleFunction::gaussian(grid, &[-0.2, 0.4], 0.7, &element(82)).unwrap(),
    ]
}

#[test]
fn left_symbols_pass_the_commutant_fingerprint() {
    let grid = grid2();
    let j = DeformationMatrix::theta(0.5);
    let a = Arc::new(field_symbol(grid, 0.5, -1.0, 0.8, element(9)));
    let phis: Vec<_> = (0..2)
        .map(|s| make_test_function(Recipe::GaussianPoly, grid, 2, s).unwrap())
        .collect();
    let (report, m) = commutant_check(a.clone(), &j, &g_suite(grid), &phis, &CommutantThresholds::default()).unwrap();
    assert!(report.pass, "{:?}", report.metrics);
    assert!(m.commutator <= 1e-4, "{m:?}");
    assert!(m.symbol_deviation <= 1e-6, "{m:?}");
    assert!(m.extraction <= 1e-3, "{m:?}");

    let f = extract_field(a.as_ref()).unwrap();
    let expected = ModuleFunction::gaussian(grid, &[0.2, -0.1], 0.8, &element(9)).unwrap();
    assert!(f.sub(&expected).unwrap().sup_norm() <= 1e-12);
}

#[test]
fn multiplication_symbol_fails_commutation() {
    let grid = grid2();
    let j = DeformationMatrix::theta(0.5);
    let a = Arc::new(SymbolFn::on_phase_space(grid, 2, |x, _, out| {
        let w = (-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
        out.copy_from_slice(&[w.into(), 0.0.into(), 0.0.into(), w.into()]);
    }));
    let phis = vec![make_test_function(Recipe::GaussianPoly, grid, 2, 0).unwrap()];
    let (report, m) = commutant_check(a, &j, &g_suite(grid), &phis, &CommutantThresholds::default()).unwrap();
    assert!(report.pass, "{:?}", report.metrics);
    assert!(m.commutator > 1e-2, "{m:?}");
    assert!(m.symbol_deviation > 1e-2, "{m:?}");
}

#[test]
fn frequency_symbol_does_not_commute_with_multiplication() {
    let grid = GridSpec::new(2, 8.0, 64).unwrap();
    let j = DeformationMatrix::zero(2);
    let a = Arc::new(SymbolFn::on_phase_space(grid, 1, |_, xi, out| {
        out[0] = (-(xi[0] * xi[0] + xi[1] * xi[1]) / 2.0).exp().into();
    }));
    let g = vec![ModuleFunction::gaussian(grid, &[0.3, 0.0], 0.8, &AlgebraElement::identity(1)).unwrap()];
    let phis = vec![ModuleFunction::gaussian(grid, &[0.0, 0.2], 0.6, &AlgebraElement::identity(1)).unwrap()];
    let (_, m) = commutant_check(a, &j, &g, &phis, &CommutantThresholds::default()).unwrap();
    assert!(m.commutator > 1e-2, "{m:?}");
}
