use std::sync::Arc;

use psido_core::algebra::AlgebraElement;
use psido_core::heisenberg::{
    commutant_measure, conjugate_operator, extract_field, heisenberg_inverse, heisenberg_translate,
    heissmooth_deviation, smoothness_probe, TranslateMode,
};
use psido_core::quantize::quantize_apply;
use psido_core::sampling::{make_test_function, relative_distance};
use psido_core::symbol::SymbolFn;
use psido_core::{module_norm, DeformationMatrix, GridSpec, Metric, ModuleFunction, OperatorHandle, Recipe};

use super::{field_symbol, Plot, Run, RunError, RunResult};

/// `exp(-|x - cx|^2 - |xi - cxi|^2) * coeff`.
fn gaussian(grid: GridSpec, cx: Vec<f64>, cxi: Vec<f64>, coeff: AlgebraElement) -> SymbolFn {
    SymbolFn::on_phase_space(grid, coeff.dim(), move |x, xi, out| {
        let r2: f64 = x.iter().zip(&cx).chain(xi.iter().zip(&cxi)).map(|(a, b)| (a - b).powi(2)).sum();
        let g = (-r2).exp();
        for (o, e) in out.iter_mut().zip(coeff.entries()) {
            *o = e * g;
        }
    })
}

fn axis0(n: usize, v: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    out[0] = v;
    out
}

fn constant_vec(n: usize, v: f64) -> Vec<f64> {
    vec![v; n]
}

pub(super) fn conjugation(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (n, k, seed) = (run.cfg.n, run.cfg.k, run.cfg.seed);
    let h = grid.spacing();

    let (isometry, inverse) = run.phase("translations", |run| {
        let (z, zeta, t) = (axis0(n, 6.0 * h), axis0(n, 0.7), 1.3);
        let (mut iso, mut inv) = (0.0f64, 0.0f64);
        for trial in 0..run.cfg.trial_count {
            let f = make_test_function(Recipe::ModulatedGaussian, grid, k, seed.wrapping_add(trial as u64))?;
            let g = heisenberg_translate(&f, &z, &zeta, t)?;
            let (a, b) = (module_norm(&f)?, module_norm(&g)?);
            iso = iso.max((a - b).abs() / a);
            let back = heisenberg_inverse(&g, &z, &zeta, t, TranslateMode::Exact)?;
            inv = inv.max(back.sub(&f)?.sup_norm() / f.sup_norm());
        }
        Ok((iso, inv))
    })?;
    run.at_most("isometry", isometry);
    run.at_most("inverse", inverse);

    let coeff = run.element(0x636f);
    let (cx, cxi) = (constant_vec(n, 0.3), constant_vec(n, -0.5));
    let op = OperatorHandle::from_symbol(Arc::new(gaussian(grid, cx.clone(), cxi.clone(), coeff.clone())));

    let t_dev = run.phase("t_independence", |_| {
        let phi = make_test_function(Recipe::GaussianPoly, grid, k, seed)?;
        let (z, zeta) = (axis0(n, 4.0 * h), axis0(n, 0.6));
        let p0 = conjugate_operator(&op, &z, &zeta, 0.0, TranslateMode::Exact).apply(&phi)?;
        let p1 = conjugate_operator(&op, &z, &zeta, 1.3, TranslateMode::Exact).apply(&phi)?;
        Ok(p0.sub(&p1)?.sup_norm() / p0.sup_norm())
    })?;
    run.at_most("t_independence", t_dev);

    let covariance = run.phase("covariance", |run| {
        let (z, zeta) = (axis0(n, 8.0 * h), axis0(n, 0.9));
        // a_{z,zeta}(x, xi) = a(x + z, xi + zeta)
        let mx = cx.iter().zip(&z).map(|(c, s)| c - s).collect();
        let mxi = cxi.iter().zip(&zeta).map(|(c, s)| c - s).collect();
        let moved = gaussian(grid, mx, mxi, coeff.clone());
        let conj = conjugate_operator(&op, &z, &zeta, 0.0, TranslateMode::Exact);
        let mut worst: f64 = 0.0;
        for trial in 0..run.cfg.trial_count {
            let phi = make_test_function(Recipe::GaussianPoly, grid, k, seed.wrapping_add(trial as u64))?;
            worst = worst.max(relative_distance(&conj.apply(&phi)?, &quantize_apply(&moved, &phi)?)?);
        }
        Ok(worst)
    })?;
    run.at_most("covariance", covariance);

    let (fd, analytic, halving) = run.phase("probe", |_| {
        let id = AlgebraElement::identity(k);
        let zero = vec![0.0; n];
        let sym = OperatorHandle::from_symbol(Arc::new(gaussian(grid, zero.clone(), zero, id.clone())));
        let builder = |z: &[f64], zeta: &[f64]| Ok(conjugate_operator(&sym, z, zeta, 0.0, TranslateMode::Exact));
        let phi = ModuleFunction::gaussian(grid, &axis0(n, 0.2), 0.8, &id)?;
        let (mut beta, gamma) = (vec![0u8; n], vec![0u8; n]);
        beta[0] = 1;
        let step = 2.0 * h;
        let probe = smoothness_probe(&builder, &phi, &beta, &gamma, step)?;

        let a = |x: &[f64], xi: &[f64]| (-x.iter().chain(xi).map(|v| v * v).sum::<f64>()).exp();
        let (id_fd, id_an) = (id.clone(), id.clone());
        let fd_symbol = SymbolFn::on_phase_space(grid, k, move |x, xi, out| {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[0] += step;
            xm[0] -= step;
            let w = (a(&xp, xi) - a(&xm, xi)) / (2.0 * step);
            for (o, e) in out.iter_mut().zip(id_fd.entries()) {
                *o = e * w;
            }
        });
        let analytic_symbol = SymbolFn::on_phase_space(grid, k, move |x, xi, out| {
            let w = -2.0 * x[0] * a(x, xi);
            for (o, e) in out.iter_mut().zip(id_an.entries()) {
                *o = e * w;
            }
        });
        let fd = relative_distance(&probe, &quantize_apply(&fd_symbol, &phi)?)?;
        let analytic = relative_distance(&probe, &quantize_apply(&analytic_symbol, &phi)?)?;
        let coarse = module_norm(&smoothness_probe(&builder, &phi, &beta, &gamma, 2.0 * step)?)?;
        Ok((fd, analytic, (coarse / module_norm(&probe)? - 1.0).abs()))
    })?;
    run.at_most("probe", fd);
    run.record("probe_vs_analytic", analytic);
    run.at_most("step_halving", halving);
    Ok(())
}

fn samples(n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    const BASE: [([f64; 2], [f64; 2]); 5] = [
        ([0.3, -0.2], [0.5, 0.0]),
        ([0.0, 0.4], [-0.3, 0.7]),
        ([-0.5, 0.1], [0.2, -0.6]),
        ([0.2, 0.2], [1.0, 0.4]),
        ([0.0, 0.0], [-0.8, -0.5]),
    ];
    BASE.iter()
        .map(|(z, zeta)| ((0..n).map(|d| z[d % 2]).collect(), (0..n).map(|d| zeta[d % 2]).collect()))
        .collect()
}

fn field_center(n: usize) -> Vec<f64> {
    (0..n).map(|d| if d % 2 == 0 { 0.2 } else { -0.1 }).collect()
}

fn x_only_symbol(grid: GridSpec, k: usize) -> SymbolFn {
    let id = AlgebraElement::identity(k);
    SymbolFn::on_phase_space(grid, k, move |x, _, out| {
        let w = (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp();
        for (o, e) in out.iter_mut().zip(id.entries()) {
            *o = e * w;
        }
    })
}

fn test_functions(run: &Run, grid: GridSpec) -> RunResult<Vec<ModuleFunction>> {
    (0..run.cfg.trial_count)
        .map(|t| Ok(make_test_function(Recipe::GaussianPoly, grid, run.cfg.k, run.cfg.seed.wrapping_add(t as u64))?))
        .collect()
}

fn require_deformed(run: &Run) -> RunResult<DeformationMatrix> {
    let j = run.cfg.deformation();
    if j.is_zero() {
        return Err(RunError::Config(format!("scenario `{}` needs a nonzero J", run.cfg.scenario)));
    }
    Ok(j)
}

pub(super) fn heissmooth(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (n, k) = (run.cfg.n, run.cfg.k);
    let j = require_deformed(run)?;
    let phis = test_functions(run, grid)?;
    let samples = samples(n);

    let dev = run.phase("left_representation", |run| {
        let f = ModuleFunction::gaussian(grid, &field_center(n), 0.8, &run.element(0x46))?;
        Ok(heissmooth_deviation(&OperatorHandle::left_rep(f, j.clone()), &j, &samples, &phis)?)
    })?;
    run.at_most("heissmooth", dev);

    let counter = run.phase("counterexample", |_| {
        let op = OperatorHandle::from_symbol(Arc::new(x_only_symbol(grid, k)));
        Ok(heissmooth_deviation(&op, &j, &samples, &phis[..1])?)
    })?;
    run.at_least("counterexample", counter, "counterexample");
    Ok(())
}

pub(super) fn commutant(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (n, k) = (run.cfg.n, run.cfg.k);
    let j = require_deformed(run)?;
    let phis = test_functions(run, grid)?;
    let g_suite = vec![
        ModuleFunction::gaussian(grid, &axis0(n, 0.3), 0.8, &run.element(0x4731))?,
        ModuleFunction::gaussian(grid, &(0..n).map(|d| [-0.2, 0.4][d % 2]).collect::<Vec<_>>(), 0.7, &run.element(0x4732))?,
    ];

    let (m, recovery) = run.phase("left_symbol", |run| {
        let coeff = run.element(0x46);
        let a = Arc::new(field_symbol(grid, &j, -1.0, field_center(n), 0.8, coeff.clone()));
        let m = commutant_measure(a.clone(), &j, &g_suite, &phis)?;
        let expected = ModuleFunction::gaussian(grid, &field_center(n), 0.8, &coeff)?;
        Ok((m, extract_field(a.as_ref())?.sub(&expected)?.sup_norm() / expected.sup_norm()))
    })?;
    run.at_most("commutation", m.commutator);
    run.at_most("symbol", m.symbol_deviation);
    run.at_most("extraction", m.extraction);
    let tol = run.cfg.tolerance("symbol");
    run.report.push(Metric::at_most("field_recovery", recovery, tol));

    let counter = run.phase("x_only", |_| {
        Ok(commutant_measure(Arc::new(x_only_symbol(grid, k)), &j, &g_suite, &phis[..1])?)
    })?;
    run.at_least("x_only_commutator", counter.commutator, "counterexample");
    run.record("x_only_symbol_deviation", counter.symbol_deviation);

    let xi_only = run.phase("xi_only", |run| {
        let id = AlgebraElement::identity(k);
        let a = Arc::new(SymbolFn::on_phase_space(grid, k, move |_, xi, out| {
            let w = (-0.125 * xi.iter().map(|v| v * v).sum::<f64>()).exp();
            for (o, e) in out.iter_mut().zip(id.entries()) {
                *o = e * w;
            }
        }));
        let g = vec![ModuleFunction::gaussian(grid, &axis0(n, 0.3), 0.8, &run.element(0x4733))?];
        let phi = vec![ModuleFunction::gaussian(grid, &vec![0.0; n], 0.6, &AlgebraElement::identity(k))?];
        Ok(commutant_measure(a, &DeformationMatrix::zero(n), &g, &phi)?)
    })?;
    run.at_least("xi_only_commutator", xi_only.commutator, "counterexample");

    let mut plot = Plot::new("commutant");
    plot.series("commutator", [(0.0, m.commutator), (1.0, counter.commutator), (2.0, xi_only.commutator)]);
    plot.series("symbol_deviation", [(0.0, m.symbol_deviation), (1.0, counter.symbol_deviation), (2.0, xi_only.symbol_deviation)]);
    run.plot(plot);
    Ok(())
}
