use std::f64::consts::PI;

use psido_core::algebra::AlgebraElement;
use psido_core::oracle::quantize_direct;
use psido_core::quantize::{
    adjoint_symbol, adjoint_symbol_traced, cv_ratios, operator_norm_estimate, operb_reconstruct, operb_transform,
    pi_seminorm, quantize_apply, random_broad_symbol, random_smooth_symbol, trial_function, windowed_energy_unbounded,
    windowed_transform, RegularizationSchedule,
};
use psido_core::{cstar_norm, module_inner, module_norm, Error, GridSpec, Metric, SampledSymbol, Symbol};

use super::{real, Plot, Run, RunResult};

fn symbol_seed(run: &Run, index: usize) -> u64 {
    run.rng(0x73796d).split(index as u64).next_u64()
}

pub(super) fn cv_bound(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (k, seed, count, iterations) = (run.cfg.k, run.cfg.seed, run.cfg.trial_count, run.cfg.iterations);
    let identity = run.cfg.symbol.as_deref() == Some("identity");

    let mut norm_ratios = Vec::with_capacity(count);
    let mut trial_ratios = Vec::with_capacity(count);
    let (mut scaling, mut converged) = (0.0f64, 0usize);
    let mut first_trace = Vec::new();
    run.phase("symbols", |run| {
        for s in 0..count {
            let a = if identity {
                SampledSymbol::constant(grid, grid.dual(), &AlgebraElement::identity(k))?
            } else {
                random_smooth_symbol(grid, k, symbol_seed(run, s)).to_sampled()?
            };
            let pi = pi_seminorm(&a)?;
            let est = operator_norm_estimate(&a, iterations, seed)?;
            let ratio = est.estimate / pi;
            let a5 = a.scale(real(5.0));
            let ratio5 = operator_norm_estimate(&a5, iterations, seed)?.estimate / pi_seminorm(&a5)?;
            scaling = scaling.max((ratio5 - ratio).abs() / ratio);
            converged += est.converged as usize;
            if s == 0 {
                first_trace = est.trace.clone();
            }
            norm_ratios.push(ratio);
            trial_ratios.push(cv_ratios(&a, 4, seed)?.into_iter().fold(0.0, f64::max));
        }
        Ok(())
    })?;

    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let l = run.cfg.tolerance("l_config");
    run.report.push(Metric::at_most("max_norm_ratio", max(&norm_ratios), l));
    run.report.push(Metric::at_most("max_trial_ratio", max(&trial_ratios), l));
    run.at_most("scaling_invariance", scaling);
    run.record("converged_fraction", converged as f64 / count as f64);
    if identity {
        run.at_most("identity_ratio", (max(&norm_ratios) - 1.0).abs());
    }

    let mut plot = Plot::new("ratios");
    plot.series("norm_ratio", norm_ratios.iter().enumerate().map(|(i, &v)| (i as f64, v)));
    plot.series("trial_ratio", trial_ratios.iter().enumerate().map(|(i, &v)| (i as f64, v)));
    run.plot(plot);
    let mut plot = Plot::new("power_iteration");
    plot.series("estimate", first_trace.iter().enumerate().map(|(i, &v)| (i as f64 + 1.0, v)));
    run.plot(plot);
    Ok(())
}

/// Tangent-rule nodes per axis for the windowed energy.
fn tangent_nodes(n: usize) -> usize {
    match n {
        1 => 1024,
        2 => 256,
        _ => 64,
    }
}

pub(super) fn windowed(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (k, seed, trials) = (run.cfg.k, run.cfg.seed, run.cfg.trial_count);
    let pi_n = PI.powi(grid.n as i32);
    let nodes = tangent_nodes(grid.n);

    let (errors, bound) = run.phase("energy", |_| {
        let mut errors = Vec::with_capacity(trials);
        let mut bound = None;
        for t in 0..trials {
            let phi = trial_function(grid, k, seed, t)?;
            let rhs = module_inner(&phi, &phi)?.scale(real(pi_n));
            let lhs = windowed_energy_unbounded(&phi, nodes)?;
            errors.push(cstar_norm(&lhs.sub(&rhs))? / cstar_norm(&rhs)?);
            // the sampled transform is |grid|^2 blocks; only affordable in 1d
            if t == 0 && grid.total_points() <= 1024 {
                let g = windowed_transform(&phi)?;
                let frob = |v: &[psido_core::C64], vol: f64| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * vol).sqrt();
                let gnorm = frob(g.values(), grid.cell_volume() * grid.dual().cell_volume());
                bound = Some(gnorm / (pi_n.sqrt() * frob(phi.values(), grid.cell_volume())));
            }
        }
        Ok((errors, bound))
    })?;
    run.at_most("parseval_identity", errors.iter().copied().fold(0.0, f64::max));
    run.record("tangent_nodes", nodes as f64);
    match bound {
        Some(b) => run.report.push(Metric::at_most("sqrt_pi_bound_ratio", b, 1.0)),
        None => run.report.note("sampled windowed transform skipped: grid too large"),
    }

    let mut plot = Plot::new("windowed_energy");
    plot.series("relative_error", errors.iter().enumerate().map(|(i, &v)| (i as f64, v)));
    run.plot(plot);
    Ok(())
}

pub(super) fn adjoint(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (k, seed, trials) = (run.cfg.k, run.cfg.seed, run.cfg.trial_count);
    let schedule = RegularizationSchedule {
        epsilons: run.cfg.epsilon_schedule.clone(),
        tolerance: run.cfg.tolerance("extrapolation"),
    };
    let a = run.phase("sample", |run| {
        let seed = symbol_seed(run, 0);
        let a = match run.cfg.symbol.as_deref() {
            Some("random") => random_smooth_symbol(grid, k, seed),
            _ => random_broad_symbol(grid, k, seed),
        };
        Ok(a.to_sampled()?)
    })?;

    let traced = run.phase("extrapolate", |_| Ok(adjoint_symbol_traced(&a, &schedule)));
    let (p, trace) = match traced? {
        Ok(v) => v,
        Err(Error::Convergence { message, trace }) => {
            run.report.push(Metric::failed("extrapolation"));
            run.report.note(format!("adjoint symbol: {message}"));
            for s in &trace {
                run.report.note(format!("eps = {}: change {:.6e}", s.epsilon, s.change));
            }
            run.convergence_failure = true;
            let mut plot = Plot::new("epsilon_trace");
            plot.series("change", trace.iter().map(|s| (s.epsilon, s.change)));
            run.plot(plot);
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    run.at_most("extrapolation", trace.last().map_or(0.0, |s| s.change));

    let deviations = run.phase("pairs", |run| {
        let psi_seed = run.rng(0x707369).next_u64();
        (0..trials)
            .map(|t| {
                let phi = trial_function(grid, k, seed, t)?;
                let psi = trial_function(grid, k, psi_seed, t + 1)?;
                let lhs = module_inner(&quantize_apply(&a, &phi)?, &psi)?;
                let rhs = module_inner(&phi, &quantize_apply(&p, &psi)?)?;
                Ok(cstar_norm(&lhs.sub(&rhs))? / (module_norm(&phi)? * module_norm(&psi)?))
            })
            .collect::<RunResult<Vec<f64>>>()
    })?;
    run.at_most("adjoint_identity", deviations.iter().copied().fold(0.0, f64::max));

    let constant = run.phase("constant", |run| {
        let c = run.element(0x636f6e);
        let sym = SampledSymbol::constant(grid, grid.dual(), &c)?;
        let expected = SampledSymbol::constant(grid, grid.dual(), &c.adjoint())?;
        Ok(adjoint_symbol(&sym, &schedule)?.sub(&expected)?.sup_norm() / cstar_norm(&c)?)
    })?;
    run.at_most("constant_symbol", constant);

    if run.opts.oracle {
        let err = run.phase("direct_quadrature", |_| {
            let phi = trial_function(grid, k, seed, 0)?;
            direct_deviation(&a, &phi, grid)
        })?;
        run.at_most("direct_quadrature", err);
    }

    let mut plot = Plot::new("epsilon_trace");
    plot.series("change", trace.iter().map(|s| (s.epsilon, s.change)));
    run.plot(plot);
    let mut plot = Plot::new("adjoint_deviation");
    plot.series("deviation", deviations.iter().enumerate().map(|(i, &v)| (i as f64, v)));
    run.plot(plot);
    Ok(())
}

/// Sup difference between the fast and the double-sum quantization at a
/// few points, relative to the sup of the fast result.
fn direct_deviation(a: &dyn Symbol, phi: &psido_core::ModuleFunction, grid: GridSpec) -> RunResult<f64> {
    let fast = quantize_apply(a, phi)?;
    let total = grid.total_points();
    let points: Vec<usize> = (0..8).map(|i| (2 * i + 1) * total / 16).collect();
    let direct = quantize_direct(a, phi, &points)?;
    let err = points
        .iter()
        .zip(&direct)
        .flat_map(|(&i, d)| d.iter().zip(fast.block(i)).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max);
    Ok(err / fast.sup_norm())
}

pub(super) fn operb(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let k = run.cfg.k;
    let identity = AlgebraElement::identity(k);
    let a = SampledSymbol::from_fn(grid, grid, k, move |x, xi, out| {
        let r2: f64 = x.iter().chain(xi).map(|v| v * v).sum();
        let g = (-r2).exp();
        for (o, e) in out.iter_mut().zip(identity.entries()) {
            *o = e * g;
        }
    })?;
    if a.decay() != psido_core::DecayClass::Schwartz {
        run.report.note("the Gaussian symbol does not meet the decay test on this grid");
    }

    let rec = run.phase("roundtrip", |_| Ok(operb_reconstruct(&operb_transform(&a)?)?))?;
    let back = &rec.symbol;
    let lo = (grid.points as f64 * 0.2).round() as usize;
    let hi = grid.points - lo;
    let interior = |flat: usize| grid.multi_index(flat).iter().all(|&c| (lo..hi).contains(&c));
    let nxi = grid.total_points();
    let mut err: f64 = 0.0;
    for i in (0..grid.total_points()).filter(|&i| interior(i)) {
        for m in (0..nxi).filter(|&m| interior(m)) {
            for (x, y) in back.block(i, m).iter().zip(a.block(i, m)) {
                err = err.max((x - y).norm());
            }
        }
    }
    run.at_most("roundtrip", err / a.sup_norm());
    run.record("kernel_exceeds_box", rec.kernel_exceeds_box as u8 as f64);
    run.record("truncated", rec.truncated as u8 as f64);

    let constant = run.phase("constant", |run| {
        let c = run.element(0x636f6e);
        let b = SampledSymbol::constant(grid, grid, &c)?;
        Ok(operb_reconstruct(&b)?.symbol.sub(&b)?.sup_norm() / cstar_norm(&c)?)
    })?;
    run.at_most("constant", constant);

    // cross-section through xi = 0
    let mid = grid.flat_index(&vec![grid.points / 2; grid.n]);
    let row = |s: &SampledSymbol| -> Vec<(f64, f64)> {
        (0..grid.points)
            .map(|c| {
                let mut idx = vec![grid.points / 2; grid.n];
                idx[0] = c;
                (grid.coordinate(c), s.block(grid.flat_index(&idx), mid)[0].re)
            })
            .collect()
    };
    let mut plot = Plot::new("operb_section");
    plot.series("original", row(&a));
    plot.series("reconstructed", row(back));
    run.plot(plot);
    Ok(())
}
