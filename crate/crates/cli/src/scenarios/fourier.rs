use psido_core::fourier::{fourier, from_spectrum};
use psido_core::quantize::trial_function;
use psido_core::{cstar_norm, module_inner, module_norm, ModuleFunction};

use super::{Plot, Run, RunResult};

pub(super) fn unitarity(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (k, seed, trials) = (run.cfg.k, run.cfg.seed, run.cfg.trial_count);

    let (inner, norms, roundtrip, linearity) = run.phase("pairs", |run| {
        let coeff = run.element(0x6c696e);
        let (mut inner, mut norms, mut roundtrip, mut linearity) = (Vec::new(), 0.0f64, 0.0f64, 0.0f64);
        for t in 0..trials {
            let f = trial_function(grid, k, seed, 2 * t)?;
            let g = trial_function(grid, k, seed, 2 * t + 1)?;
            let (fh, gh) = (fourier(&f)?, fourier(&g)?);
            let (nf, ng) = (module_norm(&f)?, module_norm(&g)?);
            let d = module_inner(&f, &g)?.sub(&module_inner(&fh, &gh)?);
            inner.push(cstar_norm(&d)? / (nf * ng + 1.0));
            norms = norms.max((module_norm(&fh)? - nf).abs() / nf);
            let back = from_spectrum(&fh);
            roundtrip = roundtrip.max(back.sub(&f)?.sup_norm() / f.sup_norm());
            let lhs = fourier(&f.mul_right(&coeff))?;
            let rhs = fh.mul_right(&coeff);
            linearity = linearity.max(lhs.sub(&rhs)?.sup_norm() / rhs.sup_norm().max(f64::MIN_POSITIVE));
        }
        Ok((inner, norms, roundtrip, linearity))
    })?;
    let worst = inner.iter().copied().fold(0.0, f64::max);
    run.at_most("inner_deviation", worst);
    run.at_most("norm_deviation", norms);
    run.at_most("roundtrip", roundtrip);
    run.at_most("a_linearity", linearity);

    let fixed = run.phase("gaussian", |run| {
        let coeff = run.element(0x676175);
        let center = vec![0.0; grid.n];
        let f = ModuleFunction::gaussian(grid, &center, 1.0, &coeff)?;
        let expected = ModuleFunction::gaussian(grid.dual(), &center, 1.0, &coeff)?;
        Ok(fourier(&f)?.sub(&expected)?.sup_norm() / expected.sup_norm())
    })?;
    run.at_most("gaussian_fixed_point", fixed);

    let mut plot = Plot::new("inner_deviation");
    plot.series("inner_deviation", inner.iter().enumerate().map(|(t, &v)| (t as f64, v)));
    run.plot(plot);
    Ok(())
}
