use psido_core::algebra::{AlgebraElement, C64};
use psido_core::deformation::{
    approximate_identity, approximate_identity_bump, commutator_apply, deformed_product, left_rep_apply,
    right_rep_apply, DeformationMatrix,
};
use psido_core::oracle::{deformed_product_direct, DirectQuadrature, FieldFn};
use psido_core::quantize::quantize_apply;
use psido_core::sampling::{make_test_function, relative_distance};
use psido_core::{module_norm, DecayClass, GridSpec, Metric, ModuleFunction, Recipe};

use super::{field_symbol, Plot, Run, RunResult};

/// A Gaussian field with a seeded coefficient.
struct Bump {
    center: Vec<f64>,
    sigma: f64,
    coeff: AlgebraElement,
}

impl Bump {
    fn new(run: &Run, label: u64, sigma: f64) -> Self {
        let mut rng = run.rng(label);
        let center = (0..run.cfg.n).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
        Self {
            center,
            sigma,
            coeff: run.element(label),
        }
    }

    fn sampled(&self, grid: GridSpec) -> psido_core::Result<ModuleFunction> {
        ModuleFunction::gaussian(grid, &self.center, self.sigma, &self.coeff)
    }

    fn analytic(&self) -> FieldFn {
        let (center, coeff) = (self.center.clone(), self.coeff.clone());
        let w = 0.5 / (self.sigma * self.sigma);
        FieldFn::new(center.len(), coeff.dim(), move |x, out| {
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum();
            let g = (-w * r2).exp();
            for (o, e) in out.iter_mut().zip(coeff.entries()) {
                *o = e * g;
            }
        })
    }
}

fn pointwise(f: &ModuleFunction, g: &ModuleFunction) -> psido_core::Result<ModuleFunction> {
    let mut values = Vec::with_capacity(f.values().len());
    for i in 0..f.grid().total_points() {
        values.extend_from_slice(f.value(i).mul(&g.value(i)).entries());
    }
    ModuleFunction::new(*f.grid(), f.k(), values, DecayClass::Bounded)
}

/// Grid points near the origin at which the brute-force product is evaluated.
fn oracle_points(grid: GridSpec, count: usize) -> Vec<usize> {
    const OFFSETS: [[isize; 2]; 16] = [
        [0, 0],
        [-2, 3],
        [4, -4],
        [-5, -5],
        [3, 3],
        [-3, 1],
        [6, 0],
        [0, -6],
        [1, 5],
        [-6, 2],
        [5, -1],
        [-1, -3],
        [2, -7],
        [-4, 6],
        [7, 4],
        [-7, -2],
    ];
    let mid = (grid.points / 2) as isize;
    OFFSETS[..count]
        .iter()
        .map(|o| {
            let idx: Vec<usize> = (0..grid.n).map(|d| (mid + o[d % 2]) as usize).collect();
            grid.flat_index(&idx)
        })
        .collect()
}

pub(super) fn product(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let (n, k, seed) = (run.cfg.n, run.cfg.k, run.cfg.seed);
    let j = run.cfg.deformation();

    let pointwise_err = run.phase("undeformed", |_| {
        let f = make_test_function(Recipe::BoundedField, grid, k, seed)?;
        let g = make_test_function(Recipe::GaussianPoly, grid, k, seed.wrapping_add(1))?;
        let p = deformed_product(&f, &g, &DeformationMatrix::zero(n))?;
        let q = pointwise(&f, &g)?;
        Ok(p.sub(&q)?.sup_norm() / q.sup_norm().max(1.0))
    })?;
    run.at_most("pointwise", pointwise_err);

    let (bf, bg) = (Bump::new(run, 0x66, 0.8), Bump::new(run, 0x67, 0.7));
    let (f, g) = (bf.sampled(grid)?, bg.sampled(grid)?);

    let count = if run.opts.oracle { 16 } else { 4 };
    let oracle_errs = run.phase("oracle", |_| {
        let fast = deformed_product(&f, &g, &j)?;
        let scale = fast.sup_norm();
        let (fa, ga) = (bf.analytic(), bg.analytic());
        oracle_points(grid, count)
            .into_iter()
            .map(|i| {
                let direct = deformed_product_direct(&fa, &ga, &j, &grid.point(i), &DirectQuadrature::default())?;
                let err = direct.iter().zip(fast.block(i)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                Ok(err / scale)
            })
            .collect::<RunResult<Vec<f64>>>()
    })?;
    run.at_most("oracle", oracle_errs.iter().copied().fold(0.0, f64::max));

    let assoc = run.phase("associativity", |run| {
        let h = Bump::new(run, 0x68, 0.8).sampled(grid)?;
        let lhs = deformed_product(&deformed_product(&f, &g, &j)?, &h, &j)?;
        let rhs = deformed_product(&f, &deformed_product(&g, &h, &j)?, &j)?;
        let bound = module_norm(&f)? * module_norm(&g)? * module_norm(&h)?;
        Ok(module_norm(&lhs.sub(&rhs)?)? / bound)
    })?;
    run.at_most("associativity", assoc);

    let commutation = run.phase("commutation", |run| {
        let mut worst: f64 = 0.0;
        for t in 0..run.cfg.trial_count {
            let phi = make_test_function(Recipe::GaussianPoly, grid, k, seed.wrapping_add(100 + t as u64))?;
            let c = commutator_apply(&f, &g, &phi, &j)?;
            worst = worst.max(module_norm(&c)? / module_norm(&phi)?);
        }
        Ok(worst)
    })?;
    run.at_most("commutation", commutation);

    let (left, right) = run.phase("symbol_paths", |run| {
        let phi = Bump::new(run, 0x70, 0.8).sampled(grid)?;
        let sym = field_symbol(grid, &j, -1.0, bf.center.clone(), bf.sigma, bf.coeff.clone());
        let left = relative_distance(&left_rep_apply(&f, &phi, &j)?, &quantize_apply(&sym, &phi)?)?;
        // G(x + J xi) acts to the left of phi^ while R_G multiplies on the
        // right, so the second path needs a central coefficient.
        let central = AlgebraElement::scalar(k, C64::new(0.7, -0.4));
        let gc = ModuleFunction::gaussian(grid, &bg.center, bg.sigma, &central)?;
        let sym = field_symbol(grid, &j, 1.0, bg.center.clone(), bg.sigma, central);
        let right = relative_distance(&right_rep_apply(&gc, &phi, &j)?, &quantize_apply(&sym, &phi)?)?;
        Ok((left, right))
    })?;
    run.at_most("symbol_paths", left);
    let tol = run.cfg.tolerance("symbol_paths");
    run.report.push(Metric::at_most("symbol_paths_right", right, tol));

    let identity = run.phase("identity", |_| {
        let id = AlgebraElement::identity(k);
        let one = ModuleFunction::from_fn(grid, k, DecayClass::Bounded, |_, out| out.copy_from_slice(id.entries()))?;
        let l = left_rep_apply(&one, &g, &j)?.sub(&g)?.sup_norm();
        let r = right_rep_apply(&one, &g, &j)?.sub(&g)?.sup_norm();
        Ok(l.max(r) / g.sup_norm())
    })?;
    run.at_most("identity", identity);

    let mut plot = Plot::new("oracle_error");
    plot.series("relative_error", oracle_errs.iter().enumerate().map(|(i, &v)| (i as f64, v)));
    run.plot(plot);
    Ok(())
}

pub(super) fn approx_identity(run: &mut Run) -> RunResult<()> {
    let grid = run.grid();
    let k = run.cfg.k;
    let j = run.cfg.deformation();
    const INDICES: [usize; 3] = [1, 2, 4];

    let mass = run.phase("bump_mass", |_| {
        let id = AlgebraElement::identity(k);
        let mut worst: f64 = 0.0;
        for k_index in INDICES {
            let bump = approximate_identity_bump(k_index, &grid, k)?;
            let vol = bump.grid().cell_volume();
            let mut sum = vec![C64::new(0.0, 0.0); k * k];
            for i in 0..bump.grid().total_points() {
                for (s, v) in sum.iter_mut().zip(bump.block(i)) {
                    *s += v * vol;
                }
            }
            for (s, e) in sum.iter().zip(id.entries()) {
                worst = worst.max((s - e).norm());
            }
        }
        Ok(worst)
    })?;
    run.at_most("bump_mass", mass);

    let errors = run.phase("convergence", |run| {
        let mut rng = run.rng(0x70);
        let center: Vec<f64> = (0..grid.n).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
        let phi = ModuleFunction::gaussian(grid, &center, 2.0, &run.element(0x70))?;
        let norm = module_norm(&phi)?;
        INDICES
            .iter()
            .map(|&k_index| {
                let e = approximate_identity(k_index, &grid, k)?;
                Ok(module_norm(&deformed_product(&e, &phi, &j)?.sub(&phi)?)? / norm)
            })
            .collect::<RunResult<Vec<f64>>>()
    })?;
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    run.report.push(Metric::at_least("strictly_decreasing", decreasing as u8 as f64, 1.0));
    run.at_most("final_error", *errors.last().expect("three indices"));
    for (k_index, e) in INDICES.iter().zip(&errors) {
        run.record(&format!("error_k{k_index}"), *e);
    }

    let mut plot = Plot::new("approx_identity");
    plot.series("relative_error", INDICES.iter().zip(&errors).map(|(&i, &e)| (i as f64, e)));
    run.plot(plot);
    Ok(())
}
