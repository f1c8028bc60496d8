//! Windowed transform `g(x, xi) = F(h_x phi)(xi)` with the window
//! `h_x(y) = prod_j (i - (y_j - x_j))^{-1}`.

use rayon::prelude::*;

use crate::algebra::{block_adjoint_mul_acc, AlgebraElement, C64};
use crate::error::{Error, Result};
use crate::fourier::spectrum;
use crate::sampling::{pairwise_sum, DecayClass, GridSpec, ModuleFunction};
use crate::symbol::SampledSymbol;

fn windowed_slice(phi: &ModuleFunction, x: &[f64]) -> ModuleFunction {
    let grid = *phi.grid();
    let k2 = phi.k() * phi.k();
    let mut values = phi.values().to_vec();
    let mut y = vec![0.0; grid.n];
    for (j, block) in values.chunks_exact_mut(k2).enumerate() {
        grid.point_into(j, &mut y);
        let mut w = C64::new(1.0, 0.0);
        for (yd, xd) in y.iter().zip(x) {
            w /= C64::new(-(yd - xd), 1.0);
        }
        for z in block {
            *z *= w;
        }
    }
    let windowed = ModuleFunction::new(grid, phi.k(), values, DecayClass::Bounded).expect("shape preserved");
    spectrum(&windowed)
}

/// `g` sampled on `phi`'s grid times its dual, one transform per `x`.
pub fn windowed_transform(phi: &ModuleFunction) -> Result<SampledSymbol> {
    phi.require_schwartz("windowed_transform")?;
    let grid = *phi.grid();
    let rows: Vec<Vec<C64>> = (0..grid.total_points())
        .into_par_iter()
        .map(|i| windowed_slice(phi, &grid.point(i)).into_values())
        .collect();
    SampledSymbol::new(grid, grid.dual(), phi.k(), rows.concat())
}

/// `int int g(x, xi)^* g(x, xi) dx dxi` with `x` running over `x_grid`,
/// which may be much wider than `phi`'s own box. Each `x` slice is
/// transformed and summed on the dual grid; nothing is stored.
pub fn windowed_energy(phi: &ModuleFunction, x_grid: &GridSpec) -> Result<AlgebraElement> {
    if x_grid.n != phi.grid().n {
        return Err(Error::Shape("window grid dimension differs from the function's".into()));
    }
    let volume = x_grid.cell_volume();
    energy_over(phi, x_grid.total_points(), &|i, x| {
        x_grid.point_into(i, x);
        volume
    })
}

/// Midpoint nodes `s_j = -pi/2 + (j + 1/2) pi / m` mapped by `x = tan s`, with
/// weights `(pi / m) sec^2 s_j`. Integrands decaying like `|x|^-2` become
/// smooth periodic functions of `s`, so the rule converges quickly over all
/// of `R`.
pub fn tangent_rule(m: usize) -> Vec<(f64, f64)> {
    let ds = std::f64::consts::PI / m as f64;
    (0..m)
        .map(|j| {
            let s = -std::f64::consts::FRAC_PI_2 + (j as f64 + 0.5) * ds;
            let c = s.cos();
            (s.tan(), ds / (c * c))
        })
        .collect()
}

/// As [`windowed_energy`], with `x` integrated over all of `R^n` by the
/// tensor-product [`tangent_rule`] with `m` nodes per axis.
pub fn windowed_energy_unbounded(phi: &ModuleFunction, m: usize) -> Result<AlgebraElement> {
    if m == 0 {
        return Err(Error::InvalidInput("the tangent rule needs at least one node".into()));
    }
    let rule = tangent_rule(m);
    let n = phi.grid().n;
    energy_over(phi, m.pow(n as u32), &|i, x| {
        let mut rest = i;
        let mut w = 1.0;
        for d in (0..n).rev() {
            let (xd, wd) = rule[rest % m];
            rest /= m;
            x[d] = xd;
            w *= wd;
        }
        w
    })
}

/// `sum_i w_i int g(x_i, xi)^* g(x_i, xi) dxi`, where `node(i, x)` writes
/// `x_i` and returns `w_i`.
fn energy_over(phi: &ModuleFunction, count: usize, node: &(dyn Fn(usize, &mut [f64]) -> f64 + Sync)) -> Result<AlgebraElement> {
    phi.require_schwartz("windowed_energy")?;
    let k = phi.k();
    let k2 = k * k;
    let n = phi.grid().n;
    let dual_volume = phi.grid().dual().cell_volume();
    let slices: Vec<Vec<C64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut x = vec![0.0; n];
            let w = node(i, &mut x);
            let g = windowed_slice(phi, &x);
            let sum = pairwise_sum(g.grid().total_points(), k2, &|m, out: &mut [C64]| {
                block_adjoint_mul_acc(k, g.block(m), g.block(m), out)
            });
            sum.into_iter().map(|z| z * (dual_volume * w)).collect()
        })
        .collect();
    let total = pairwise_sum(slices.len(), k2, &|i, out: &mut [C64]| {
        for (o, z) in out.iter_mut().zip(&slices[i]) {
            *o += z;
        }
    });
    AlgebraElement::from_entries(k, total)
}
