//! Quantization `a -> a(x, D)` and the checks built on it.
//!
//! `O(a) phi(x) = (2 pi)^{-n/2} int e^{i x.xi} a(x, xi) phi^(xi) dxi`, with the
//! integral replaced by the rectangle rule on the dual grid. Since the
//! symbol's frequency grid is exactly the dual grid, the phase
//! `e^{i x_j xi_m}` is a root of unity and is tabulated exactly.

mod adjoint;
mod diff;
mod operb;
mod windowed;

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::algebra::{block_adjoint_mul_acc_scaled, block_mul_acc_scaled, C64, ZERO};
use crate::error::{Error, Result};
use crate::fourier::{from_spectrum, spectrum};
use crate::report::{Metric, VerificationReport};
use crate::rng::CounterRng;
use crate::sampling::{make_test_function, module_norm, DecayClass, GridSpec, ModuleFunction, Recipe};
use crate::symbol::{SampledSymbol, Symbol, SymbolFn};

pub use adjoint::{adjoint_symbol, adjoint_symbol_traced, RegularizationSchedule};
pub use diff::{derivative, partial_symbol};
pub use operb::{cutoff_family, operb_reconstruct, operb_transform, Reconstruction};
pub use windowed::{tangent_rule, windowed_energy, windowed_energy_unbounded, windowed_transform};

/// The multi-indices `beta, gamma <= alpha = (1, ..., 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiIndexBox {
    pub n: usize,
}

impl MultiIndexBox {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// All `4^n` pairs `(beta, gamma)` with 0/1 components.
    pub fn pairs(&self) -> Vec<(Vec<u8>, Vec<u8>)> {
        let n = self.n;
        (0..1usize << (2 * n))
            .map(|bits| {
                let beta = (0..n).map(|d| ((bits >> d) & 1) as u8).collect();
                let gamma = (0..n).map(|d| ((bits >> (n + d)) & 1) as u8).collect();
                (beta, gamma)
            })
            .collect()
    }
}

/// Calderón–Vaillancourt threshold `1.5 (2 pi)^n` used by the bound checks.
pub fn l_config(n: usize) -> f64 {
    1.5 * (2.0 * PI).powi(n as i32)
}

/// `e^{2 pi i ((j - N/2)(m - N/2) mod N) / N}` for all `j, m`.
fn phase_table(points: usize) -> Vec<C64> {
    let half = (points / 2) as i64;
    let n = points as i64;
    let roots: Vec<C64> = (0..points).map(|r| C64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)).collect();
    let mut table = vec![ZERO; points * points];
    for j in 0..n {
        for m in 0..n {
            table[(j * n + m) as usize] = roots[((j - half) * (m - half)).rem_euclid(n) as usize];
        }
    }
    table
}

/// Fills `out[m] = e^{i x_j . xi_m}` for the x multi-index `j`.
fn phase_row(table: &[C64], points: usize, j: &[usize], out: &mut [C64]) {
    let mut len = 1;
    out[0] = C64::new(1.0, 0.0);
    for &jd in j {
        let row = &table[jd * points..(jd + 1) * points];
        for p in (0..len).rev() {
            let base = out[p];
            for (m, &t) in row.iter().enumerate() {
                out[p * points + m] = base * t;
            }
        }
        len *= points;
    }
}

fn check_symbol_grids(a: &dyn Symbol, phi: &ModuleFunction) -> Result<()> {
    let gx = a.grid_x();
    if !gx.approx_eq(phi.grid()) {
        return Err(Error::Shape("symbol and function live on different grids".into()));
    }
    if !a.grid_xi().approx_eq(&gx.dual()) {
        return Err(Error::Shape("symbol frequency grid is not the dual grid".into()));
    }
    if a.k() != phi.k() {
        return Err(Error::Shape(format!("algebra dimension mismatch: {} vs {}", a.k(), phi.k())));
    }
    Ok(())
}

/// `O(a) phi` for a Schwartz-class `phi`. The result is classified by the
/// boundary decay test.
pub fn quantize_apply(a: &dyn Symbol, phi: &ModuleFunction) -> Result<ModuleFunction> {
    check_symbol_grids(a, phi)?;
    phi.require_schwartz("quantize_apply")?;
    let out = apply_unchecked(a, phi);
    ModuleFunction::classified(*out.grid(), out.k(), out.into_values())
}

/// `O(a) phi` without grid or decay checks on `phi`.
pub(crate) fn apply_unchecked(a: &dyn Symbol, phi: &ModuleFunction) -> ModuleFunction {
    let grid = *phi.grid();
    let k = phi.k();
    let k2 = k * k;
    let n = grid.n;
    let points = grid.points;
    let nxi = grid.total_points();
    let scale = grid.dual().cell_volume() / (2.0 * PI).powf(n as f64 / 2.0);
    let spec = spectrum(phi).scale(C64::new(scale, 0.0));
    let table = phase_table(points);
    let mut out = vec![ZERO; nxi * k2];
    out.par_chunks_mut(k2).enumerate().for_each_init(
        || (vec![ZERO; nxi * k2], vec![ZERO; nxi]),
        |(row, phase), (i, dst)| {
            a.fill_row(i, row);
            phase_row(&table, points, &grid.multi_index(i), phase);
            let mut acc = [ZERO; 64];
            for ((&e, sym), s) in phase.iter().zip(row.chunks_exact(k2)).zip(spec.values().chunks_exact(k2)) {
                block_mul_acc_scaled(k, e, sym, s, &mut acc[..k2]);
            }
            dst.copy_from_slice(&acc[..k2]);
        },
    );
    ModuleFunction::unchecked(grid, k, out, DecayClass::Bounded).expect("shape preserved")
}

const ADJOINT_CHUNKS: usize = 16;

/// The exact adjoint of the discretized `O(a)` for the rectangle-rule inner
/// products: `(T* g)^(xi_m) = (2 pi)^{-n/2} h^n sum_j e^{-i x_j xi_m} a(x_j, xi_m)^* g(x_j)`.
pub(crate) fn adjoint_apply_unchecked(a: &dyn Symbol, g: &ModuleFunction) -> ModuleFunction {
    let grid = *g.grid();
    let k = g.k();
    let k2 = k * k;
    let points = grid.points;
    let nxi = grid.total_points();
    let scale = grid.cell_volume() / (2.0 * PI).powf(grid.n as f64 / 2.0);
    let table = phase_table(points);
    // Fixed chunks of x rows, summed in order, so the result does not
    // depend on the thread count.
    let nx = grid.total_points();
    let per = nx.div_ceil(ADJOINT_CHUNKS);
    let partials: Vec<Vec<C64>> = (0..nx.div_ceil(per))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![ZERO; nxi * k2];
            let mut row = vec![ZERO; nxi * k2];
            let mut phase = vec![ZERO; nxi];
            for j in c * per..((c + 1) * per).min(nx) {
                a.fill_row(j, &mut row);
                phase_row(&table, points, &grid.multi_index(j), &mut phase);
                let gj = g.block(j);
                for ((dst, sym), p) in acc.chunks_exact_mut(k2).zip(row.chunks_exact(k2)).zip(&phase) {
                    block_adjoint_mul_acc_scaled(k, p.conj() * scale, sym, gj, dst);
                }
            }
            acc
        })
        .collect();
    let mut acc = vec![ZERO; nxi * k2];
    for part in &partials {
        for (a, b) in acc.iter_mut().zip(part) {
            *a += b;
        }
    }
    let spec = ModuleFunction::unchecked(grid.dual(), k, acc, DecayClass::Bounded).expect("shape preserved");
    from_spectrum(&spec)
}

/// `pi(a) = max_{beta, gamma <= 1} sup ||d_x^beta d_xi^gamma a||` with centered
/// differences of one grid step.
pub fn pi_seminorm(a: &SampledSymbol) -> Result<f64> {
    let gx = a.grid_x();
    let gxi = a.grid_xi();
    if gx.points < 8 || gxi.points < 8 {
        return Err(Error::Resolution(format!(
            "finite differences need at least 8 points per axis, got {} and {}",
            gx.points, gxi.points
        )));
    }
    let mut best: f64 = 0.0;
    for (beta, gamma) in MultiIndexBox::new(gx.n).pairs() {
        let d = partial_symbol(a, &beta, &gamma)?;
        best = best.max(d.sup_norm());
    }
    Ok(best)
}

const SCHWARTZ_RECIPES: [Recipe; 3] = [Recipe::GaussianPoly, Recipe::ModulatedGaussian, Recipe::Bump];

/// Trial functions shared by the randomized checks: recipes cycle through
/// the Schwartz ones, seeds are split per trial.
pub fn trial_function(grid: GridSpec, k: usize, seed: u64, trial: usize) -> Result<ModuleFunction> {
    let recipe = SCHWARTZ_RECIPES[trial % SCHWARTZ_RECIPES.len()];
    let trial_seed = CounterRng::new(seed).split(trial as u64).next_u64();
    make_test_function(recipe, grid, k, trial_seed)
}

/// Ratios `||O(a) phi||_2 / (pi(a) ||phi||_2)` over seeded trial functions.
pub fn cv_ratios(a: &SampledSymbol, trial_count: usize, seed: u64) -> Result<Vec<f64>> {
    let pi = pi_seminorm(a)?;
    if !(pi > 0.0) {
        return Err(Error::Precondition("pi(a) must be positive".into()));
    }
    (0..trial_count)
        .map(|t| {
            let phi = trial_function(a.grid_x(), a.k(), seed, t)?;
            let out = quantize_apply(a, &phi)?;
            Ok(module_norm(&out)? / (pi * module_norm(&phi)?))
        })
        .collect()
}

/// Checks `||O(a) phi||_2 <= l pi(a) ||phi||_2` on `trial_count` seeded
/// functions with `l = l_config(n)`.
pub fn cv_bound_check(a: &SampledSymbol, trial_count: usize, seed: u64) -> Result<VerificationReport> {
    let ratios = cv_ratios(a, trial_count, seed)?;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let mut report = VerificationReport::new("cv-bound");
    report.push(Metric::at_most("max_ratio", max, l_config(a.grid_x().n)));
    report.push(Metric::record("pi_seminorm", pi_seminorm(a)?));
    report.push(Metric::record("trials", ratios.len() as f64));
    Ok(report)
}

/// Outcome of [`operator_norm_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub estimate: f64,
    /// Estimate after each iteration; nondecreasing.
    pub trace: Vec<f64>,
    pub converged: bool,
}

fn frobenius_l2(f: &ModuleFunction) -> f64 {
    let s: f64 = f.values().iter().map(|z| z.norm_sqr()).sum();
    (s * f.grid().cell_volume()).sqrt()
}

/// Largest singular value of the discretized `O(a)` by power iteration on
/// `T^* T`, acting on `k x k`-valued samples (each column is an independent
/// `C^k`-valued vector). Stops early once the relative change drops below
/// `1e-12`.
pub fn operator_norm_estimate(a: &dyn Symbol, iterations: usize, seed: u64) -> Result<NormEstimate> {
    let grid = a.grid_x();
    if !a.grid_xi().approx_eq(&grid.dual()) {
        return Err(Error::Shape("symbol frequency grid is not the dual grid".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidInput("iterations must be positive".into()));
    }
    let k = a.k();
    let mut rng = CounterRng::new(seed).split(0x6e6f726d);
    let values = (0..grid.total_points() * k * k)
        .map(|_| C64::new(rng.normal(), rng.normal()))
        .collect();
    let mut v = ModuleFunction::unchecked(grid, k, values, DecayClass::Bounded)?;
    v = v.scale(C64::new(1.0 / frobenius_l2(&v), 0.0));
    let mut trace = Vec::with_capacity(iterations);
    let mut converged = false;
    for _ in 0..iterations {
        let w = adjoint_apply_unchecked(a, &apply_unchecked(a, &v));
        let norm = frobenius_l2(&w);
        let est = norm.sqrt();
        let prev = trace.last().copied();
        trace.push(est);
        if norm == 0.0 {
            converged = true;
            break;
        }
        v = w.scale(C64::new(1.0 / norm, 0.0));
        if let Some(p) = prev {
            if (est - p).abs() <= 1e-12 * est {
                converged = true;
                break;
            }
        }
    }
    let estimate = trace.iter().copied().fold(0.0, f64::max);
    Ok(NormEstimate {
        estimate,
        trace,
        converged,
    })
}

/// A reproducible family of smooth bounded symbols: a constant plus three
/// Gaussian bumps in phase space with random matrix coefficients, some
/// modulated.
pub fn random_smooth_symbol(grid: GridSpec, k: usize, seed: u64) -> SymbolFn {
    bump_symbol(grid, k, CounterRng::new(seed).split(0x73796d62), 3, (0.8, 1.6), 1.0)
}

/// Like [`random_smooth_symbol`] with two wide, unmodulated bumps
/// (widths in `[1.5, 2.5]`). Its damped adjoint integrals extrapolate to
/// `eps = 0` within `1e-4` on the default schedule.
pub fn random_broad_symbol(grid: GridSpec, k: usize, seed: u64) -> SymbolFn {
    bump_symbol(grid, k, CounterRng::new(seed).split(0x62726f64), 2, (1.5, 2.5), 0.0)
}

fn bump_symbol(grid: GridSpec, k: usize, mut rng: CounterRng, count: usize, width: (f64, f64), max_freq: f64) -> SymbolFn {
    let n = grid.n;
    let lx = grid.half_width;
    let constant = crate::sampling::random_element(&mut rng, k).entries().to_vec();
    let bumps: Vec<_> = (0..count)
        .map(|_| {
            let cx: Vec<f64> = (0..n).map(|_| rng.uniform_in(-lx / 4.0, lx / 4.0)).collect();
            let cxi: Vec<f64> = (0..n).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
            let sx = rng.uniform_in(width.0, width.1);
            let sxi = rng.uniform_in(width.0, width.1);
            let freq = rng.uniform_in(-max_freq, max_freq);
            let coeff = crate::sampling::random_element(&mut rng, k).entries().to_vec();
            (cx, cxi, sx, sxi, freq, coeff)
        })
        .collect();
    SymbolFn::on_phase_space(grid, k, move |x, xi, out| {
        out.copy_from_slice(&constant);
        for (cx, cxi, sx, sxi, freq, coeff) in &bumps {
            let mut r = 0.0;
            let mut t = 0.0;
            for d in 0..x.len() {
                r += ((x[d] - cx[d]) / sx).powi(2) + ((xi[d] - cxi[d]) / sxi).powi(2);
                t += x[d];
            }
            let g = C64::from_polar((-0.5 * r).exp(), freq * t);
            for (o, c) in out.iter_mut().zip(coeff) {
                *o += c * g;
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::sampling::relative_distance;

    fn grid() -> GridSpec {
        GridSpec::new(1, 10.0, 128).unwrap()
    }

    #[test]
    fn multi_index_box_has_four_to_the_n_pairs() {
        for n in 1..=3 {
            let pairs = MultiIndexBox::new(n).pairs();
            assert_eq!(pairs.len(), 4usize.pow(n as u32));
            assert!(pairs.iter().all(|(b, g)| b.iter().chain(g).all(|&c| c <= 1)));
        }
    }

    #[test]
    fn identity_symbol_is_identity() {
        let g = grid();
        let a = SampledSymbol::constant(g, g.dual(), &AlgebraElement::identity(2)).unwrap();
        let phi = make_test_function(Recipe::GaussianPoly, g, 2, 3).unwrap();
        let out = quantize_apply(&a, &phi).unwrap();
        assert!(relative_distance(&out, &phi).unwrap() < 1e-12);
    }

    #[test]
    fn adjoint_apply_is_the_discrete_adjoint() {
        let g = grid();
        let a = random_smooth_symbol(g, 2, 5).to_sampled().unwrap();
        let f = make_test_function(Recipe::ModulatedGaussian, g, 2, 1).unwrap();
        let h = make_test_function(Recipe::GaussianPoly, g, 2, 2).unwrap();
        let lhs = crate::sampling::module_inner(&apply_unchecked(&a, &f), &h).unwrap();
        let rhs = crate::sampling::module_inner(&f, &adjoint_apply_unchecked(&a, &h)).unwrap();
        let d = crate::algebra::cstar_norm(&lhs.sub(&rhs)).unwrap();
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = grid();
        let other = GridSpec::new(1, 12.0, 128).unwrap();
        let a = SampledSymbol::constant(other, other.dual(), &AlgebraElement::identity(1)).unwrap();
        let phi = make_test_function(Recipe::GaussianPoly, g, 1, 0).unwrap();
        assert!(matches!(quantize_apply(&a, &phi), Err(Error::Shape(_))));
        let b = SampledSymbol::constant(g, g, &AlgebraElement::identity(1)).unwrap();
        assert!(matches!(quantize_apply(&b, &phi), Err(Error::Shape(_))));
    }

    #[test]
    fn power_iteration_trace_is_nondecreasing() {
        let g = grid();
        let a = random_smooth_symbol(g, 2, 9);
        let est = operator_norm_estimate(&a, 40, 1).unwrap();
        assert!(est.trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-13)));
    }
}
