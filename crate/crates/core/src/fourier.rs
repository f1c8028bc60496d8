//! The symmetric Fourier transform `f^(xi) = (2 pi)^{-n/2} int e^{-i xi.y} f(y) dy`
//! on sampled functions.
//!
//! On a grid `x_j = (j - N/2) h` with dual grid `xi_m = (m - N/2) pi / L`,
//! `xi_m x_j = (m - N/2)(j - N/2) 2 pi / N`, so the rectangle rule becomes a
//! plain FFT conjugated by `(-1)^j` on input and `(-1)^(m + N/2)` on output,
//! scaled by `h / sqrt(2 pi)`. The discrete transform is exactly unitary for
//! the rectangle-rule inner products on the two grids. The matrix entries
//! are passengers: every `k x k` component is transformed independently.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::algebra::{C64, ZERO};
use crate::error::{Error, Result};
use crate::sampling::{DecayClass, GridSpec, ModuleFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// One axis of a sampled array: point count and spacing of the grid the
/// data currently lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub points: usize,
    pub spacing: f64,
}

impl Axis {
    pub fn of(grid: &GridSpec) -> Self {
        Self {
            points: grid.points,
            spacing: grid.spacing(),
        }
    }

    pub fn repeated(grid: &GridSpec) -> Vec<Self> {
        vec![Self::of(grid); grid.n]
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plans>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(points: usize) -> Plans {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry(points)
            .or_insert_with(|| (planner.plan_fft_forward(points), planner.plan_fft_inverse(points)))
            .clone()
    })
}

#[inline]
fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Transforms `values` in place along every listed axis. The array has
/// shape `axes[0].points x ... x width`, with `width` interleaved scalar
/// components per grid point.
pub fn transform_axes(values: &mut [C64], axes: &[Axis], width: usize, direction: Direction) {
    let dims: Vec<usize> = axes.iter().map(|a| a.points).collect();
    assert_eq!(values.len(), dims.iter().product::<usize>() * width, "array shape mismatch");
    for (a, axis) in axes.iter().enumerate() {
        let n = axis.points;
        let (fwd, inv) = plans(n);
        let plan = match direction {
            Direction::Forward => fwd,
            Direction::Inverse => inv,
        };
        let inner: usize = dims[a + 1..].iter().product::<usize>() * width;
        let outer: usize = dims[..a].iter().product();
        let scale = axis.spacing / (2.0 * PI).sqrt();
        let half = n / 2;
        let mut line = vec![ZERO; n];
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..inner {
                for (j, z) in line.iter_mut().enumerate() {
                    let v = values[base + j * inner + i];
                    *z = match direction {
                        Direction::Forward => v * sign(j),
                        Direction::Inverse => v * sign(j + half),
                    };
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (m, z) in line.iter().enumerate() {
                    let s = match direction {
                        Direction::Forward => sign(m + half),
                        Direction::Inverse => sign(m),
                    };
                    values[base + m * inner + i] = z * (s * scale);
                }
            }
        }
    }
}

/// Discrete transform of the samples of `f`, with no decay check. The
/// result lives on `f.grid().dual()`.
pub fn spectrum(f: &ModuleFunction) -> ModuleFunction {
    let mut values = f.values().to_vec();
    transform_axes(&mut values, &Axis::repeated(f.grid()), f.k() * f.k(), Direction::Forward);
    ModuleFunction::unchecked(f.grid().dual(), f.k(), values, DecayClass::Bounded).expect("transform keeps shape")
}

/// Inverse of [`spectrum`]: samples on `s.grid().dual()` from a spectrum `s`.
pub fn from_spectrum(s: &ModuleFunction) -> ModuleFunction {
    let mut values = s.values().to_vec();
    transform_axes(&mut values, &Axis::repeated(s.grid()), s.k() * s.k(), Direction::Inverse);
    ModuleFunction::unchecked(s.grid().dual(), s.k(), values, DecayClass::Bounded).expect("transform keeps shape")
}

fn retag(f: ModuleFunction) -> ModuleFunction {
    let decay = if f.satisfies_decay() {
        DecayClass::Schwartz
    } else {
        DecayClass::Bounded
    };
    f.with_decay(decay)
}

/// `phi^(xi) = (2 pi)^{-n/2} int e^{-i xi.y} phi(y) dy` on the dual grid.
pub fn fourier(f: &ModuleFunction) -> Result<ModuleFunction> {
    f.require_schwartz("fourier")?;
    Ok(retag(spectrum(f)))
}

/// Inverse transform; `inverse_fourier(fourier(phi)) = phi` up to rounding.
pub fn inverse_fourier(f: &ModuleFunction) -> Result<ModuleFunction> {
    f.require_schwartz("inverse_fourier")?;
    Ok(retag(from_spectrum(f)))
}

/// Bandlimited translate `x -> f(x - shift)` computed through the spectrum.
/// Schwartz inputs are continued by zero outside the box, so samples whose
/// preimage leaves the box are zeroed; bounded inputs are continued
/// periodically.
pub fn translate_bandlimited(f: &ModuleFunction, shift: &[f64]) -> Result<ModuleFunction> {
    let grid = *f.grid();
    if shift.len() != grid.n {
        return Err(Error::Shape("shift dimension mismatch".into()));
    }
    let k2 = f.k() * f.k();
    let mut spec = spectrum(f);
    let dual = *spec.grid();
    let mut xi = vec![0.0; grid.n];
    for (m, block) in spec.values_mut().chunks_exact_mut(k2).enumerate() {
        dual.point_into(m, &mut xi);
        let phase: f64 = xi.iter().zip(shift).map(|(a, b)| a * b).sum();
        let e = C64::from_polar(1.0, -phase);
        for z in block {
            *z *= e;
        }
    }
    let mut out = from_spectrum(&spec).with_decay(f.decay());
    if f.decay() == DecayClass::Schwartz {
        let mut x = vec![0.0; grid.n];
        for (i, block) in out.values_mut().chunks_exact_mut(k2).enumerate() {
            grid.point_into(i, &mut x);
            for (c, s) in x.iter_mut().zip(shift) {
                *c -= s;
            }
            if !grid.contains(&x) {
                block.fill(ZERO);
            }
        }
    }
    Ok(out)
}

/// Trigonometric interpolant of `f` at an arbitrary point, given its
/// spectrum. Costs one pass over the spectrum.
pub fn interpolate_at(spec: &ModuleFunction, y: &[f64], out: &mut [C64]) {
    let dual = spec.grid();
    let k2 = spec.k() * spec.k();
    let scale = dual.cell_volume() / (2.0 * PI).powf(dual.n as f64 / 2.0);
    out.fill(ZERO);
    let mut xi = vec![0.0; dual.n];
    for (m, block) in spec.values().chunks_exact(k2).enumerate() {
        dual.point_into(m, &mut xi);
        let phase: f64 = xi.iter().zip(y).map(|(a, b)| a * b).sum();
        let e = C64::from_polar(scale, phase);
        for (o, z) in out.iter_mut().zip(block) {
            *o += z * e;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{cstar_norm, AlgebraElement};
    use crate::sampling::{make_test_function, module_inner, module_norm, Recipe};

    fn grid() -> GridSpec {
        GridSpec::new(1, 10.0, 256).unwrap()
    }

    /// Rectangle-rule transform evaluated as an explicit double sum.
    fn direct_transform(f: &ModuleFunction, sign: f64) -> Vec<C64> {
        let g = f.grid();
        let d = g.dual();
        let k2 = f.k() * f.k();
        let scale = g.cell_volume() / (2.0 * PI).powf(g.n as f64 / 2.0);
        let mut out = vec![ZERO; d.total_points() * k2];
        for m in 0..d.total_points() {
            let xi = d.point(m);
            for j in 0..g.total_points() {
                let x = g.point(j);
                let phase: f64 = sign * xi.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
                let e = C64::from_polar(scale, phase);
                for c in 0..k2 {
                    out[m * k2 + c] += e * f.values()[j * k2 + c];
                }
            }
        }
        out
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn gaussian_is_a_fixed_point() {
        for coeff in [
            AlgebraElement::identity(2),
            AlgebraElement::from_entries(2, vec![C64::new(1., 2.), C64::new(0., -1.), C64::new(3., 0.), C64::new(-0.5, 0.5)])
                .unwrap(),
        ] {
            let f = ModuleFunction::gaussian(grid(), &[0.0], 1.0, &coeff).unwrap();
            let fh = fourier(&f).unwrap();
            let expected = ModuleFunction::gaussian(grid().dual(), &[0.0], 1.0, &coeff).unwrap();
            assert!(max_diff(fh.values(), expected.values()) < 1e-6);
            let back = inverse_fourier(&expected).unwrap();
            assert!(max_diff(back.values(), f.values()) < 1e-6);
        }
    }

    #[test]
    fn matches_direct_double_sum() {
        let g = GridSpec::new(2, 4.0, 16).unwrap();
        let f = make_test_function(Recipe::GaussianPoly, g, 2, 9).unwrap();
        let fast = spectrum(&f);
        assert!(max_diff(fast.values(), &direct_transform(&f, -1.0)) < 1e-12);
        let back = from_spectrum(&fast);
        assert!(max_diff(back.values(), f.values()) < 1e-13);
    }

    #[test]
    fn shift_law() {
        // transform of f(. - z) equals e^{-i xi z} f^(xi), checked against the direct sum
        let g = grid();
        let z = 16.0 * g.spacing();
        let c = AlgebraElement::identity(2);
        let shifted = ModuleFunction::gaussian(g, &[z], 1.0, &c).unwrap();
        let base = ModuleFunction::gaussian(g, &[0.0], 1.0, &c).unwrap();
        let direct = direct_transform(&base, -1.0);
        let lhs = fourier(&shifted).unwrap();
        let d = g.dual();
        for m in 0..d.total_points() {
            let e = C64::from_polar(1.0, -d.coordinate(m) * z);
            for c in 0..4 {
                assert!((lhs.values()[m * 4 + c] - e * direct[m * 4 + c]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn double_transform_is_parity() {
        let f = make_test_function(Recipe::ModulatedGaussian, grid(), 2, 4).unwrap();
        let ff = spectrum(&spectrum(&f));
        let direct = direct_transform(&ModuleFunction::classified(grid().dual(), 2, direct_transform(&f, -1.0)).unwrap(), -1.0);
        assert!(max_diff(ff.values(), &direct) < 1e-8);
        let n = grid().points;
        for j in 1..n {
            for c in 0..4 {
                let lhs = ff.values()[j * 4 + c];
                let rhs = f.values()[(n - j) * 4 + c];
                assert!((lhs - rhs).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn round_trip_and_unitarity() {
        for seed in 0..5 {
            let f = make_test_function(Recipe::GaussianPoly, grid(), 2, seed).unwrap();
            let g = make_test_function(Recipe::ModulatedGaussian, grid(), 2, seed + 100).unwrap();
            let back = inverse_fourier(&fourier(&f).unwrap()).unwrap();
            let scale = f.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(max_diff(back.values(), f.values()) <= 1e-10 * scale);
            let lhs = module_inner(&f, &g).unwrap();
            let rhs = module_inner(&spectrum(&f), &spectrum(&g)).unwrap();
            let bound = module_norm(&f).unwrap() * module_norm(&g).unwrap() + 1.0;
            assert!(cstar_norm(&lhs.sub(&rhs)).unwrap() <= 1e-8 * bound);
        }
    }

    #[test]
    fn bounded_inputs_are_rejected() {
        let f = make_test_function(Recipe::BoundedField, grid(), 2, 0).unwrap();
        assert!(matches!(fourier(&f), Err(Error::Precondition(_))));
        assert!(matches!(inverse_fourier(&f), Err(Error::Precondition(_))));
    }

    #[test]
    fn bandlimited_translate_matches_exact_shift() {
        let g = grid();
        let c = AlgebraElement::identity(1);
        let f = ModuleFunction::gaussian(g, &[0.0], 1.0, &c).unwrap();
        let z = 0.37;
        let moved = translate_bandlimited(&f, &[z]).unwrap();
        let expected = ModuleFunction::gaussian(g, &[z], 1.0, &c).unwrap();
        assert!(max_diff(moved.values(), expected.values()) < 1e-12);
        let spec = spectrum(&f);
        let mut out = [ZERO];
        interpolate_at(&spec, &[0.123], &mut out);
        assert!((out[0].re - (-0.5f64 * 0.123 * 0.123).exp()).abs() < 1e-12);
    }
}
