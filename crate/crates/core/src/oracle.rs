//! Slow reference evaluations that avoid the FFT paths entirely. They exist
//! to cross-check the fast routines and are selected by `--oracle` in the
//! command-line runner.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{block_mul_acc, block_mul_acc_scaled, C64, ZERO};
use crate::deformation::DeformationMatrix;
use crate::error::{Error, Result};
use crate::fourier::{interpolate_at, spectrum};
use crate::sampling::ModuleFunction;
use crate::symbol::Symbol;

/// A field `R^n -> M_k(C)` that can be evaluated anywhere.
pub trait Field: Send + Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [C64]);
}

type FieldClosure = dyn Fn(&[f64], &mut [C64]) + Send + Sync;

#[derive(Clone)]
pub struct FieldFn {
    n: usize,
    k: usize,
    f: Arc<FieldClosure>,
}

impl FieldFn {
    pub fn new<F>(n: usize, k: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [C64]) + Send + Sync + 'static,
    {
        Self { n, k, f: Arc::new(f) }
    }
}

impl fmt::Debug for FieldFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldFn").field("n", &self.n).field("k", &self.k).finish_non_exhaustive()
    }
}

impl Field for FieldFn {
    fn n(&self) -> usize {
        self.n
    }

    fn k(&self) -> usize {
        self.k
    }

    fn eval(&self, x: &[f64], out: &mut [C64]) {
        (self.f)(x, out)
    }
}

/// Trigonometric interpolant of sampled data. Schwartz-class data is zero
/// outside the box, bounded data is periodic.
#[derive(Debug, Clone)]
pub struct Interpolated {
    samples: ModuleFunction,
    spec: ModuleFunction,
}

impl Interpolated {
    pub fn new(f: &ModuleFunction) -> Self {
        Self {
            samples: f.clone(),
            spec: spectrum(f),
        }
    }
}

impl Field for Interpolated {
    fn n(&self) -> usize {
        self.samples.grid().n
    }

    fn k(&self) -> usize {
        self.samples.k()
    }

    fn eval(&self, x: &[f64], out: &mut [C64]) {
        let grid = self.samples.grid();
        if self.samples.decay() == crate::sampling::DecayClass::Schwartz && !grid.contains(x) {
            out.fill(ZERO);
            return;
        }
        interpolate_at(&self.spec, x, out);
    }
}

/// `O(a) phi` at the listed grid points by the double sum
/// `(2 pi)^{-n} h^n dxi^n sum_xi sum_y e^{i (x - y) xi} a(x, xi) phi(y)`.
pub fn quantize_direct(a: &dyn Symbol, phi: &ModuleFunction, points: &[usize]) -> Result<Vec<Vec<C64>>> {
    let grid = *phi.grid();
    let dual = a.grid_xi();
    if !a.grid_x().approx_eq(&grid) || a.k() != phi.k() {
        return Err(Error::Shape("symbol does not match the function".into()));
    }
    let k = phi.k();
    let k2 = k * k;
    let n = grid.n;
    let weight = grid.cell_volume() * dual.cell_volume() / (2.0 * PI).powi(n as i32);
    let ys: Vec<Vec<f64>> = (0..grid.total_points()).map(|j| grid.point(j)).collect();
    let mut result = Vec::with_capacity(points.len());
    let mut sym = vec![ZERO; k2];
    for &i in points {
        let x = grid.point(i);
        let mut out = vec![ZERO; k2];
        for m in 0..dual.total_points() {
            let xi = dual.point(m);
            // inner = sum_y e^{-i y.xi} phi(y)
            let mut inner = vec![ZERO; k2];
            for (j, y) in ys.iter().enumerate() {
                let t: f64 = y.iter().zip(&xi).map(|(a, b)| a * b).sum();
                let e = C64::from_polar(1.0, -t);
                for (o, z) in inner.iter_mut().zip(phi.block(j)) {
                    *o += z * e;
                }
            }
            a.sample(i, m, &mut sym);
            let t: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
            block_mul_acc_scaled(k, C64::from_polar(weight, t), &sym, &inner, &mut out);
        }
        result.push(out);
    }
    Ok(result)
}

/// Quadrature for [`deformed_product_direct`]: uniform nodes on
/// `[-u_half, u_half]^n` and `[-v_half, v_half]^n`, damping `e^{-eps(|u|^2 + |v|^2)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectQuadrature {
    pub u_half: f64,
    pub u_step: f64,
    pub v_half: f64,
    pub v_step: f64,
    pub epsilon: f64,
    /// Combine the results at `eps` and `eps / 2` to cancel the `O(eps)` term.
    pub richardson: bool,
}

impl Default for DirectQuadrature {
    fn default() -> Self {
        Self {
            u_half: 9.0,
            u_step: 0.1,
            v_half: 8.0,
            v_step: 0.1,
            epsilon: 1e-3,
            richardson: true,
        }
    }
}

fn nodes(half: f64, step: f64) -> Vec<f64> {
    let m = (half / step).round() as i64;
    (-m..=m).map(|i| i as f64 * step).collect()
}

/// Replaces axis `axis` (length `kernel.len() / out_len`) by an axis of
/// length `out_len`: `out[.., p, ..] = sum_q kernel[p * len + q] in[.., q, ..]`.
fn contract_axis(values: &[C64], dims: &[usize], width: usize, axis: usize, kernel: &[C64], out_len: usize) -> Vec<C64> {
    let len = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product::<usize>() * width;
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![ZERO; outer * out_len * inner];
    for o in 0..outer {
        for p in 0..out_len {
            let dst = &mut out[(o * out_len + p) * inner..(o * out_len + p + 1) * inner];
            for q in 0..len {
                let c = kernel[p * len + q];
                let src = &values[(o * len + q) * inner..(o * len + q + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += c * s;
                }
            }
        }
    }
    out
}

fn damped_product(f: &dyn Field, g: &dyn Field, j: &DeformationMatrix, x: &[f64], q: &DirectQuadrature, eps: f64) -> Vec<C64> {
    let n = x.len();
    let k = f.k();
    let k2 = k * k;
    let us = nodes(q.u_half, q.u_step);
    let vs = nodes(q.v_half, q.v_step);
    let (nu, nv) = (us.len(), vs.len());

    // A(v) = e^{-eps |v|^2} G(x + v), then contract every v axis against e^{i u v}.
    let mut dims = vec![nv; n];
    let total: usize = dims.iter().product();
    let mut values = vec![ZERO; total * k2];
    let mut pt = vec![0.0; n];
    for (b, block) in values.chunks_exact_mut(k2).enumerate() {
        let mut rest = b;
        let mut r2 = 0.0;
        for d in (0..n).rev() {
            let v = vs[rest % nv];
            rest /= nv;
            pt[d] = x[d] + v;
            r2 += v * v;
        }
        g.eval(&pt, block);
        let w = (-eps * r2).exp();
        for z in block {
            *z *= w;
        }
    }
    let kernel: Vec<C64> = us
        .iter()
        .flat_map(|&u| vs.iter().map(move |&v| C64::from_polar(q.v_step, u * v)))
        .collect();
    for axis in 0..n {
        values = contract_axis(&values, &dims, k2, axis, &kernel, nu);
        dims[axis] = nu;
    }

    // sum_u e^{-eps |u|^2} F(x + J u) B(u)
    let mut out = vec![ZERO; k2];
    let mut fval = vec![ZERO; k2];
    let mut u = vec![0.0; n];
    for (b, block) in values.chunks_exact(k2).enumerate() {
        let mut rest = b;
        let mut r2 = 0.0;
        for d in (0..n).rev() {
            u[d] = us[rest % nu];
            rest /= nu;
            r2 += u[d] * u[d];
        }
        let ju = j.apply(&u);
        for d in 0..n {
            pt[d] = x[d] + ju[d];
        }
        f.eval(&pt, &mut fval);
        let w = (-eps * r2).exp() * q.u_step.powi(n as i32);
        let mut tmp = vec![ZERO; k2];
        block_mul_acc(k, &fval, block, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t * w;
        }
    }
    let norm = (2.0 * PI).powi(-(n as i32));
    out.iter().map(|z| z * norm).collect()
}

/// `F x_J G(x) = (2 pi)^{-n} int int e^{i u.v} F(x + J u) G(x + v) du dv` by
/// brute-force quadrature with Gaussian damping. Both `v` contractions are
/// done axis by axis, so the cost per point is `O(n_u n_v^n + n_u^n)`.
pub fn deformed_product_direct(
    f: &dyn Field,
    g: &dyn Field,
    j: &DeformationMatrix,
    x: &[f64],
    quadrature: &DirectQuadrature,
) -> Result<Vec<C64>> {
    if f.n() != x.len() || g.n() != x.len() || j.n() != x.len() {
        return Err(Error::Shape("dimension mismatch in the direct product".into()));
    }
    if f.k() != g.k() {
        return Err(Error::Shape("algebra dimension mismatch".into()));
    }
    let eps = quadrature.epsilon;
    let coarse = damped_product(f, g, j, x, quadrature, eps);
    if !quadrature.richardson {
        return Ok(coarse);
    }
    let fine = damped_product(f, g, j, x, quadrature, eps / 2.0);
    Ok(fine.iter().zip(&coarse).map(|(a, b)| 2.0 * a - b).collect())
}
