//! The pair `b = prod_j (1 + d_{x_j})^2 (1 + d_{xi_j})^2 a` and its inverse
//! `a = (gamma x gamma) * b`, `gamma(t) = t e^{-t}` on `t >= 0`, plus the
//! cutoff family `a_eps`.

use super::diff::{derivative, phase_dims};
use crate::algebra::ZERO;
use crate::error::{Error, Result};
use crate::sampling::DecayClass;
use crate::symbol::{bump_profile, SampledSymbol, Symbol};

/// Kernel values below this are dropped.
const KERNEL_FLOOR: f64 = 1e-12;

fn axis_spacings(a: &SampledSymbol) -> Vec<f64> {
    let (gx, gxi) = (a.grid_x(), a.grid_xi());
    let mut h = vec![gx.spacing(); gx.n];
    h.extend(vec![gxi.spacing(); gxi.n]);
    h
}

/// Applies `(1 + d)^2 = 1 + 2 d + d^2` along every phase-space axis.
pub fn operb_transform(a: &SampledSymbol) -> Result<SampledSymbol> {
    let dims = phase_dims(a);
    if dims.iter().any(|&d| d < 8) {
        return Err(Error::Resolution("finite differences need at least 8 points per axis".into()));
    }
    let width = a.k() * a.k();
    let mut values = a.values().to_vec();
    for (axis, h) in axis_spacings(a).into_iter().enumerate() {
        let d1 = derivative(&values, &dims, width, axis, h, 1);
        let d2 = derivative(&values, &dims, width, axis, h, 2);
        for ((v, p), q) in values.iter_mut().zip(&d1).zip(&d2) {
            *v += 2.0 * p + q;
        }
    }
    a.with_values(values)
}

/// Result of [`operb_reconstruct`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub symbol: SampledSymbol,
    /// The kernel's effective support is longer than the box along some axis.
    pub kernel_exceeds_box: bool,
    /// The kernel reaches past the box on a bounded-class input, so the
    /// constant continuation stands in for unknown data.
    pub truncated: bool,
}

/// Where `t e^{-t}` falls below the kernel floor.
fn kernel_support() -> f64 {
    let mut s = -KERNEL_FLOOR.ln();
    for _ in 0..50 {
        s = -KERNEL_FLOOR.ln() + s.ln();
    }
    s
}

/// `a(x) = int_0^inf t e^{-t} b(x - t) dt` along every phase-space axis.
///
/// The quadrature weights `w_q = (q h) e^{-q h} h` are normalized to sum to
/// one, so constants are reproduced exactly. Samples left of the box are
/// zero for Schwartz-class `b` and equal to the first sample otherwise. The
/// sum is evaluated with a two-stage recursive filter.
pub fn operb_reconstruct(b: &SampledSymbol) -> Result<Reconstruction> {
    let dims = phase_dims(b);
    let width = b.k() * b.k();
    let support = kernel_support();
    let bounded = b.decay() == DecayClass::Bounded;
    let mut values = b.values().to_vec();
    let mut exceeds = false;
    for (axis, h) in axis_spacings(b).into_iter().enumerate() {
        let n = dims[axis];
        exceeds |= support > n as f64 * h;
        let q_max = (support / h).ceil() as usize;
        let weights: Vec<f64> = (0..=q_max).map(|q| (q as f64 * h) * (-(q as f64) * h).exp() * h).collect();
        let total: f64 = weights.iter().sum();
        // tail[i] = sum of normalized weights with q > i
        let mut tail = vec![0.0; n];
        let mut acc = 0.0;
        for q in (1..=q_max).rev() {
            acc += weights[q] / total;
            if q - 1 < n {
                tail[q - 1] = acc;
            }
        }
        let r = (-h).exp();
        let c = h * h / total;
        let inner: usize = dims[axis + 1..].iter().product::<usize>() * width;
        let outer: usize = dims[..axis].iter().product();
        let mut line_u = vec![ZERO; n];
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..inner {
                let at = |j: usize| base + j * inner + i;
                let first = values[at(0)];
                let (mut u, mut v) = (ZERO, ZERO);
                for j in 0..n {
                    let bj = values[at(j)];
                    v = r * (v + u);
                    u = bj + r * u;
                    line_u[j] = v * c;
                }
                for j in 0..n {
                    let mut out = line_u[j];
                    if bounded {
                        out += first * tail[j];
                    }
                    values[at(j)] = out;
                }
            }
        }
    }
    Ok(Reconstruction {
        symbol: b.with_values(values)?,
        kernel_exceeds_box: exceeds,
        truncated: exceeds && bounded,
    })
}

/// `a_eps(x, xi) = bump(eps |(x, xi)|) a(x, xi)` for `0 < eps <= 1`.
pub fn cutoff_family(a: &SampledSymbol, eps: f64) -> Result<SampledSymbol> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidInput(format!("cutoff parameter must lie in (0, 1], got {eps}")));
    }
    let (gx, gxi) = (a.grid_x(), a.grid_xi());
    let nxi = gxi.total_points();
    let k2 = a.k() * a.k();
    let mut values = a.values().to_vec();
    let mut x = vec![0.0; gx.n];
    let mut xi = vec![0.0; gxi.n];
    for (b, block) in values.chunks_exact_mut(k2).enumerate() {
        gx.point_into(b / nxi, &mut x);
        gxi.point_into(b % nxi, &mut xi);
        let r = x.iter().chain(&xi).map(|c| c * c).sum::<f64>().sqrt();
        let w = bump_profile(eps * r);
        if w != 1.0 {
            for z in block.iter_mut() {
                *z *= w;
            }
        }
    }
    a.with_values(values)
}
