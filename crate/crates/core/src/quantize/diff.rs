//! Second-order finite differences on sampled phase-space arrays.

use crate::algebra::{C64, ZERO};
use crate::error::{Error, Result};
use crate::symbol::SampledSymbol;

/// Derivative of order 1 or 2 along `axis` of a row-major array with shape
/// `dims x width`. Interior points use the centered 3-point stencils, the
/// two ends use one-sided second-order stencils.
pub fn derivative(values: &[C64], dims: &[usize], width: usize, axis: usize, h: f64, order: u8) -> Vec<C64> {
    let n = dims[axis];
    assert!(n >= 4, "need at least 4 points along a differentiated axis");
    let inner: usize = dims[axis + 1..].iter().product::<usize>() * width;
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![ZERO; values.len()];
    let (c1, c2) = (1.0 / (2.0 * h), 1.0 / (h * h));
    for o in 0..outer {
        let base = o * n * inner;
        for i in 0..inner {
            let f = |j: usize| values[base + j * inner + i];
            for j in 0..n {
                let d = match (order, j) {
                    (1, 0) => (-3.0 * f(0) + 4.0 * f(1) - f(2)) * c1,
                    (1, j) if j == n - 1 => (3.0 * f(j) - 4.0 * f(j - 1) + f(j - 2)) * c1,
                    (1, j) => (f(j + 1) - f(j - 1)) * c1,
                    (_, 0) => (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) * c2,
                    (_, j) if j == n - 1 => (2.0 * f(j) - 5.0 * f(j - 1) + 4.0 * f(j - 2) - f(j - 3)) * c2,
                    (_, j) => (f(j + 1) - 2.0 * f(j) + f(j - 1)) * c2,
                };
                out[base + j * inner + i] = d;
            }
        }
    }
    out
}

pub(crate) fn phase_dims(a: &SampledSymbol) -> Vec<usize> {
    use crate::symbol::Symbol;
    let (gx, gxi) = (a.grid_x(), a.grid_xi());
    let mut dims = vec![gx.points; gx.n];
    dims.extend(std::iter::repeat(gxi.points).take(gxi.n));
    dims
}

/// `d_x^beta d_xi^gamma a` for 0/1 multi-indices.
pub fn partial_symbol(a: &SampledSymbol, beta: &[u8], gamma: &[u8]) -> Result<SampledSymbol> {
    use crate::symbol::Symbol;
    let (gx, gxi) = (a.grid_x(), a.grid_xi());
    if beta.len() != gx.n || gamma.len() != gxi.n {
        return Err(Error::Shape("multi-index length differs from the dimension".into()));
    }
    let dims = phase_dims(a);
    let width = a.k() * a.k();
    let mut values = a.values().to_vec();
    for (d, &b) in beta.iter().enumerate() {
        for _ in 0..b {
            values = derivative(&values, &dims, width, d, gx.spacing(), 1);
        }
    }
    for (d, &g) in gamma.iter().enumerate() {
        for _ in 0..g {
            values = derivative(&values, &dims, width, gx.n + d, gxi.spacing(), 1);
        }
    }
    a.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let h = 0.1;
        let f: Vec<C64> = (0..10).map(|j| C64::new((j as f64 * h).powi(2), 0.0)).collect();
        let d1 = derivative(&f, &[10], 1, 0, h, 1);
        let d2 = derivative(&f, &[10], 1, 0, h, 2);
        for j in 0..10 {
            assert!((d1[j].re - 2.0 * j as f64 * h).abs() < 1e-12);
            assert!((d2[j].re - 2.0).abs() < 1e-9);
        }
    }
}
