//! Phase-space symbols `a : R^n x R^n -> M_k(C)`.
//!
//! [`SampledSymbol`] stores every sample. [`SymbolFn`] evaluates a closure on
//! demand at the same grid points; it exists because an `n = 2` symbol on a
//! 64-point grid has 16.7M samples, which is too much to hold densely.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::algebra::{block_norm, AlgebraElement, C64, ZERO};
use crate::error::{Error, Result};
use crate::sampling::{flatten_values, json_k, nest_values, DecayClass, GridSpec, DECAY_RATIO};

/// Radial cutoff: `1` on `[0, 1]`, `exp(1 - 1/(1 - (r-1)^2))` on `(1, 2)`,
/// `0` from `2` on.
pub fn bump_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r < 2.0 {
        let s = r - 1.0;
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Read access to a symbol sampled on `grid_x x grid_xi`.
pub trait Symbol: Send + Sync {
    fn grid_x(&self) -> GridSpec;
    fn grid_xi(&self) -> GridSpec;
    fn k(&self) -> usize;

    /// Writes the `k x k` block `a(x_i, xi_m)` into `out`.
    fn sample(&self, x_index: usize, xi_index: usize, out: &mut [C64]);

    /// Writes `a(x_i, xi_m)` for every `m`, blocks laid out consecutively.
    fn fill_row(&self, x_index: usize, out: &mut [C64]) {
        let k2 = self.k() * self.k();
        for (m, block) in out.chunks_exact_mut(k2).enumerate() {
            self.sample(x_index, m, block);
        }
    }

    fn to_sampled(&self) -> Result<SampledSymbol> {
        let gx = self.grid_x();
        let gxi = self.grid_xi();
        let k2 = self.k() * self.k();
        let row_len = gxi.total_points() * k2;
        let mut values = vec![ZERO; gx.total_points() * row_len];
        for (i, row) in values.chunks_exact_mut(row_len).enumerate() {
            self.fill_row(i, row);
        }
        SampledSymbol::new(gx, gxi, self.k(), values)
    }
}

/// Densely sampled symbol. Sample `(i, m)` lives at block `i * |grid_xi| + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSymbol {
    grid_x: GridSpec,
    grid_xi: GridSpec,
    k: usize,
    values: Vec<C64>,
    decay: DecayClass,
}

impl SampledSymbol {
    /// Wraps samples; the decay class is read off the phase-space boundary shell.
    pub fn new(grid_x: GridSpec, grid_xi: GridSpec, k: usize, values: Vec<C64>) -> Result<Self> {
        if grid_x.n != grid_xi.n {
            return Err(Error::Shape("x and xi grids must have the same dimension".into()));
        }
        if k == 0 {
            return Err(Error::InvalidInput("algebra dimension must be positive".into()));
        }
        let expected = grid_x.total_points() * grid_xi.total_points() * k * k;
        if values.len() != expected {
            return Err(Error::Shape(format!("expected {expected} entries, got {}", values.len())));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite symbol sample".into()));
        }
        let mut s = Self {
            grid_x,
            grid_xi,
            k,
            values,
            decay: DecayClass::Bounded,
        };
        if s.boundary_ratio() <= DECAY_RATIO {
            s.decay = DecayClass::Schwartz;
        }
        Ok(s)
    }

    pub fn from_fn<F>(grid_x: GridSpec, grid_xi: GridSpec, k: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64], &mut [C64]),
    {
        let k2 = k * k;
        let nxi = grid_xi.total_points();
        let mut values = vec![ZERO; grid_x.total_points() * nxi * k2];
        let mut x = vec![0.0; grid_x.n];
        let mut xi = vec![0.0; grid_xi.n];
        for (b, block) in values.chunks_exact_mut(k2).enumerate() {
            grid_x.point_into(b / nxi, &mut x);
            grid_xi.point_into(b % nxi, &mut xi);
            f(&x, &xi, block);
        }
        Self::new(grid_x, grid_xi, k, values)
    }

    /// Symbol on `grid x grid.dual()`, the layout quantization expects.
    pub fn on_phase_space<F>(grid: GridSpec, k: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &[f64], &mut [C64]),
    {
        Self::from_fn(grid, grid.dual(), k, f)
    }

    pub fn constant(grid_x: GridSpec, grid_xi: GridSpec, value: &AlgebraElement) -> Result<Self> {
        let e = value.entries().to_vec();
        Self::from_fn(grid_x, grid_xi, value.dim(), |_, _, out| out.copy_from_slice(&e))
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn block(&self, x_index: usize, xi_index: usize) -> &[C64] {
        let k2 = self.k * self.k;
        let b = x_index * self.grid_xi.total_points() + xi_index;
        &self.values[b * k2..(b + 1) * k2]
    }

    pub fn value(&self, x_index: usize, xi_index: usize) -> AlgebraElement {
        AlgebraElement::from_entries(self.k, self.block(x_index, xi_index).to_vec()).expect("block shape")
    }

    pub(crate) fn with_values(&self, values: Vec<C64>) -> Result<Self> {
        Self::new(self.grid_x, self.grid_xi, self.k, values)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid_x.approx_eq(&other.grid_x) || !self.grid_xi.approx_eq(&other.grid_xi) || self.k != other.k {
            return Err(Error::Shape("symbols live on different grids".into()));
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        let k2 = self.k * self.k;
        self.values.chunks_exact(k2).map(|b| block_norm(self.k, b)).fold(0.0, f64::max)
    }

    fn boundary_ratio(&self) -> f64 {
        let k2 = self.k * self.k;
        let nxi = self.grid_xi.total_points();
        let shell_x: Vec<bool> = (0..self.grid_x.total_points()).map(|i| self.grid_x.in_shell(i)).collect();
        let shell_xi: Vec<bool> = (0..nxi).map(|m| self.grid_xi.in_shell(m)).collect();
        let (mut all, mut shell) = (0.0f64, 0.0f64);
        for (b, block) in self.values.chunks_exact(k2).enumerate() {
            let v = crate::algebra::block_frobenius(block);
            all = all.max(v);
            if shell_x[b / nxi] || shell_xi[b % nxi] {
                shell = shell.max(v);
            }
        }
        if all == 0.0 {
            0.0
        } else {
            shell / all
        }
    }

    /// Sample at integer multi-indices that may leave the grid. Outside the
    /// box Schwartz symbols are continued by zero and bounded ones by their
    /// nearest boundary sample.
    pub fn continued(&self, x_index: &[isize], xi_index: &[isize], out: &mut [C64]) {
        let nx = self.grid_x.points as isize;
        let nxi = self.grid_xi.points as isize;
        let outside = x_index.iter().any(|&i| i < 0 || i >= nx) || xi_index.iter().any(|&m| m < 0 || m >= nxi);
        if outside && self.decay == DecayClass::Schwartz {
            out.fill(ZERO);
            return;
        }
        let clamp = |i: isize, n: isize| i.clamp(0, n - 1) as usize;
        let xi_flat = xi_index.iter().fold(0, |acc, &m| acc * nxi as usize + clamp(m, nxi));
        let x_flat = x_index.iter().fold(0, |acc, &i| acc * nx as usize + clamp(i, nx));
        out.copy_from_slice(self.block(x_flat, xi_flat));
    }

    /// `(x, xi) -> a(x + z, xi + zeta)` for grid-aligned shifts given in steps.
    pub fn translated(&self, z_steps: &[isize], zeta_steps: &[isize]) -> Result<Self> {
        let n = self.grid_x.n;
        if z_steps.len() != n || zeta_steps.len() != n {
            return Err(Error::Shape("shift dimension mismatch".into()));
        }
        let k2 = self.k * self.k;
        let nxi = self.grid_xi.total_points();
        let mut values = vec![ZERO; self.values.len()];
        for (b, block) in values.chunks_exact_mut(k2).enumerate() {
            let xi: Vec<isize> = self.grid_xi.multi_index(b % nxi).iter().zip(zeta_steps).map(|(&m, &s)| m as isize + s).collect();
            let x: Vec<isize> = self.grid_x.multi_index(b / nxi).iter().zip(z_steps).map(|(&i, &s)| i as isize + s).collect();
            self.continued(&x, &xi, block);
        }
        self.with_values(values)
    }

    pub fn to_json(&self) -> Value {
        let mut dims = vec![self.grid_x.points; self.grid_x.n];
        dims.extend(std::iter::repeat(self.grid_xi.points).take(self.grid_xi.n));
        json!({
            "space": "phase",
            "grid": self.grid_x,
            "grid_xi": self.grid_xi,
            "k": self.k,
            "values": nest_values(&self.values, &dims, self.k),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        if value.get("space").and_then(Value::as_str) != Some("phase") {
            return Err(Error::Format("symbol JSON must carry \"space\": \"phase\"".into()));
        }
        let grid = |key: &str| -> Result<GridSpec> {
            let g: GridSpec = serde_json::from_value(value.get(key).cloned().unwrap_or(Value::Null))
                .map_err(|e| Error::Format(format!("{key}: {e}")))?;
            GridSpec::new(g.n, g.half_width, g.points)
        };
        let (gx, gxi) = (grid("grid")?, grid("grid_xi")?);
        let k = json_k(value)?;
        let mut values = Vec::new();
        flatten_values(
            value.get("values").ok_or_else(|| Error::Format("missing values".into()))?,
            gx.n + gxi.n,
            k,
            &mut values,
        )?;
        Self::new(gx, gxi, k, values)
    }
}

impl Symbol for SampledSymbol {
    fn grid_x(&self) -> GridSpec {
        self.grid_x
    }

    fn grid_xi(&self) -> GridSpec {
        self.grid_xi
    }

    fn k(&self) -> usize {
        self.k
    }

    fn sample(&self, x_index: usize, xi_index: usize, out: &mut [C64]) {
        out.copy_from_slice(self.block(x_index, xi_index));
    }

    fn fill_row(&self, x_index: usize, out: &mut [C64]) {
        let len = self.grid_xi.total_points() * self.k * self.k;
        out.copy_from_slice(&self.values[x_index * len..(x_index + 1) * len]);
    }

    fn to_sampled(&self) -> Result<SampledSymbol> {
        Ok(self.clone())
    }
}

type SymbolClosure = dyn Fn(&[f64], &[f64], &mut [C64]) + Send + Sync;

/// Symbol given by a closure, evaluated at grid points on demand.
#[derive(Clone)]
pub struct SymbolFn {
    grid_x: GridSpec,
    grid_xi: GridSpec,
    k: usize,
    f: Arc<SymbolClosure>,
}

impl SymbolFn {
    pub fn new<F>(grid_x: GridSpec, grid_xi: GridSpec, k: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64], &mut [C64]) + Send + Sync + 'static,
    {
        Self {
            grid_x,
            grid_xi,
            k,
            f: Arc::new(f),
        }
    }

    pub fn on_phase_space<F>(grid: GridSpec, k: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64], &mut [C64]) + Send + Sync + 'static,
    {
        Self::new(grid, grid.dual(), k, f)
    }

    pub fn eval(&self, x: &[f64], xi: &[f64], out: &mut [C64]) {
        (self.f)(x, xi, out)
    }
}

impl fmt::Debug for SymbolFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolFn")
            .field("grid_x", &self.grid_x)
            .field("grid_xi", &self.grid_xi)
            .field("k", &self.k)
            .finish_non_exhaustive()
    }
}

impl Symbol for SymbolFn {
    fn grid_x(&self) -> GridSpec {
        self.grid_x
    }

    fn grid_xi(&self) -> GridSpec {
        self.grid_xi
    }

    fn k(&self) -> usize {
        self.k
    }

    fn sample(&self, x_index: usize, xi_index: usize, out: &mut [C64]) {
        let (mut x, mut xi) = ([0.0; 3], [0.0; 3]);
        let (x, xi) = (&mut x[..self.grid_x.n], &mut xi[..self.grid_xi.n]);
        self.grid_x.point_into(x_index, x);
        self.grid_xi.point_into(xi_index, xi);
        (self.f)(x, xi, out)
    }

    fn fill_row(&self, x_index: usize, out: &mut [C64]) {
        let k2 = self.k * self.k;
        let x = self.grid_x.point(x_index);
        let mut xi = vec![0.0; self.grid_xi.n];
        for (m, block) in out.chunks_exact_mut(k2).enumerate() {
            self.grid_xi.point_into(m, &mut xi);
            (self.f)(&x, &xi, block);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_one_near_zero_and_vanishes_past_two() {
        assert_eq!(bump_profile(0.0), 1.0);
        assert_eq!(bump_profile(1.0), 1.0);
        assert_eq!(bump_profile(2.0), 0.0);
        assert!(bump_profile(1.5) > 0.0 && bump_profile(1.5) < 1.0);
        assert!(bump_profile(1.999) < 1e-100);
        // smooth at r = 1: the profile is flat there
        assert!((bump_profile(1.0 + 1e-4) - 1.0).abs() < 1e-7);
    }

    #[test]
    fn lazy_and_dense_agree() {
        let g = GridSpec::new(1, 4.0, 16).unwrap();
        let f = |x: &[f64], xi: &[f64], out: &mut [C64]| {
            out[0] = C64::new((x[0] - xi[0]).cos(), x[0] * 0.1);
        };
        let lazy = SymbolFn::on_phase_space(g, 1, f);
        let dense = SampledSymbol::on_phase_space(g, 1, f).unwrap();
        assert_eq!(lazy.to_sampled().unwrap(), dense);
    }

    #[test]
    fn translation_uses_continuation_rules() {
        let g = GridSpec::new(1, 4.0, 16).unwrap();
        let c = AlgebraElement::identity(1);
        let constant = SampledSymbol::constant(g, g.dual(), &c).unwrap();
        assert_eq!(constant.decay(), DecayClass::Bounded);
        assert_eq!(constant.translated(&[5], &[-7]).unwrap(), constant);

        let gauss = SampledSymbol::on_phase_space(g, 1, |x, xi, out| {
            out[0] = C64::new((-4.0 * x[0] * x[0] - xi[0] * xi[0]).exp(), 0.0)
        })
        .unwrap();
        assert_eq!(gauss.decay(), DecayClass::Schwartz);
        let shifted = gauss.translated(&[2], &[0]).unwrap();
        assert_eq!(shifted.block(3, 4), gauss.block(5, 4));
        assert_eq!(shifted.block(15, 4)[0], ZERO);
    }

    #[test]
    fn json_round_trip() {
        let g = GridSpec::new(1, 2.0, 4).unwrap();
        let s = SampledSymbol::on_phase_space(g, 2, |x, xi, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = C64::new(x[0] + i as f64, xi[0]);
            }
        })
        .unwrap();
        let back = SampledSymbol::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let mut bad = s.to_json();
        bad["space"] = json!("position");
        assert!(SampledSymbol::from_json(&bad).is_err());
    }
}
