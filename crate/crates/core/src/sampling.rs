//! Uniform grids, sampled `A`-valued functions and the Hilbert-module
//! inner product `<f, g> = sum_x f(x)^* g(x) h^n`.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{block_adjoint_mul_acc, block_mul_acc, block_norm, AlgebraElement, C64, ZERO};
use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::symbol::bump_profile;

/// Fraction of the half-width that marks the start of the boundary shell.
pub const SHELL_START: f64 = 0.9;
/// Boundary samples of a Schwartz-class function must be this small
/// relative to its maximum.
pub const DECAY_RATIO: f64 = 1e-6;

/// Uniform grid `{-L + j h : 0 <= j < N}^n` with `h = 2L / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl GridSpec {
    pub fn new(n: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidInput(format!("grid dimension {n} outside 1..=3")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!("half-width {half_width} must be positive")));
        }
        if points < 2 || !points.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "points per axis must be a power of two >= 2, got {points}"
            )));
        }
        Ok(Self {
            n,
            half_width,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Frequency grid paired with this one by the discrete transform:
    /// spacing `pi / L`, half-width `pi / h`.
    pub fn dual(&self) -> Self {
        Self {
            n: self.n,
            half_width: PI / self.spacing(),
            points: self.points,
        }
    }

    pub fn total_points(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        (index as f64 - (self.points / 2) as f64) * self.spacing()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        let mut rest = flat;
        for d in (0..self.n).rev() {
            idx[d] = rest % self.points;
            rest /= self.points;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.point_into(flat, &mut x);
        x
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for d in (0..self.n).rev() {
            out[d] = self.coordinate(rest % self.points);
            rest /= self.points;
        }
    }

    pub fn in_shell_point(&self, x: &[f64]) -> bool {
        x.iter().any(|c| c.abs() >= SHELL_START * self.half_width)
    }

    /// Same grid up to floating-point noise in the half-width.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.points == other.points
            && (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width.max(other.half_width)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .all(|&c| c >= -self.half_width - 1e-12 && c < self.half_width - 1e-12 * self.half_width)
    }

    pub fn in_shell(&self, flat: usize) -> bool {
        let mut rest = flat;
        for _ in 0..self.n {
            if self.coordinate(rest % self.points).abs() >= SHELL_START * self.half_width {
                return true;
            }
            rest /= self.points;
        }
        false
    }

    /// Integer number of grid steps equal to `distance`, if any.
    pub fn steps_for(&self, distance: f64) -> Option<isize> {
        let steps = distance / self.spacing();
        let rounded = steps.round();
        ((steps - rounded).abs() <= 1e-9 * rounded.abs().max(1.0)).then_some(rounded as isize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayClass {
    Schwartz,
    Bounded,
}

/// Samples of `f : R^n -> M_k(C)` on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleFunction {
    grid: GridSpec,
    k: usize,
    values: Vec<C64>,
    decay: DecayClass,
}

impl ModuleFunction {
    /// Wraps raw samples. A Schwartz tag is verified against the boundary
    /// decay invariant.
    pub fn new(grid: GridSpec, k: usize, values: Vec<C64>, decay: DecayClass) -> Result<Self> {
        let f = Self::unchecked(grid, k, values, decay)?;
        if decay == DecayClass::Schwartz && !f.satisfies_decay() {
            return Err(Error::Precondition(format!(
                "samples tagged schwartz but boundary ratio is {:.3e}",
                f.boundary_ratio()
            )));
        }
        Ok(f)
    }

    /// Wraps raw samples and tags them by the boundary decay test.
    pub fn classified(grid: GridSpec, k: usize, values: Vec<C64>) -> Result<Self> {
        let mut f = Self::unchecked(grid, k, values, DecayClass::Bounded)?;
        if f.satisfies_decay() {
            f.decay = DecayClass::Schwartz;
        }
        Ok(f)
    }

    pub(crate) fn unchecked(grid: GridSpec, k: usize, values: Vec<C64>, decay: DecayClass) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("algebra dimension must be positive".into()));
        }
        if values.len() != grid.total_points() * k * k {
            return Err(Error::Shape(format!(
                "expected {} samples of {k}x{k} blocks, got {} entries",
                grid.total_points(),
                values.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(Self {
            grid,
            k,
            values,
            decay,
        })
    }

    pub fn zeros(grid: GridSpec, k: usize) -> Self {
        Self {
            grid,
            k,
            values: vec![ZERO; grid.total_points() * k * k],
            decay: DecayClass::Schwartz,
        }
    }

    /// Samples `f` at every grid point; `f` writes the `k * k` row-major block.
    pub fn from_fn<F>(grid: GridSpec, k: usize, decay: DecayClass, f: F) -> Result<Self>
    where
        F: Fn(&[f64], &mut [C64]),
    {
        let k2 = k * k;
        let mut values = vec![ZERO; grid.total_points() * k2];
        let mut x = vec![0.0; grid.n];
        for (i, block) in values.chunks_exact_mut(k2).enumerate() {
            grid.point_into(i, &mut x);
            f(&x, block);
        }
        Self::new(grid, k, values, decay)
    }

    /// `exp(-|x - center|^2 / (2 sigma^2)) * coefficient`.
    pub fn gaussian(grid: GridSpec, center: &[f64], sigma: f64, coefficient: &AlgebraElement) -> Result<Self> {
        let k = coefficient.dim();
        let coeff = coefficient.entries().to_vec();
        Self::from_fn(grid, k, DecayClass::Schwartz, |x, out| {
            let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c).powi(2)).sum();
            let g = (-r2 / (2.0 * sigma * sigma)).exp();
            for (o, c) in out.iter_mut().zip(&coeff) {
                *o = c * g;
            }
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn block(&self, point: usize) -> &[C64] {
        let k2 = self.k * self.k;
        &self.values[point * k2..(point + 1) * k2]
    }

    pub fn value(&self, point: usize) -> AlgebraElement {
        AlgebraElement::from_entries(self.k, self.block(point).to_vec()).expect("block shape")
    }

    pub fn with_decay(mut self, decay: DecayClass) -> Self {
        self.decay = decay;
        self
    }

    /// `x -> f(x) a`.
    pub fn mul_right(&self, a: &AlgebraElement) -> Self {
        assert_eq!(a.dim(), self.k, "algebra dimension mismatch");
        self.map_blocks(|b, out| block_mul_acc(self.k, b, a.entries(), out))
    }

    /// `x -> a f(x)`.
    pub fn mul_left(&self, a: &AlgebraElement) -> Self {
        assert_eq!(a.dim(), self.k, "algebra dimension mismatch");
        self.map_blocks(|b, out| block_mul_acc(self.k, a.entries(), b, out))
    }

    fn map_blocks<F: Fn(&[C64], &mut [C64])>(&self, f: F) -> Self {
        let k2 = self.k * self.k;
        let mut values = vec![ZERO; self.values.len()];
        for (src, dst) in self.values.chunks_exact(k2).zip(values.chunks_exact_mut(k2)) {
            f(src, dst);
        }
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let decay = if self.decay == DecayClass::Schwartz && other.decay == DecayClass::Schwartz {
            DecayClass::Schwartz
        } else {
            DecayClass::Bounded
        };
        Ok(Self {
            grid: self.grid,
            k: self.k,
            values,
            decay,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.approx_eq(&other.grid) {
            return Err(Error::Shape(format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid)));
        }
        if self.k != other.k {
            return Err(Error::Shape(format!("algebra dimension mismatch: {} vs {}", self.k, other.k)));
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        let k2 = self.k * self.k;
        self.values
            .chunks_exact(k2)
            .map(|b| block_norm(self.k, b))
            .fold(0.0, f64::max)
    }

    /// `max ||f|| over the outer shell / max ||f||` (zero for `f = 0`).
    pub fn boundary_ratio(&self) -> f64 {
        let k2 = self.k * self.k;
        let mut inner_max: f64 = 0.0;
        let mut shell_max: f64 = 0.0;
        for (i, b) in self.values.chunks_exact(k2).enumerate() {
            let v = block_norm(self.k, b);
            inner_max = inner_max.max(v);
            if self.grid.in_shell(i) {
                shell_max = shell_max.max(v);
            }
        }
        if inner_max == 0.0 {
            0.0
        } else {
            shell_max / inner_max
        }
    }

    pub fn satisfies_decay(&self) -> bool {
        self.boundary_ratio() <= DECAY_RATIO
    }

    /// Errors unless the samples satisfy the boundary decay invariant.
    pub fn require_schwartz(&self, what: &str) -> Result<()> {
        if self.decay != DecayClass::Schwartz || !self.satisfies_decay() {
            return Err(Error::Precondition(format!(
                "{what} needs a schwartz-class input (tag {:?}, boundary ratio {:.3e})",
                self.decay,
                self.boundary_ratio()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "grid": self.grid,
            "k": self.k,
            "values": nest_values(&self.values, &vec![self.grid.points; self.grid.n], self.k),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let grid: GridSpec = serde_json::from_value(value.get("grid").cloned().unwrap_or(Value::Null))
            .map_err(|e| Error::Format(format!("grid: {e}")))?;
        let grid = GridSpec::new(grid.n, grid.half_width, grid.points)?;
        let k = json_k(value)?;
        let mut values = Vec::with_capacity(grid.total_points() * k * k);
        flatten_values(
            value.get("values").ok_or_else(|| Error::Format("missing values".into()))?,
            grid.n,
            k,
            &mut values,
        )?;
        Self::classified(grid, k, values)
    }
}

pub(crate) fn json_k(value: &Value) -> Result<usize> {
    value
        .get("k")
        .and_then(Value::as_u64)
        .map(|k| k as usize)
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::Format("missing or invalid k".into()))
}

/// Nests a flat sample buffer as `[d0][d1]...[k][k][re, im]`.
pub(crate) fn nest_values(values: &[C64], dims: &[usize], k: usize) -> Value {
    fn rec(values: &[C64], dims: &[usize], k: usize) -> Value {
        match dims.split_first() {
            None => Value::Array(
                values
                    .chunks_exact(k)
                    .map(|row| Value::Array(row.iter().map(|z| json!([z.re, z.im])).collect()))
                    .collect(),
            ),
            Some((&d, rest)) => {
                let stride = values.len() / d;
                Value::Array(values.chunks_exact(stride).map(|c| rec(c, rest, k)).collect())
            }
        }
    }
    rec(values, dims, k)
}

pub(crate) fn flatten_values(value: &Value, depth: usize, k: usize, out: &mut Vec<C64>) -> Result<()> {
    let arr = value.as_array().ok_or_else(|| Error::Format("expected array".into()))?;
    if depth == 0 {
        if arr.len() != k {
            return Err(Error::Format(format!("expected {k} rows")));
        }
        for row in arr {
            let row = row.as_array().filter(|r| r.len() == k).ok_or_else(|| Error::Format("bad row".into()))?;
            for z in row {
                let pair = z.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Format("bad pair".into()))?;
                let re = pair[0].as_f64().ok_or_else(|| Error::Format("bad real part".into()))?;
                let im = pair[1].as_f64().ok_or_else(|| Error::Format("bad imaginary part".into()))?;
                out.push(C64::new(re, im));
            }
        }
        return Ok(());
    }
    for item in arr {
        flatten_values(item, depth - 1, k, out)?;
    }
    Ok(())
}

/// Sums `term(i)` for `i in range` over a balanced binary tree (split at the
/// midpoint, left before right), so results do not depend on scheduling.
pub(crate) fn pairwise_sum<F>(len: usize, width: usize, term: &F) -> Vec<C64>
where
    F: Fn(usize, &mut [C64]),
{
    fn rec<F: Fn(usize, &mut [C64])>(lo: usize, hi: usize, width: usize, term: &F) -> Vec<C64> {
        if hi - lo == 1 {
            let mut out = vec![ZERO; width];
            term(lo, &mut out);
            return out;
        }
        let mid = lo + (hi - lo) / 2;
        let mut left = rec(lo, mid, width, term);
        let right = rec(mid, hi, width, term);
        for (l, r) in left.iter_mut().zip(&right) {
            *l += r;
        }
        left
    }
    if len == 0 {
        return vec![ZERO; width];
    }
    rec(0, len, width, term)
}

/// Module inner product `<f, g> = int f(x)^* g(x) dx` by the rectangle rule.
pub fn module_inner(f: &ModuleFunction, g: &ModuleFunction) -> Result<AlgebraElement> {
    f.check_compatible(g)?;
    let k = f.k;
    let k2 = k * k;
    let vol = f.grid.cell_volume();
    let sum = pairwise_sum(f.grid.total_points(), k2, &|i, out: &mut [C64]| {
        block_adjoint_mul_acc(k, &f.values[i * k2..(i + 1) * k2], &g.values[i * k2..(i + 1) * k2], out)
    });
    AlgebraElement::from_entries(k, sum.into_iter().map(|z| z * vol).collect())
}

/// `||f||_2 = ||<f, f>||^{1/2}`.
pub fn module_norm(f: &ModuleFunction) -> Result<f64> {
    Ok(crate::algebra::cstar_norm(&module_inner(f, f)?)?.sqrt())
}

/// `(int ||f(x)||^2 dx)^{1/2}`, which dominates the module norm.
pub fn l2_norm(f: &ModuleFunction) -> f64 {
    let k2 = f.k * f.k;
    let s: f64 = f
        .values
        .chunks_exact(k2)
        .map(|b| block_norm(f.k, b).powi(2))
        .sum();
    (s * f.grid.cell_volume()).sqrt()
}

/// Relative module-norm distance `||f - g||_2 / ||g||_2` (absolute when `g = 0`).
pub fn relative_distance(f: &ModuleFunction, g: &ModuleFunction) -> Result<f64> {
    let diff = module_norm(&f.sub(g)?)?;
    let scale = module_norm(g)?;
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Generators for randomized test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// Gaussian times a degree-one polynomial, tensored with a random element.
    GaussianPoly,
    /// Gaussian modulated by a plane wave.
    ModulatedGaussian,
    /// Compactly supported smooth bump.
    Bump,
    /// Sum of low-frequency plane waves with frequencies on the dual grid.
    BoundedField,
}

impl Recipe {
    pub const ALL: [Recipe; 4] = [
        Recipe::GaussianPoly,
        Recipe::ModulatedGaussian,
        Recipe::Bump,
        Recipe::BoundedField,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Recipe::GaussianPoly => "gaussian-poly",
            Recipe::ModulatedGaussian => "modulated-gaussian",
            Recipe::Bump => "bump",
            Recipe::BoundedField => "bounded-field",
        }
    }

    pub fn decay(&self) -> DecayClass {
        match self {
            Recipe::BoundedField => DecayClass::Bounded,
            _ => DecayClass::Schwartz,
        }
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::UnknownRecipe(s.to_string()))
    }
}

/// Random element with independent complex normal entries of variance `1/k`.
pub fn random_element(rng: &mut CounterRng, k: usize) -> AlgebraElement {
    let scale = (2.0 * k as f64).sqrt().recip();
    let entries = (0..k * k)
        .map(|_| C64::new(rng.normal(), rng.normal()) * scale)
        .collect();
    AlgebraElement::from_entries(k, entries).expect("k > 0")
}

/// Deterministic test function for `(recipe, seed)`. Widths scale with the
/// box so that Schwartz recipes meet the decay invariant on any grid.
pub fn make_test_function(recipe: Recipe, grid: GridSpec, k: usize, seed: u64) -> Result<ModuleFunction> {
    let mut rng = CounterRng::new(seed).split(recipe as u64 + 1);
    let n = grid.n;
    let l = grid.half_width;
    let coeff = random_element(&mut rng, k);
    let ce = coeff.entries().to_vec();
    let center: Vec<f64> = (0..n).map(|_| rng.uniform_in(-l / 16.0, l / 16.0)).collect();
    match recipe {
        Recipe::GaussianPoly => {
            let sigma = rng.uniform_in(0.5, 1.0) * l / 8.0;
            let slope: Vec<f64> = (0..n).map(|_| rng.uniform_in(-0.5, 0.5)).collect();
            ModuleFunction::from_fn(grid, k, DecayClass::Schwartz, |x, out| {
                let mut r2 = 0.0;
                let mut poly = 1.0;
                for d in 0..n {
                    let t = (x[d] - center[d]) / sigma;
                    r2 += t * t;
                    poly += slope[d] * t;
                }
                let g = poly * (-0.5 * r2).exp();
                for (o, c) in out.iter_mut().zip(&ce) {
                    *o = c * g;
                }
            })
        }
        Recipe::ModulatedGaussian => {
            let sigma = rng.uniform_in(0.5, 1.0) * l / 8.0;
            let wmax = (0.25 * PI / grid.spacing()).min(2.0);
            let omega: Vec<f64> = (0..n).map(|_| rng.uniform_in(-wmax, wmax)).collect();
            ModuleFunction::from_fn(grid, k, DecayClass::Schwartz, |x, out| {
                let mut r2 = 0.0;
                let mut phase = 0.0;
                for d in 0..n {
                    r2 += ((x[d] - center[d]) / sigma).powi(2);
                    phase += omega[d] * x[d];
                }
                let g = C64::from_polar((-0.5 * r2).exp(), phase);
                for (o, c) in out.iter_mut().zip(&ce) {
                    *o = c * g;
                }
            })
        }
        Recipe::Bump => {
            let radius = rng.uniform_in(0.4, 0.6) * l;
            ModuleFunction::from_fn(grid, k, DecayClass::Schwartz, |x, out| {
                let r: f64 = x.iter().zip(&center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
                let g = bump_profile(2.0 * r / radius);
                for (o, c) in out.iter_mut().zip(&ce) {
                    *o = c * g;
                }
            })
        }
        Recipe::BoundedField => {
            let dual_step = PI / l;
            let waves: Vec<(Vec<f64>, Vec<C64>)> = (0..3)
                .map(|_| {
                    let freq = (0..n)
                        .map(|_| (rng.uniform_in(-3.5, 3.5).round()) * dual_step)
                        .collect();
                    (freq, random_element(&mut rng, k).entries().to_vec())
                })
                .collect();
            ModuleFunction::from_fn(grid, k, DecayClass::Bounded, |x, out| {
                out.copy_from_slice(&ce);
                for (freq, c) in &waves {
                    let phase: f64 = freq.iter().zip(x).map(|(w, y)| w * y).sum();
                    let e = C64::from_polar(1.0, phase);
                    for (o, ci) in out.iter_mut().zip(c) {
                        *o += ci * e;
                    }
                }
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cstar_norm;

    fn grid1() -> GridSpec {
        GridSpec::new(1, 10.0, 256).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = GridSpec::new(2, 6.0, 64).unwrap();
        assert_eq!(g.spacing() * g.points as f64, 2.0 * g.half_width);
        let d = g.dual();
        assert!((d.spacing() - PI / g.half_width).abs() < 1e-14);
        assert!((d.half_width - PI / g.spacing()).abs() < 1e-12);
        assert!(d.dual().approx_eq(&g));
        assert!(GridSpec::new(1, 1.0, 100).is_err());
        assert!(GridSpec::new(1, -1.0, 64).is_err());
        let idx = g.multi_index(130);
        assert_eq!(g.flat_index(&idx), 130);
    }

    #[test]
    fn gaussian_self_inner_product_is_sqrt_pi() {
        // exp(-x^2/2) squared integrates to sqrt(pi).
        let f = ModuleFunction::gaussian(grid1(), &[0.0], 1.0, &AlgebraElement::identity(2)).unwrap();
        let ip = module_inner(&f, &f).unwrap();
        let expected = AlgebraElement::scalar(2, C64::new(PI.sqrt(), 0.0));
        assert!(cstar_norm(&ip.sub(&expected)).unwrap() < 1e-6);
    }

    #[test]
    fn disjoint_supports_are_orthogonal() {
        let g = grid1();
        let f = ModuleFunction::from_fn(g, 2, DecayClass::Bounded, |x, out| {
            out.fill(if x[0] < 0.0 { C64::new(1.0, 0.0) } else { ZERO })
        })
        .unwrap();
        let h = ModuleFunction::from_fn(g, 2, DecayClass::Bounded, |x, out| {
            out.fill(if x[0] >= 0.0 { C64::new(0.0, 2.0) } else { ZERO })
        })
        .unwrap();
        assert_eq!(module_inner(&f, &h).unwrap(), AlgebraElement::zeros(2));
    }

    #[test]
    fn zero_function_has_zero_norm() {
        assert_eq!(module_norm(&ModuleFunction::zeros(grid1(), 2)).unwrap(), 0.0);
    }

    #[test]
    fn scalar_module_norm_is_l2_norm() {
        let f = make_test_function(Recipe::ModulatedGaussian, grid1(), 1, 3).unwrap();
        assert!((module_norm(&f).unwrap() - l2_norm(&f)).abs() < 1e-12 * l2_norm(&f));
    }

    #[test]
    fn recipes_are_deterministic_and_tagged() {
        for grid in [grid1(), GridSpec::new(2, 6.0, 64).unwrap()] {
            for recipe in Recipe::ALL {
                let a = make_test_function(recipe, grid, 2, 0).unwrap();
                let b = make_test_function(recipe, grid, 2, 0).unwrap();
                assert_eq!(a, b);
                assert_eq!(a.decay(), recipe.decay());
                if recipe.decay() == DecayClass::Schwartz {
                    assert!(a.satisfies_decay(), "{} on {grid:?}", recipe.name());
                } else {
                    assert!(a.sup_norm().is_finite());
                }
            }
        }
    }

    #[test]
    fn unknown_recipe_is_an_error() {
        assert!(matches!("sinc".parse::<Recipe>(), Err(Error::UnknownRecipe(_))));
        assert_eq!("bump".parse::<Recipe>().unwrap(), Recipe::Bump);
    }

    #[test]
    fn schwartz_tag_is_verified() {
        let g = grid1();
        let ones = vec![C64::new(1.0, 0.0); g.total_points()];
        assert!(ModuleFunction::new(g, 1, ones.clone(), DecayClass::Schwartz).is_err());
        assert_eq!(
            ModuleFunction::classified(g, 1, ones).unwrap().decay(),
            DecayClass::Bounded
        );
    }

    #[test]
    fn grid_mismatch_is_a_shape_error() {
        let f = ModuleFunction::zeros(grid1(), 2);
        let g = ModuleFunction::zeros(GridSpec::new(1, 10.0, 128).unwrap(), 2);
        assert!(matches!(module_inner(&f, &g), Err(Error::Shape(_))));
    }

    #[test]
    fn json_round_trip() {
        let g = GridSpec::new(2, 3.0, 8).unwrap();
        let f = make_test_function(Recipe::BoundedField, g, 2, 5).unwrap();
        let back = ModuleFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid(), f.grid());
    }

    #[test]
    fn refinement_changes_gaussian_inner_product_little() {
        let coarse = GridSpec::new(1, 10.0, 256).unwrap();
        let fine = GridSpec::new(1, 20.0, 1024).unwrap();
        let c = AlgebraElement::identity(2);
        let a = module_inner(
            &ModuleFunction::gaussian(coarse, &[0.3], 0.9, &c).unwrap(),
            &ModuleFunction::gaussian(coarse, &[0.3], 0.9, &c).unwrap(),
        )
        .unwrap();
        let b = module_inner(
            &ModuleFunction::gaussian(fine, &[0.3], 0.9, &c).unwrap(),
            &ModuleFunction::gaussian(fine, &[0.3], 0.9, &c).unwrap(),
        )
        .unwrap();
        assert!(cstar_norm(&a.sub(&b)).unwrap() <= 1e-6 * cstar_norm(&b).unwrap());
    }
}
