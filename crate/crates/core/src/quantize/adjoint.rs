//! Symbol of the adjoint operator.
//!
//! `p(y, xi) = int int e^{-i z.eta} a(y - z, xi - eta)^* dz deta / (2 pi)^n` is an
//! oscillatory integral. With the damping `e^{-eps(|z|^2 + |eta|^2)}` it is a
//! convolution of `a^*` with a Gaussian-chirp kernel whose transform is known
//! in closed form, so each damped integral costs two phase-space FFTs:
//!
//! `p_eps^(s, t) = prod_d (1 + 4 eps^2)^{-1/2} exp((i s_d t_d - eps(s_d^2 + t_d^2)) / (1 + 4 eps^2)) a^*^(s, t)`.
//!
//! Each damped integral is divided by the kernel's total mass
//! `(1 + 4 eps^2)^{-n/2}`, so constants are reproduced at every `eps`; the
//! limit `eps -> 0` is unchanged and is taken by polynomial extrapolation
//! over the schedule. Off the sampled box the symbol is continued
//! periodically, which is what makes the undamped multiplier the exact adjoint of the
//! discretized operator.

use crate::algebra::{block_adjoint, block_norm, C64, ZERO};
use crate::error::{EpsilonStep, Error, Result};
use crate::fourier::{transform_axes, Axis, Direction};
use crate::symbol::{SampledSymbol, Symbol};

/// Damping parameters, tried in order, and the convergence tolerance on
/// successive extrapolated estimates (relative to `sup ||a||`).
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationSchedule {
    pub epsilons: Vec<f64>,
    pub tolerance: f64,
}

impl Default for RegularizationSchedule {
    fn default() -> Self {
        Self {
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            tolerance: 1e-4,
        }
    }
}

impl RegularizationSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() < 2 {
            return Err(Error::InvalidInput("epsilon schedule needs at least two entries".into()));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidInput("epsilon schedule entries must be positive".into()));
        }
        for (i, a) in self.epsilons.iter().enumerate() {
            if self.epsilons[..i].contains(a) {
                return Err(Error::InvalidInput("epsilon schedule entries must be distinct".into()));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        Ok(())
    }
}

fn sup_block_norm(k: usize, values: &[C64]) -> f64 {
    values.chunks_exact(k * k).map(|b| block_norm(k, b)).fold(0.0, f64::max)
}

/// Symbol `p` with `<O(a) phi, psi> = <phi, O(p) psi>`.
///
/// Returns a convergence error carrying the per-step changes when the last
/// two extrapolated estimates differ by more than the tolerance.
pub fn adjoint_symbol(a: &SampledSymbol, schedule: &RegularizationSchedule) -> Result<SampledSymbol> {
    adjoint_symbol_traced(a, schedule).map(|(p, _)| p)
}

/// [`adjoint_symbol`] together with the change recorded at each step.
pub fn adjoint_symbol_traced(
    a: &SampledSymbol,
    schedule: &RegularizationSchedule,
) -> Result<(SampledSymbol, Vec<EpsilonStep>)> {
    schedule.validate()?;
    let (gx, gxi) = (a.grid_x(), a.grid_xi());
    let k = a.k();
    let k2 = k * k;
    let n = gx.n;

    let mut spec = vec![ZERO; a.values().len()];
    for (dst, src) in spec.chunks_exact_mut(k2).zip(a.values().chunks_exact(k2)) {
        block_adjoint(k, src, dst);
    }
    let mut axes = vec![Axis::of(&gx); n];
    axes.extend(vec![Axis::of(&gxi); n]);
    transform_axes(&mut spec, &axes, k2, Direction::Forward);
    let (sx, tx) = (gx.dual(), gxi.dual());
    let mut back_axes = vec![Axis::of(&sx); n];
    back_axes.extend(vec![Axis::of(&tx); n]);

    let damped = |eps: f64| -> Vec<C64> {
        let q = 1.0 + 4.0 * eps * eps;
        let s_coord: Vec<f64> = (0..sx.points).map(|i| sx.coordinate(i)).collect();
        let t_coord: Vec<f64> = (0..tx.points).map(|i| tx.coordinate(i)).collect();
        let nt = tx.total_points();
        let mut out = spec.clone();
        let mut s_idx = vec![0; n];
        for (b, block) in out.chunks_exact_mut(k2).enumerate() {
            let (si, ti) = (b / nt, b % nt);
            let mut rest = si;
            for d in (0..n).rev() {
                s_idx[d] = rest % sx.points;
                rest /= sx.points;
            }
            let mut rest = ti;
            let mut expo = C64::new(0.0, 0.0);
            for d in (0..n).rev() {
                let t = t_coord[rest % tx.points];
                let s = s_coord[s_idx[d]];
                rest /= tx.points;
                expo += C64::new(-eps * (s * s + t * t), s * t);
            }
            let factor = (expo / q).exp();
            for z in block {
                *z *= factor;
            }
        }
        transform_axes(&mut out, &back_axes, k2, Direction::Inverse);
        out
    };

    let scale = sup_block_norm(k, a.values()).max(f64::MIN_POSITIVE);
    // Neville tableau evaluated at eps = 0, finest eps first; `row[j]`
    // interpolates points i-j..=i.
    let mut eps = schedule.epsilons.clone();
    eps.sort_by(f64::total_cmp);
    let mut prev_row: Vec<Vec<C64>> = Vec::new();
    let mut best: Option<Vec<C64>> = None;
    let mut trace = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let mut row = vec![damped(e)];
        for j in 1..=i {
            let (xl, xr) = (eps[i - j], eps[i]);
            let (left, right) = (&prev_row[j - 1], &row[j - 1]);
            let next: Vec<C64> = left
                .iter()
                .zip(right)
                .map(|(l, r)| (r * xl - l * xr) / (xl - xr))
                .collect();
            row.push(next);
        }
        let estimate = row.last().expect("row non-empty").clone();
        if let Some(b) = &best {
            let diff: Vec<C64> = estimate.iter().zip(b).map(|(x, y)| x - y).collect();
            trace.push(EpsilonStep {
                epsilon: e,
                change: sup_block_norm(k, &diff) / scale,
            });
        }
        best = Some(estimate);
        prev_row = row;
    }
    let last = trace.last().map(|s| s.change).unwrap_or(f64::INFINITY);
    if !(last <= schedule.tolerance) {
        return Err(Error::Convergence {
            message: format!(
                "successive extrapolants differ by {last:.3e} (tolerance {:.1e})",
                schedule.tolerance
            ),
            trace,
        });
    }
    Ok((SampledSymbol::new(gx, gxi, k, best.expect("schedule non-empty"))?, trace))
}
