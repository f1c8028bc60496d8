//! Rieffel's deformed product
//! `F x_J G(x) = (2 pi)^{-n} int int e^{i u.v} F(x + J u) G(x + v) du dv`
//! and its left and right regular representations.
//!
//! Integrating out `v` gives `(2 pi)^{-n/2} int F(x - J u) e^{i u.x} G^(u) du`;
//! expanding `F` in its spectrum turns this into a twisted convolution
//!
//! `(F x_J G)^(zeta) = (2 pi)^{-n/2} int F^(eta) G^(zeta - eta) e^{-i eta.J(zeta - eta)} deta`,
//!
//! evaluated on the dual grid with indices wrapped modulo `N`. Off the box
//! both factors are their trigonometric interpolants, i.e. periodic. For
//! `J = 0` the sum is exactly the spectrum of the pointwise product, and a
//! constant factor reproduces the other one exactly.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{block_frobenius, block_mul_acc_scaled, C64, ZERO};
use crate::error::{Error, Result};
use crate::fourier::{from_spectrum, spectrum};
use crate::sampling::{DecayClass, GridSpec, ModuleFunction};
use crate::symbol::bump_profile;

/// Spectral blocks of either factor below this fraction of the largest one
/// are skipped.
const SPECTRAL_FLOOR: f64 = 1e-15;

/// A real skew-symmetric `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DeformationMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries for J, got {}", n * n, entries.len())));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("J has non-finite entries".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if entries[i * n + j] != -entries[j * n + i] {
                    return Err(Error::InvalidInput(format!("J is not skew-symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// `[[0, theta], [-theta, 0]]`.
    pub fn theta(theta: f64) -> Self {
        Self {
            n: 2,
            entries: vec![0.0, theta, -theta, 0.0],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&e| e == 0.0)
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entries[i * self.n + j] * u[j]).sum())
            .collect()
    }
}

fn check(f: &ModuleFunction, g: &ModuleFunction, j: &DeformationMatrix) -> Result<()> {
    f.check_compatible(g)?;
    if j.n() != f.grid().n {
        return Err(Error::Shape(format!("J is {}x{} but the grid has n = {}", j.n(), j.n(), f.grid().n)));
    }
    Ok(())
}

/// `F x_J G` on the common grid. At least one factor must be Schwartz-class;
/// the other may be a bounded field. The result is classified by the
/// boundary decay test.
pub fn deformed_product(f: &ModuleFunction, g: &ModuleFunction, j: &DeformationMatrix) -> Result<ModuleFunction> {
    check(f, g, j)?;
    if f.decay() != DecayClass::Schwartz && g.decay() != DecayClass::Schwartz {
        return Err(Error::Precondition("deformed product needs a schwartz-class factor".into()));
    }
    if f.decay() == DecayClass::Schwartz {
        f.require_schwartz("deformed_product")?;
    }
    if g.decay() == DecayClass::Schwartz {
        g.require_schwartz("deformed_product")?;
    }
    let out = twisted_product(f, g, j);
    ModuleFunction::classified(*out.grid(), out.k(), out.into_values())
}

pub(crate) fn twisted_product(f: &ModuleFunction, g: &ModuleFunction, j: &DeformationMatrix) -> ModuleFunction {
    let grid = *f.grid();
    let n = grid.n;
    let points = grid.points;
    let half = points / 2;
    let k = f.k();
    let k2 = k * k;
    let fs = spectrum(f);
    let gs = spectrum(g);
    let dual = *fs.grid();
    let total = dual.total_points();
    let scale = dual.cell_volume() / (2.0 * PI).powf(n as f64 / 2.0);
    let step = dual.spacing();

    let norms: Vec<f64> = fs.values().chunks_exact(k2).map(block_frobenius).collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    let active: Vec<usize> = (0..total).filter(|&m| norms[m] > SPECTRAL_FLOOR * max).collect();
    let g_norms: Vec<f64> = gs.values().chunks_exact(k2).map(block_frobenius).collect();
    let g_max = g_norms.iter().copied().fold(0.0, f64::max);
    let g_live: Vec<bool> = g_norms.iter().map(|&v| v > SPECTRAL_FLOOR * g_max).collect();
    let idx: Vec<usize> = (0..total).flat_map(|m| dual.multi_index(m)).collect();
    // e^{-i eta.J u} = prod_d e^{-i (J^T eta)_d u_d}, tabulated per axis over the
    // N possible u_d, with the quadrature weight folded into the first axis.
    let trivial = j.is_zero();
    let phases: Vec<C64> = if trivial {
        Vec::new()
    } else {
        let mut phases = vec![ZERO; active.len() * n * points];
        for (a, &m) in active.iter().enumerate() {
            let eta = dual.point(m);
            for c in 0..n {
                let w: f64 = (0..n).map(|r| j.entries()[r * n + c] * eta[r]).sum();
                let amp = if c == 0 { scale } else { 1.0 };
                for p in 0..points {
                    let u = (p as f64 - half as f64) * step;
                    phases[(a * n + c) * points + p] = C64::from_polar(amp, -w * u);
                }
            }
        }
        phases
    };
    let unit = C64::new(scale, 0.0);

    let mut out = vec![ZERO; total * k2];
    out.par_chunks_mut(k2).enumerate().for_each(|(z, dst)| {
        let zi = &idx[z * n..(z + 1) * n];
        let mut acc = [ZERO; 64];
        for (a, &m1) in active.iter().enumerate() {
            // u index per axis: zeta - eta + N/2, wrapped
            let ei = &idx[m1 * n..(m1 + 1) * n];
            let mut u_idx = 0;
            let mut phase = unit;
            for d in 0..n {
                let mut ud = zi[d] + points + half - ei[d];
                while ud >= points {
                    ud -= points;
                }
                u_idx = u_idx * points + ud;
                if !trivial {
                    let t = phases[(a * n + d) * points + ud];
                    phase = if d == 0 { t } else { phase * t };
                }
            }
            if g_live[u_idx] {
                block_mul_acc_scaled(k, phase, fs.block(m1), gs.block(u_idx), &mut acc[..k2]);
            }
        }
        dst.copy_from_slice(&acc[..k2]);
    });
    let spec = ModuleFunction::new(dual, k, out, DecayClass::Bounded).expect("shape preserved");
    from_spectrum(&spec)
}

/// `L_F phi = F x_J phi`.
pub fn left_rep_apply(f: &ModuleFunction, phi: &ModuleFunction, j: &DeformationMatrix) -> Result<ModuleFunction> {
    phi.require_schwartz("left_rep_apply")?;
    deformed_product(f, phi, j)
}

/// `R_G phi = phi x_J G`.
pub fn right_rep_apply(g: &ModuleFunction, phi: &ModuleFunction, j: &DeformationMatrix) -> Result<ModuleFunction> {
    phi.require_schwartz("right_rep_apply")?;
    deformed_product(phi, g, j)
}

/// `[L_F, R_G] phi = L_F(R_G phi) - R_G(L_F phi)`.
pub fn commutator_apply(
    f: &ModuleFunction,
    g: &ModuleFunction,
    phi: &ModuleFunction,
    j: &DeformationMatrix,
) -> Result<ModuleFunction> {
    let lr = left_rep_apply(f, &right_rep_apply(g, phi, j)?, j)?;
    let rl = right_rep_apply(g, &left_rep_apply(f, phi, j)?, j)?;
    lr.sub(&rl)
}

/// The bump `beta_k` on the dual of `grid`: radial profile scaled to
/// support radius `1 / k_index`, normalized to unit mass.
pub fn approximate_identity_bump(k_index: usize, grid: &GridSpec, dim: usize) -> Result<ModuleFunction> {
    if k_index == 0 {
        return Err(Error::InvalidInput("approximate identity index must be positive".into()));
    }
    let dual = grid.dual();
    let radius = 1.0 / k_index as f64;
    if radius < 4.0 * dual.spacing() {
        return Err(Error::Resolution(format!(
            "bump radius {radius} is below four frequency steps ({:.4})",
            dual.spacing()
        )));
    }
    let profile: Vec<f64> = (0..dual.total_points())
        .map(|m| {
            let r = dual.point(m).iter().map(|c| c * c).sum::<f64>().sqrt();
            bump_profile(2.0 * r / radius)
        })
        .collect();
    let mass: f64 = profile.iter().sum::<f64>() * dual.cell_volume();
    let k2 = dim * dim;
    let mut values = vec![ZERO; dual.total_points() * k2];
    for (block, &p) in values.chunks_exact_mut(k2).zip(&profile) {
        for d in 0..dim {
            block[d * dim + d] = C64::new(p / mass, 0.0);
        }
    }
    ModuleFunction::new(dual, dim, values, DecayClass::Schwartz)
}

/// `e_k = (2 pi)^{n/2} F^{-1}(beta_k u_k)`, a bounded field on `grid` that
/// tends to the unit as `k_index` grows.
pub fn approximate_identity(k_index: usize, grid: &GridSpec, dim: usize) -> Result<ModuleFunction> {
    let bump = approximate_identity_bump(k_index, grid, dim)?;
    let e = from_spectrum(&bump);
    let scale = (2.0 * PI).powf(grid.n as f64 / 2.0);
    Ok(e.scale(C64::new(scale, 0.0)).with_decay(DecayClass::Bounded))
}
