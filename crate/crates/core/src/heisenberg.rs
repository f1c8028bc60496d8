//! Heisenberg action `E_{z,zeta,t} f(x) = e^{it} e^{i zeta.x} f(x - z)` and
//! the conjugated operators `T_{z,zeta} = E^{-1} T E`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{C64, ZERO};
use crate::deformation::{left_rep_apply, right_rep_apply, DeformationMatrix};
use crate::error::{Error, Result};
use crate::fourier::translate_bandlimited;
use crate::quantize::quantize_apply;
use crate::report::{Metric, VerificationReport};
use crate::sampling::{module_norm, DecayClass, ModuleFunction};
use crate::symbol::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    FromSymbol,
    LeftRep,
    RightRep,
    Composite,
}

type Action = dyn Fn(&ModuleFunction) -> Result<ModuleFunction> + Send + Sync;

/// An operator on sampled module functions, held as a closure over its data.
#[derive(Clone)]
pub struct OperatorHandle {
    kind: OperatorKind,
    label: String,
    action: Arc<Action>,
}

impl fmt::Debug for OperatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorHandle")
            .field("kind", &self.kind)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl OperatorHandle {
    pub fn new<F>(kind: OperatorKind, label: impl Into<String>, action: F) -> Self
    where
        F: Fn(&ModuleFunction) -> Result<ModuleFunction> + Send + Sync + 'static,
    {
        Self {
            kind,
            label: label.into(),
            action: Arc::new(action),
        }
    }

    /// `O(a)`.
    pub fn from_symbol(a: Arc<dyn Symbol>) -> Self {
        Self::new(OperatorKind::FromSymbol, "O(a)", move |phi| quantize_apply(a.as_ref(), phi))
    }

    /// `L_F`.
    pub fn left_rep(f: ModuleFunction, j: DeformationMatrix) -> Self {
        Self::new(OperatorKind::LeftRep, "L_F", move |phi| left_rep_apply(&f, phi, &j))
    }

    /// `R_G`.
    pub fn right_rep(g: ModuleFunction, j: DeformationMatrix) -> Self {
        Self::new(OperatorKind::RightRep, "R_G", move |phi| right_rep_apply(&g, phi, &j))
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, phi: &ModuleFunction) -> Result<ModuleFunction> {
        (self.action)(phi)
    }

    /// `self o inner`.
    pub fn compose(&self, inner: &OperatorHandle) -> Self {
        let (outer, inner_op) = (self.clone(), inner.clone());
        let label = format!("{} o {}", self.label, inner.label);
        Self::new(OperatorKind::Composite, label, move |phi| outer.apply(&inner_op.apply(phi)?))
    }

    /// `self - other`.
    pub fn difference(&self, other: &OperatorHandle) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let label = format!("{} - {}", self.label, other.label);
        Self::new(OperatorKind::Composite, label, move |phi| a.apply(phi)?.sub(&b.apply(phi)?))
    }

    /// `[self, other] = self o other - other o self`.
    pub fn commutator(&self, other: &OperatorHandle) -> Self {
        self.compose(other).difference(&other.compose(self))
    }
}

/// How translations by `z` are carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslateMode {
    /// Index rotation; `z` must be a multiple of the grid step.
    Exact,
    /// Spectral shift, valid for any `z`.
    Bandlimited,
}

fn shift_exact(f: &ModuleFunction, z: &[f64]) -> Result<ModuleFunction> {
    let grid = *f.grid();
    let steps: Vec<isize> = z
        .iter()
        .map(|&d| {
            grid.steps_for(d).ok_or_else(|| {
                Error::Precondition(format!("translation {d} is not a multiple of the grid step {}", grid.spacing()))
            })
        })
        .collect::<Result<_>>()?;
    let k2 = f.k() * f.k();
    let np = grid.points as isize;
    let periodic = f.decay() == DecayClass::Bounded;
    let mut values = vec![ZERO; f.values().len()];
    for (i, block) in values.chunks_exact_mut(k2).enumerate() {
        let idx = grid.multi_index(i);
        let mut src = 0usize;
        let mut inside = true;
        for (d, &s) in steps.iter().enumerate() {
            let mut j = idx[d] as isize - s;
            if periodic {
                j = j.rem_euclid(np);
            } else if j < 0 || j >= np {
                inside = false;
                break;
            }
            src = src * grid.points + j as usize;
        }
        if inside {
            block.copy_from_slice(f.block(src));
        }
    }
    ModuleFunction::new(grid, f.k(), values, DecayClass::Bounded).map(|g| g.with_decay(f.decay()))
}

/// `E_{z,zeta,t} f` with `z` on the grid.
pub fn heisenberg_translate(f: &ModuleFunction, z: &[f64], zeta: &[f64], t: f64) -> Result<ModuleFunction> {
    heisenberg_translate_with(f, z, zeta, t, TranslateMode::Exact)
}

pub fn heisenberg_translate_with(
    f: &ModuleFunction,
    z: &[f64],
    zeta: &[f64],
    t: f64,
    mode: TranslateMode,
) -> Result<ModuleFunction> {
    let grid = *f.grid();
    if z.len() != grid.n || zeta.len() != grid.n {
        return Err(Error::Shape("translation dimension mismatch".into()));
    }
    let mut g = match mode {
        TranslateMode::Exact => shift_exact(f, z)?,
        TranslateMode::Bandlimited => translate_bandlimited(f, z)?,
    };
    let k2 = f.k() * f.k();
    let mut x = vec![0.0; grid.n];
    for (i, block) in g.values_mut().chunks_exact_mut(k2).enumerate() {
        grid.point_into(i, &mut x);
        let phase = t + zeta.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let e = C64::from_polar(1.0, phase);
        for v in block {
            *v *= e;
        }
    }
    if f.decay() == DecayClass::Schwartz && !g.satisfies_decay() {
        g = g.with_decay(DecayClass::Bounded);
    }
    Ok(g)
}

/// `E_{z,zeta,t}^{-1} = E_{-z,-zeta,-t-zeta.z}`.
pub fn heisenberg_inverse(f: &ModuleFunction, z: &[f64], zeta: &[f64], t: f64, mode: TranslateMode) -> Result<ModuleFunction> {
    let nz: Vec<f64> = z.iter().map(|v| -v).collect();
    let nzeta: Vec<f64> = zeta.iter().map(|v| -v).collect();
    let tz = t + zeta.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    heisenberg_translate_with(f, &nz, &nzeta, -tz, mode)
}

/// `T_{z,zeta} = E_{z,zeta,t}^{-1} T E_{z,zeta,t}`, which does not depend on `t`.
pub fn conjugate_operator(
    op: &OperatorHandle,
    z: &[f64],
    zeta: &[f64],
    t: f64,
    mode: TranslateMode,
) -> OperatorHandle {
    let (inner, z, zeta) = (op.clone(), z.to_vec(), zeta.to_vec());
    let label = format!("{}_(z,zeta)", op.label());
    OperatorHandle::new(OperatorKind::Composite, label, move |phi| {
        let moved = heisenberg_translate_with(phi, &z, &zeta, t, mode)?;
        heisenberg_inverse(&inner.apply(&moved)?, &z, &zeta, t, mode)
    })
}

/// Builds `T_{z,zeta}` for a given `(z, zeta)`.
pub type FamilyBuilder<'a> = dyn Fn(&[f64], &[f64]) -> Result<OperatorHandle> + 'a;

/// `d_z^beta d_zeta^gamma T_{z,zeta} phi` at `(0, 0)` by centered differences
/// of half-width `step`.
pub fn smoothness_probe(
    builder: &FamilyBuilder<'_>,
    phi: &ModuleFunction,
    beta: &[u8],
    gamma: &[u8],
    step: f64,
) -> Result<ModuleFunction> {
    let n = phi.grid().n;
    if beta.len() != n || gamma.len() != n || beta.iter().chain(gamma).any(|&c| c > 1) {
        return Err(Error::InvalidInput("derivative orders must be 0/1 vectors of length n".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    if beta.contains(&1) && step < phi.grid().spacing() * (1.0 - 1e-9) {
        return Err(Error::Resolution(format!(
            "step {step} is below the grid spacing {}",
            phi.grid().spacing()
        )));
    }
    let coords: Vec<usize> = (0..2 * n)
        .filter(|&c| if c < n { beta[c] == 1 } else { gamma[c - n] == 1 })
        .collect();
    let denom = (2.0 * step).powi(coords.len() as i32);
    let mut acc: Option<ModuleFunction> = None;
    for signs in 0..1usize << coords.len() {
        let mut z = vec![0.0; n];
        let mut zeta = vec![0.0; n];
        let mut weight = 1.0 / denom;
        for (b, &c) in coords.iter().enumerate() {
            let s = if (signs >> b) & 1 == 1 { -1.0 } else { 1.0 };
            weight *= s;
            if c < n {
                z[c] = s * step;
            } else {
                zeta[c - n] = s * step;
            }
        }
        let term = builder(&z, &zeta)?.apply(phi)?.scale(C64::new(weight, 0.0));
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.expect("at least one term"))
}

/// `max ||T_{z,zeta} phi - T_{z - J zeta, 0} phi||_2 / ||phi||_2` over the samples.
pub fn heissmooth_deviation(
    op: &OperatorHandle,
    j: &DeformationMatrix,
    samples: &[(Vec<f64>, Vec<f64>)],
    phis: &[ModuleFunction],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (z, zeta) in samples {
        if z.len() != j.n() || zeta.len() != j.n() {
            return Err(Error::Shape("sample dimension mismatch".into()));
        }
        let jz = j.apply(zeta);
        let shifted: Vec<f64> = z.iter().zip(&jz).map(|(a, b)| a - b).collect();
        let zero = vec![0.0; j.n()];
        let lhs = conjugate_operator(op, z, zeta, 0.0, TranslateMode::Bandlimited);
        let rhs = conjugate_operator(op, &shifted, &zero, 0.0, TranslateMode::Bandlimited);
        for phi in phis {
            let d = module_norm(&lhs.apply(phi)?.sub(&rhs.apply(phi)?)?)? / module_norm(phi)?;
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Checks `T_{z,zeta} = T_{z - J zeta, 0}` on every sample and test function.
pub fn heissmooth_check(
    op: &OperatorHandle,
    j: &DeformationMatrix,
    samples: &[(Vec<f64>, Vec<f64>)],
    phis: &[ModuleFunction],
    tolerance: f64,
) -> Result<VerificationReport> {
    let dev = heissmooth_deviation(op, j, samples, phis)?;
    let mut report = VerificationReport::new("heissmooth");
    report.push(Metric::at_most("max_deviation", dev, tolerance));
    Ok(report)
}

/// Thresholds separating "small" from "large" in [`commutant_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutantThresholds {
    pub commutation: f64,
    pub symbol: f64,
    pub extraction: f64,
}

impl Default for CommutantThresholds {
    fn default() -> Self {
        Self {
            commutation: 1e-4,
            symbol: 1e-4,
            extraction: 1e-3,
        }
    }
}

/// Measurements behind [`commutant_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CommutantMeasure {
    /// `max ||[T, R_G] phi||_2 / ||phi||_2` over the suites.
    pub commutator: f64,
    /// `sup ||a(z, zeta) - a(z - J zeta, 0)|| / sup ||a||`.
    pub symbol_deviation: f64,
    /// `max ||T phi - L_F phi||_2 / ||phi||_2` with `F(z) = a(z, 0)`.
    pub extraction: f64,
}

/// The field `z -> a(z, 0)`, classified by the decay test.
pub fn extract_field(a: &dyn Symbol) -> Result<ModuleFunction> {
    let gx = a.grid_x();
    let gxi = a.grid_xi();
    let origin = gxi.flat_index(&vec![gxi.points / 2; gxi.n]);
    let k2 = a.k() * a.k();
    let mut values = vec![ZERO; gx.total_points() * k2];
    for (i, block) in values.chunks_exact_mut(k2).enumerate() {
        a.sample(i, origin, block);
    }
    ModuleFunction::classified(gx, a.k(), values)
}

pub fn commutant_measure(
    a: Arc<dyn Symbol>,
    j: &DeformationMatrix,
    g_suite: &[ModuleFunction],
    phis: &[ModuleFunction],
) -> Result<CommutantMeasure> {
    let t = OperatorHandle::from_symbol(a.clone());
    let mut commutator: f64 = 0.0;
    for g in g_suite {
        let r = OperatorHandle::right_rep(g.clone(), j.clone());
        let c = t.commutator(&r);
        for phi in phis {
            commutator = commutator.max(module_norm(&c.apply(phi)?)? / module_norm(phi)?);
        }
    }

    let f = extract_field(a.as_ref())?;
    let gxi = a.grid_xi();
    let k2 = a.k() * a.k();
    let nx = a.grid_x().total_points();
    let mut sup_a: f64 = 0.0;
    let mut sup_diff: f64 = 0.0;
    let mut block = vec![ZERO; k2];
    for m in 0..gxi.total_points() {
        let shift = j.apply(&gxi.point(m));
        let fm = translate_bandlimited(&f, &shift)?;
        for i in 0..nx {
            a.sample(i, m, &mut block);
            sup_a = sup_a.max(crate::algebra::block_norm(a.k(), &block));
            for (b, v) in block.iter_mut().zip(fm.block(i)) {
                *b -= v;
            }
            sup_diff = sup_diff.max(crate::algebra::block_norm(a.k(), &block));
        }
    }
    let symbol_deviation = if sup_a > 0.0 { sup_diff / sup_a } else { sup_diff };

    let l = OperatorHandle::left_rep(f, j.clone());
    let mut extraction: f64 = 0.0;
    for phi in phis {
        let d = t.apply(phi)?.sub(&l.apply(phi)?)?;
        extraction = extraction.max(module_norm(&d)? / module_norm(phi)?);
    }
    Ok(CommutantMeasure {
        commutator,
        symbol_deviation,
        extraction,
    })
}

/// Empirical fingerprint of the commutant theorem for `T = O(a)`: the
/// commutator with every `R_G` is small exactly when `a(z, zeta) = a(z - J zeta, 0)`,
/// and in that case `T` agrees with `L_F` for `F(z) = a(z, 0)`.
pub fn commutant_check(
    a: Arc<dyn Symbol>,
    j: &DeformationMatrix,
    g_suite: &[ModuleFunction],
    phis: &[ModuleFunction],
    thresholds: &CommutantThresholds,
) -> Result<(VerificationReport, CommutantMeasure)> {
    let m = commutant_measure(a, j, g_suite, phis)?;
    let commutes = m.commutator <= thresholds.commutation;
    let covariant = m.symbol_deviation <= thresholds.symbol;
    let mut report = VerificationReport::new("commutant");
    report.push(Metric::record("commutator", m.commutator));
    report.push(Metric::record("symbol_deviation", m.symbol_deviation));
    report.push(Metric::at_least(
        "fingerprint_consistent",
        if commutes == covariant { 1.0 } else { 0.0 },
        1.0,
    ));
    if commutes {
        report.push(Metric::at_most("extraction_error", m.extraction, thresholds.extraction));
    } else {
        report.push(Metric::record("extraction_error", m.extraction));
    }
    Ok((report, m))
}
