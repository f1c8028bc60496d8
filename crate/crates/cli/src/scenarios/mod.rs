//! Scenario registry. Each scenario turns a resolved config into a report
//! plus optional plot series.

use std::time::Instant;

use psido_core::algebra::{AlgebraElement, C64};
use psido_core::rng::CounterRng;
use psido_core::sampling::random_element;
use psido_core::symbol::SymbolFn;
use psido_core::{GridSpec, Metric, VerificationReport};
use thiserror::Error;

use crate::config::{ResolvedConfig, Scenario};

mod deformation;
mod fourier;
mod heisenberg;
mod quantize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub emit_plots: bool,
    /// Cross-check against the brute-force quadratures.
    pub oracle: bool,
}

/// Rows `(x, value, series)` destined for `plots/<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub rows: Vec<(f64, f64, String)>,
}

impl Plot {
    fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            rows: Vec::new(),
        }
    }

    fn series(&mut self, series: &str, points: impl IntoIterator<Item = (f64, f64)>) {
        self.rows.extend(points.into_iter().map(|(x, v)| (x, v, series.to_string())));
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: VerificationReport,
    pub plots: Vec<Plot>,
    /// Some extrapolation did not converge; reported as failed metrics.
    pub convergence_failure: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] psido_core::Error),
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Report under construction, with phase timing.
pub(crate) struct Run<'a> {
    pub cfg: &'a ResolvedConfig,
    pub opts: RunOptions,
    pub report: VerificationReport,
    pub plots: Vec<Plot>,
    pub convergence_failure: bool,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a ResolvedConfig, opts: RunOptions) -> Self {
        let mut report = VerificationReport::new(cfg.scenario.name());
        report.config = serde_json::to_value(cfg).expect("config serializes");
        Self {
            cfg,
            opts,
            report,
            plots: Vec::new(),
            convergence_failure: false,
        }
    }

    pub fn phase<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> RunResult<T>) -> RunResult<T> {
        let start = Instant::now();
        let out = f(self);
        self.report.time(name, start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn at_most(&mut self, name: &str, value: f64) {
        let tol = self.cfg.tolerance(name);
        self.report.push(Metric::at_most(name, value, tol));
    }

    pub fn at_least(&mut self, name: &str, value: f64, tolerance: &str) {
        let tol = self.cfg.tolerance(tolerance);
        self.report.push(Metric::at_least(name, value, tol));
    }

    pub fn record(&mut self, name: &str, value: f64) {
        self.report.push(Metric::record(name, value));
    }

    pub fn plot(&mut self, plot: Plot) {
        if self.opts.emit_plots {
            self.plots.push(plot);
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.cfg.grid()
    }

    pub fn rng(&self, label: u64) -> CounterRng {
        CounterRng::new(self.cfg.seed).split(label)
    }

    pub fn element(&self, label: u64) -> AlgebraElement {
        random_element(&mut self.rng(label), self.cfg.k)
    }
}

pub fn run_scenario(cfg: &ResolvedConfig, opts: RunOptions) -> RunResult<Outcome> {
    let mut run = Run::new(cfg, opts);
    match cfg.scenario {
        Scenario::FourierUnitarity => fourier::unitarity(&mut run)?,
        Scenario::CvBound => quantize::cv_bound(&mut run)?,
        Scenario::WindowedTransform => quantize::windowed(&mut run)?,
        Scenario::AdjointSymbol => quantize::adjoint(&mut run)?,
        Scenario::OperbRoundtrip => quantize::operb(&mut run)?,
        Scenario::DeformedProduct => deformation::product(&mut run)?,
        Scenario::ApproxIdentity => deformation::approx_identity(&mut run)?,
        Scenario::HeisenbergConjugation => heisenberg::conjugation(&mut run)?,
        Scenario::Heissmooth => heisenberg::heissmooth(&mut run)?,
        Scenario::Commutant => heisenberg::commutant(&mut run)?,
    }
    run.report.validate()?;
    Ok(Outcome {
        report: run.report,
        plots: run.plots,
        convergence_failure: run.convergence_failure,
    })
}

/// `F(x + sign J xi)` for the Gaussian field `F(y) = exp(-|y - c|^2 / (2 sigma^2)) coeff`.
pub(crate) fn field_symbol(
    grid: GridSpec,
    j: &psido_core::DeformationMatrix,
    sign: f64,
    center: Vec<f64>,
    sigma: f64,
    coeff: AlgebraElement,
) -> SymbolFn {
    let (n, entries) = (j.n(), j.entries().to_vec());
    let w = 0.5 / (sigma * sigma);
    SymbolFn::on_phase_space(grid, coeff.dim(), move |x, xi, out| {
        let mut r2 = 0.0;
        for a in 0..n {
            let jxi: f64 = (0..n).map(|b| entries[a * n + b] * xi[b]).sum();
            r2 += (x[a] + sign * jxi - center[a]).powi(2);
        }
        let g = (-w * r2).exp();
        for (o, e) in out.iter_mut().zip(coeff.entries()) {
            *o = e * g;
        }
    })
}

pub(crate) fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}
