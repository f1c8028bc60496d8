//! Numerical calculus for pseudodifferential operators whose symbols take
//! values in the matrix algebra `M_k(C)`.
//!
//! Functions `R^n -> M_k(C)` are sampled on uniform grids and form the
//! Hilbert module `E` with inner product `<f, g> = int f^* g`. On top of that
//! the crate provides the Fourier transform, quantization `a -> a(x, D)`,
//! Rieffel's deformed product with its regular representations, and the
//! Heisenberg action on operators, together with verification routines
//! that turn the boundedness and commutant theorems into measurable checks.

pub mod algebra;
pub mod deformation;
pub mod error;
pub mod fourier;
pub mod heisenberg;
pub mod oracle;
pub mod quantize;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod symbol;

pub use algebra::{approximate_unit, cstar_norm, AlgebraElement, C64};
pub use deformation::DeformationMatrix;
pub use error::{Error, Result};
pub use heisenberg::OperatorHandle;
pub use report::{Metric, VerificationReport};
pub use sampling::{module_inner, module_norm, DecayClass, GridSpec, ModuleFunction, Recipe};
pub use symbol::{SampledSymbol, Symbol, SymbolFn};
