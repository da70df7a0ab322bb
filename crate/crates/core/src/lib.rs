//! Time-domain construction of the Weyl solution and the Titchmarsh–Weyl
//! m-function of `−u″ + q u = z u` on the half-line.
//!
//! The pipeline solves the Goursat problem for the wave kernel `w(x, t)` by
//! a Neumann series ([`kernel`]), builds wave solutions and the response
//! function from it ([`wave`]), and transforms to the spectral side
//! ([`spectral`]). [`oracle`] holds independent reference solvers and
//! [`bounds`] the numerical checks of the kernel estimates.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the usual `f64` choice.

// `!(a > b)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod io;
pub mod kernel;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod scalar;
pub mod spectral;
pub mod validate;
pub mod wave;

pub use error::{Error, Result};
pub use kernel::{neumann_solve, KernelField, TriangleGrid};
pub use potential::{compute_norms, L1Norm, Potential, PotentialKind, PotentialNorms};
pub use scalar::Real;
pub use spectral::{ConvergenceRegion, MValue, Route, SpectralPoint, WeylSample};
pub use wave::{BoundaryControl, ResponseFunction, WaveField};

pub type Potential64 = Potential<f64>;
pub type PotentialNorms64 = PotentialNorms<f64>;
pub type TriangleGrid64 = TriangleGrid<f64>;
pub type KernelField64 = KernelField<f64>;
pub type BoundaryControl64 = BoundaryControl<f64>;
pub type ResponseFunction64 = ResponseFunction<f64>;
pub type SpectralPoint64 = SpectralPoint<f64>;
pub type MValue64 = MValue<f64>;

pub type Potential32 = Potential<f32>;
pub type KernelField32 = KernelField<f32>;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
