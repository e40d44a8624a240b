//! Dirac wavepackets on static curved 1+1D backgrounds.
//!
//! Any solution of the free massless Dirac equation in flat 1+1D spacetime
//! becomes a solution of the corresponding curved static equation under the
//! pointwise multiplier `Omega^{-1/2}`, where `Omega` is the conformal factor
//! of the metric. This crate provides:
//!
//! - [`metric`]: static conformal metrics, the traversable-wormhole family
//!   `b(r) = b0^2/r`, and the closed-form quantities derived from `Omega`
//!   (effective potential, logarithmic derivative, phase integral,
//!   coordinate maps);
//! - [`dsl`]: a small expression language for user-defined `Omega(x)` with
//!   dual-number automatic differentiation;
//! - [`flat`]: the closed-form Gaussian packet and a spectral evolver for the
//!   free flat equation;
//! - [`map`]: the `Omega^{-1/2}` transformation and the induced density
//!   relation `|psi|^2 = Omega^{-1} |phi|^2`;
//! - [`oracle`]: an independent Runge-Kutta integrator for the curved
//!   equation that never uses the transformation, so the map can be verified
//!   against it.

pub mod dsl;
pub mod error;
pub mod flat;
pub mod map;
pub mod metric;
pub mod oracle;
pub mod quadrature;

pub use error::{Error, Result};
pub use flat::{GaussianPacket, GridSpec, SpinorField};
pub use map::{MappedSolution, MaskedDensity};
pub use metric::{Branch, ConformalFactor, WormholeMetric};
pub use oracle::{DerivativeScheme, EvolutionRecord, SolverConfig};
