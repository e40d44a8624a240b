//! Error types shared across the crate.

use thiserror::Error;

use crate::dsl::DslError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid throat radius b0 = {b0}; must be strictly positive")]
    InvalidThroatRadius { b0: f64 },

    #[error("evaluation at x = {x} falls on the metric singularity at x = {point}")]
    SingularPoint { point: f64, x: f64 },

    #[error("radius r = {r} lies inside the throat b0 = {b0}; no such point exists")]
    InsideThroat { r: f64, b0: f64 },

    #[error("adaptive quadrature did not reach tolerance {tol:e} after {panels} panels (last estimate {estimate:e})")]
    QuadratureNonconvergence {
        tol: f64,
        panels: usize,
        estimate: f64,
    },

    #[error("grid [{x_min}, {x_max}] clips the packet support: boundary amplitude ratio {boundary_ratio:e} exceeds 1e-8")]
    GridTooSmall {
        x_min: f64,
        x_max: f64,
        boundary_ratio: f64,
    },

    #[error("grid size {n} is not a power of two (required by the spectral transform)")]
    NonPowerOfTwoGrid { n: usize },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("invalid packet: {reason}")]
    InvalidPacket { reason: String },

    #[error("CFL violation: dt = {dt} exceeds 0.5*dx = {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("invalid solver config: {reason}")]
    InvalidSolverConfig { reason: String },

    #[error("packet reached the domain boundary at t = {t} (boundary amplitude ratio {ratio:e})")]
    ContainmentViolation { t: f64, ratio: f64 },

    #[error("evolution domain straddles the metric singularity at x = {point}")]
    DomainStraddlesSingularity { point: f64 },

    #[error("residual evaluation needs at least 3 uniformly spaced time slices, got {got}")]
    InsufficientSlices { got: usize },

    #[error("conformal factor not positive at sampled x = {x}: omega = {omega}")]
    NonPositiveOmega { x: f64, omega: f64 },

    #[error(transparent)]
    Dsl(#[from] DslError),
}
