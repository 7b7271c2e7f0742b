//! Error type shared by every module of the crate.

use num_complex::Complex;

/// Everything that can go wrong while building or evaluating the objects in
/// this crate. Variants follow the failure modes of the individual
/// operations; see the doc comment on each constructor for which variants it
/// can produce.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum ClarkError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("sampled stability test failed: zero of modulus {modulus:.3e} found inside the bidisk near z1 = {z1}")]
    Stability { z1: Complex<f64>, modulus: f64 },

    #[error("boundary sampling violates |phi*| = 1: deviation {deviation:.3e} at ({z1}, {z2})")]
    InnerUnimodularity {
        z1: Complex<f64>,
        z2: Complex<f64>,
        deviation: f64,
    },

    #[error("point ({z1}, {z2}) is outside the required domain: {what}")]
    Domain {
        z1: Complex<f64>,
        z2: Complex<f64>,
        what: String,
    },

    #[error("({z1}, {z2}) is within tolerance of a boundary singularity of the function")]
    SingularPoint { z1: Complex<f64>, z2: Complex<f64> },

    #[error("alpha = {alpha} is exceptional for this function: {detail}")]
    ExceptionalAlpha { alpha: Complex<f64>, detail: String },

    #[error("level-set root {root} strays from the unit circle by {deviation:.3e} (near-exceptional alpha or singularity)")]
    NonUnimodularRoot {
        root: Complex<f64>,
        deviation: f64,
    },

    #[error("partial derivative vanishes at ({z1}, {z2}); Clark weight would blow up")]
    VanishingDerivative { z1: Complex<f64>, z2: Complex<f64> },

    #[error("rank-one Clark formula requires phi(0) = 0, got phi(0) = {phi0}")]
    Phi0 { phi0: Complex<f64> },

    #[error("kernel sample points are degenerate: Gram condition number {cond:.3e} exceeds {limit:.3e}")]
    PointSelection { cond: f64, limit: f64 },

    #[error("collocation system is ill-conditioned: smallest singular value ratio {ratio:.3e}")]
    Collocation { ratio: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("matrices do not commute: relative residual {relative:.3e} exceeds {limit:.3e}")]
    Commutation { relative: f64, limit: f64 },

    #[error("joint triangularization did not converge: best residual {residual:.3e} (tolerance {tolerance:.3e})")]
    Refinement { residual: f64, tolerance: f64 },

    #[error("operators live on different bases: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}
