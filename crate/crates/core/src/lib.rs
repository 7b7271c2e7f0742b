//! Two-variable Clark theory on the bidisk, at desk scale.
//!
//! The crate builds the chain
//!
//! ```text
//! stable polynomial p  ->  rational inner function phi = e^{ia} z^m p~/p
//!                      ->  unimodular level sets C_alpha on the torus
//!                      ->  Clark measures sigma_alpha (weighted line quadrature)
//!                      ->  truncated model space K_phi, Clark unitaries U^1, U^2
//!                      ->  Taylor joint spectrum via Koszul rank tests
//! ```
//!
//! and closes the loop numerically: the joint spectrum of the unitary pair is
//! compared against the level set it is supposed to equal.
//!
//! Everything is plain `f64`/[`C64`] arithmetic on immutable values; all
//! reductions run in a fixed order so identical inputs give identical bytes.

pub mod bipoly;
pub mod blaschke1d;
pub mod bundled;
pub mod clark;
pub mod error;
pub mod fft;
pub mod koszul;
pub mod modelspace;
pub mod profiles;
pub mod rif;

pub use bipoly::{BiPoly, StabilityCertificate, UniPoly};
pub use blaschke1d::{BlaschkeProduct, Clark1D, ModelBasis1D};
pub use clark::ClarkMeasureQuad;
pub use error::ClarkError;
pub use koszul::{KoszulReport, SpectrumScan};
pub use modelspace::{Axis, KphiBasis, PsiAlpha, TruncatedHardy, TruncatedOperator};
pub use rif::{LevelSetBranches, Rif, SingularSet};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Crate-wide `Result`.
pub type Result<T> = std::result::Result<T, ClarkError>;

/// Wraps an angle into `(-pi, pi]`, the convention used by every exported
/// coordinate.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut t = theta % two_pi;
    if t > std::f64::consts::PI {
        t -= two_pi;
    } else if t <= -std::f64::consts::PI {
        t += two_pi;
    }
    t
}

/// Geodesic distance between two points of the flat torus `(-pi, pi]^2`.
pub fn torus_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d1 = wrap_angle(a.0 - b.0);
    let d2 = wrap_angle(a.1 - b.1);
    (d1 * d1 + d2 * d2).sqrt()
}

/// `e^{i theta}` as a [`C64`].
pub fn unit(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}
