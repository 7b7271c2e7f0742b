//! The bundled reference functions used by tests, the verification pipeline,
//! and the CLI `example` subcommand.

use crate::bipoly::BiPoly;
use crate::rif::Rif;
use crate::C64;

/// `phi(z) = z1 z2`: denominator 1, monomial (1, 1). Smooth, and every alpha
/// is generic.
pub fn zw() -> Rif {
    Rif::new(BiPoly::constant(C64::new(1.0, 0.0)), (1, 1), 0.0)
        .expect("constant denominator is stable")
}

/// `phi(z) = (2 z1 z2 - z1 - z2) / (2 - z1 - z2)`: the singular example with
/// a boundary singularity at (1, 1) and sole exceptional value alpha = -1.
pub fn fave() -> Rif {
    let p = BiPoly::from_real(1, 1, &[2.0, -1.0, -1.0, 0.0]).expect("coefficient layout");
    Rif::new(p, (0, 0), 0.0).expect("2 - z1 - z2 is stable")
}

/// Product of two degree-one factors with zeros at 1/2:
/// `phi(z) = (1 - 2 z1)(1 - 2 z2) / ((2 - z1)(2 - z2))`. Smooth with
/// `phi(0) = 1/4 != 0`, the case where the model-space projection in the
/// perturbation formula is genuinely needed.
pub fn blaschke2() -> Rif {
    // (2 - z1)(2 - z2) = 4 - 2 z1 - 2 z2 + z1 z2
    let p = BiPoly::from_real(1, 1, &[4.0, -2.0, -2.0, 1.0]).expect("coefficient layout");
    Rif::new(p, (0, 0), 0.0).expect("(2 - z1)(2 - z2) is stable")
}

/// Looks up a bundled profile by CLI name.
pub fn by_name(name: &str) -> Option<Rif> {
    match name {
        "zw" => Some(zw()),
        "fave" => Some(fave()),
        "blaschke2" => Some(blaschke2()),
        _ => None,
    }
}
