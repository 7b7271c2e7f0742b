//! Pinned tolerance profiles, refinement ladders, and the standard alpha
//! panel used by the verification pipeline and the acceptance suite. Smooth
//! functions run at the strict profile; functions with boundary singularities
//! get the relaxed singular profile (their boundary data decays slowly in
//! frequency, so truncation residuals are first-order in the grid).

use crate::{unit, C64};

/// Tolerance bundle for one verification run.
#[derive(Clone, Copy, Debug)]
pub struct TolProfile {
    pub name: &'static str,
    /// quadrature nodes for the mass identity check
    pub mass_nodes: usize,
    pub mass_tol: f64,
    /// quadrature nodes for the Poisson identity check
    pub poisson_nodes: usize,
    pub poisson_tol: f64,
    /// truncation degree / node count for operator-level checks
    pub degree: usize,
    pub operator_nodes: usize,
    /// embedding singular values must lie in `[1 - band, 1 + band]`
    pub isometry_nodes: usize,
    pub isometry_band: f64,
    /// final unitarity / commutation residual bound
    pub residual_final: f64,
    /// final intertwining residual bound (truncation-limited separately:
    /// the embedding rows sample the symbol globally)
    pub intertwining_final: f64,
    /// disintegration residual bound at the standard 16-value alpha panel
    pub disintegration_tol: f64,
    /// basis columns with more top-degree mass than this are truncation
    /// boundary and excluded from operator residuals
    pub interior_threshold: f64,
    /// torus scan resolution
    pub scan_grid: usize,
}

/// Strict profile for smooth rational inner functions.
pub const STRICT: TolProfile = TolProfile {
    name: "strict",
    mass_nodes: 2048,
    mass_tol: 1e-8,
    poisson_nodes: 2048,
    poisson_tol: 1e-8,
    degree: 8,
    operator_nodes: 1024,
    isometry_nodes: 4096,
    isometry_band: 1e-4,
    residual_final: 1e-6,
    intertwining_final: 1e-6,
    disintegration_tol: 1e-6,
    interior_threshold: 1e-2,
    scan_grid: 256,
};

/// Relaxed profile for functions with boundary singularities.
pub const SINGULAR: TolProfile = TolProfile {
    name: "singular",
    mass_nodes: 8192,
    mass_tol: 1e-5,
    poisson_nodes: 4096,
    poisson_tol: 1e-6,
    degree: 8,
    operator_nodes: 4096,
    isometry_nodes: 4096,
    isometry_band: 1e-2,
    residual_final: 1e-2,
    intertwining_final: 6e-2,
    disintegration_tol: 2e-2,
    interior_threshold: 1e-2,
    scan_grid: 256,
};

pub fn by_name(name: &str) -> Option<&'static TolProfile> {
    match name {
        "strict" => Some(&STRICT),
        "singular" => Some(&SINGULAR),
        _ => None,
    }
}

/// Refinement ladder `(degree, grid, nodes)` for the residual-decrease
/// checks, per bundled function. The top rung is sized so the final smooth
/// residuals clear [`TolProfile::residual_final`]: coefficient tails of the
/// two-factor product decay like `2^-D`, so it needs a substantially deeper
/// box than the polynomial example.
pub fn refinement_ladder(name: &str) -> Option<[(usize, usize, usize); 3]> {
    match name {
        "zw" => Some([(4, 64, 256), (6, 64, 512), (8, 64, 1024)]),
        "blaschke2" => Some([(10, 64, 512), (16, 64, 1024), (24, 64, 2048)]),
        "fave" => Some([(4, 128, 1024), (6, 256, 2048), (8, 256, 4096)]),
        _ => None,
    }
}

/// Deterministic panel of generic alpha values: uniformly spaced with a fixed
/// offset that keeps the panel away from the bundled functions' exceptional
/// values and from axis-aligned special angles.
pub fn alpha_panel(count: usize) -> Vec<C64> {
    (0..count)
        .map(|k| unit(std::f64::consts::TAU * k as f64 / count as f64 + 0.31))
        .collect()
}

/// Box widths for the mass-growth fit.
pub const EPSILON_LADDER: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Least-squares line `y = slope x + intercept` with its coefficient of
/// determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}
