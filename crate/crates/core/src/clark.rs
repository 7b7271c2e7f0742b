//! Discretized Clark measures: weighted quadrature along level-set branches,
//! integration, Poisson and disintegration validators, and support geometry.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ClarkError;
use crate::rif::{LevelSetBranches, Rif};
use crate::{torus_distance, unit, wrap_angle, Result, C64};

/// Nodes within this torus geodesic distance of a singular point are excluded
/// from quadrature by default.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-4;

/// Quadrature discretization of the Clark measure `sigma_alpha`: level-set
/// branch nodes carry weights `1/|d phi/d z2|` and a trapezoidal node mass
/// `weight / N` (the base measure is normalized Lebesgue measure, total mass
/// one).
#[derive(Clone, Debug)]
pub struct ClarkMeasureQuad {
    pub alpha: C64,
    pub branches: LevelSetBranches,
    /// `weights[j][i]`: Clark weight at branch `j`, node `i`; excluded nodes
    /// hold 0
    pub weights: Vec<Vec<f64>>,
    /// `node_mass[j][i] = weights[j][i] / N`
    pub node_mass: Vec<Vec<f64>>,
    /// `(branch, node)` pairs excluded near singular points
    pub excluded: Vec<(usize, usize)>,
    /// estimated mass carried by the excluded nodes
    pub mass_deficit_estimate: f64,
    pub exclusion_radius: f64,
}

impl ClarkMeasureQuad {
    /// Builds the quadrature for a generic `alpha` over `n` nodes with the
    /// default exclusion radius.
    pub fn build(phi: &Rif, alpha: C64, n: usize) -> Result<Self> {
        Self::build_with_exclusion(phi, alpha, n, DEFAULT_EXCLUSION_RADIUS)
    }

    /// Same with an explicit exclusion radius around singular points.
    pub fn build_with_exclusion(
        phi: &Rif,
        alpha: C64,
        n: usize,
        exclusion_radius: f64,
    ) -> Result<Self> {
        phi.require_generic(alpha)?;
        let branches = phi.level_set_branches(alpha, n)?;
        let singular = phi.singular_points();
        let sing_angles: Vec<(f64, f64)> = singular
            .points
            .iter()
            .map(|&(a, b)| (a.arg(), b.arg()))
            .collect();

        let n_f = n as f64;
        let mut weights = Vec::with_capacity(branches.branch_count());
        let mut excluded = Vec::new();
        for (j, branch) in branches.branches.iter().enumerate() {
            let row: Vec<Option<f64>> = branch
                .par_iter()
                .enumerate()
                .map(|(i, &g)| {
                    let xi = branches.nodes[i];
                    let here = (xi.arg(), g.arg());
                    let near_singular = sing_angles
                        .iter()
                        .any(|&s| torus_distance(here, s) < exclusion_radius);
                    if near_singular {
                        return None;
                    }
                    phi.clark_weight_at(xi, g, 2).ok()
                })
                .collect();
            let mut w = Vec::with_capacity(n);
            for (i, v) in row.into_iter().enumerate() {
                match v {
                    Some(x) => w.push(x),
                    None => {
                        excluded.push((j, i));
                        w.push(0.0);
                    }
                }
            }
            weights.push(w);
        }

        // deficit estimate: excluded nodes carry roughly the weight of the
        // nearest included node on the same branch
        let mut mass_deficit_estimate = 0.0;
        for &(j, i) in &excluded {
            let mut best = 0.0;
            for step in 1..n {
                let left = (i + n - step) % n;
                let right = (i + step) % n;
                if weights[j][left] > 0.0 {
                    best = weights[j][left];
                    break;
                }
                if weights[j][right] > 0.0 {
                    best = weights[j][right];
                    break;
                }
            }
            mass_deficit_estimate += best / n_f;
        }

        let node_mass = weights
            .iter()
            .map(|row| row.iter().map(|w| w / n_f).collect())
            .collect();

        Ok(ClarkMeasureQuad {
            alpha,
            branches,
            weights,
            node_mass,
            excluded,
            mass_deficit_estimate,
            exclusion_radius,
        })
    }

    pub fn node_count(&self) -> usize {
        self.branches.node_count()
    }

    /// Integrates a sampled function against the measure: fixed summation
    /// order, branch-major then node-minor.
    pub fn integrate(&self, f: impl Fn(C64, C64) -> C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, branch) in self.branches.branches.iter().enumerate() {
            for (i, &g) in branch.iter().enumerate() {
                let mass = self.node_mass[j][i];
                if mass > 0.0 {
                    acc += f(self.branches.nodes[i], g) * mass;
                }
            }
        }
        acc
    }

    /// Total quadrature mass.
    pub fn total_mass(&self) -> f64 {
        self.integrate(|_, _| C64::new(1.0, 0.0)).re
    }

    /// Exact total mass the measure must carry: `(1 - |phi(0)|^2) / |alpha - phi(0)|^2`.
    pub fn expected_mass(phi: &Rif, alpha: C64) -> f64 {
        let phi0 = phi.at_origin();
        (1.0 - phi0.norm_sqr()) / (alpha - phi0).norm_sqr()
    }

    /// Absolute gap between the quadrature of the product Poisson kernel and
    /// the closed-form Poisson integral at an interior point.
    pub fn poisson_residual(&self, phi: &Rif, z: (C64, C64)) -> Result<f64> {
        if z.0.norm() >= 1.0 || z.1.norm() >= 1.0 {
            return Err(ClarkError::Domain {
                z1: z.0,
                z2: z.1,
                what: "Poisson identity requires a strictly interior point".into(),
            });
        }
        let value = phi.eval_interior(z.0, z.1)?;
        let lhs = (1.0 - value.norm_sqr()) / (self.alpha - value).norm_sqr();
        let rhs = self
            .integrate(|zeta1, zeta2| {
                C64::new(poisson_kernel(z.0, zeta1) * poisson_kernel(z.1, zeta2), 0.0)
            })
            .re;
        Ok((lhs - rhs).abs())
    }

    /// Minimum torus geodesic distance between the non-excluded node sets of
    /// two measures for the same function.
    pub fn support_distance(&self, other: &ClarkMeasureQuad) -> f64 {
        let mine = self.active_points();
        let theirs = other.active_points();
        let mut best = f64::INFINITY;
        for &a in &mine {
            for &b in &theirs {
                let d = torus_distance(a, b);
                if d < best {
                    best = d;
                    if best == 0.0 {
                        return 0.0;
                    }
                }
            }
        }
        best
    }

    /// Angle pairs of all nodes that carry mass.
    pub fn active_points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (j, branch) in self.branches.branches.iter().enumerate() {
            for (i, &g) in branch.iter().enumerate() {
                if self.node_mass[j][i] > 0.0 {
                    out.push((
                        wrap_angle(self.branches.nodes[i].arg()),
                        wrap_angle(g.arg()),
                    ));
                }
            }
        }
        out
    }

    /// Mass of the centered box `V_eps(lambda)`: nodes whose angular
    /// coordinates both lie within `eps/2` of `lambda`'s (distance measured
    /// on the circle, so boxes centered near the seam behave the same).
    pub fn epsilon_box_mass(&self, lambda: (C64, C64), eps: f64) -> f64 {
        let center = (lambda.0.arg(), lambda.1.arg());
        let mut acc = 0.0;
        for (j, branch) in self.branches.branches.iter().enumerate() {
            for (i, &g) in branch.iter().enumerate() {
                let d1 = wrap_angle(self.branches.nodes[i].arg() - center.0).abs();
                let d2 = wrap_angle(g.arg() - center.1).abs();
                if d1 < eps / 2.0 && d2 < eps / 2.0 {
                    acc += self.node_mass[j][i];
                }
            }
        }
        acc
    }
}

/// One-variable Poisson kernel `P_z(zeta) = (1 - |z|^2) / |zeta - z|^2`.
pub fn poisson_kernel(z: C64, zeta: C64) -> f64 {
    (1.0 - z.norm_sqr()) / (zeta - z).norm_sqr()
}

/// Averages `integrate(sigma_alpha, f)` over `n_alpha` uniformly spaced
/// generic values of alpha and compares with the torus double integral of
/// `f` by the tensor trapezoidal rule on an `n x n` grid. Detected
/// exceptional values are skipped.
pub fn disintegration_residual(
    phi: &Rif,
    f: impl Fn(C64, C64) -> C64 + Sync,
    n_alpha: usize,
    n: usize,
) -> Result<f64> {
    let alphas: Vec<C64> = (0..n_alpha)
        .map(|k| unit(std::f64::consts::TAU * (k as f64 + 0.5) / n_alpha as f64))
        .collect();
    let mut used = 0usize;
    let mut acc = C64::new(0.0, 0.0);
    let per_alpha: Vec<Option<C64>> = alphas
        .par_iter()
        .map(|&alpha| {
            match ClarkMeasureQuad::build(phi, alpha, n) {
                Ok(mu) => Some(mu.integrate(&f)),
                Err(ClarkError::ExceptionalAlpha { .. }) => None,
                Err(_) => None,
            }
        })
        .collect();
    for v in per_alpha.into_iter().flatten() {
        acc += v;
        used += 1;
    }
    if used == 0 {
        return Err(ClarkError::ExceptionalAlpha {
            alpha: C64::new(f64::NAN, f64::NAN),
            detail: "every sampled alpha was exceptional".into(),
        });
    }
    let average = acc / used as f64;

    let mut double = C64::new(0.0, 0.0);
    for a in 0..n {
        let zeta1 = unit(std::f64::consts::TAU * a as f64 / n as f64);
        for b in 0..n {
            let zeta2 = unit(std::f64::consts::TAU * b as f64 / n as f64);
            double += f(zeta1, zeta2);
        }
    }
    double /= (n * n) as f64;

    Ok((average - double).norm())
}

/// Node record of the measure export format.
#[derive(Serialize, Deserialize)]
pub struct MeasureNodeJson {
    pub theta1: f64,
    pub theta2: f64,
    pub mass: f64,
    pub branch: usize,
}

/// Wire format for a discretized Clark measure.
#[derive(Serialize, Deserialize)]
pub struct MeasureJson {
    pub alpha: [f64; 2],
    pub nodes: Vec<MeasureNodeJson>,
    pub excluded: Vec<[f64; 2]>,
    #[serde(rename = "massDeficitEstimate")]
    pub mass_deficit_estimate: f64,
}

impl From<&ClarkMeasureQuad> for MeasureJson {
    fn from(mu: &ClarkMeasureQuad) -> Self {
        let mut nodes = Vec::new();
        for (j, branch) in mu.branches.branches.iter().enumerate() {
            for (i, &g) in branch.iter().enumerate() {
                if mu.node_mass[j][i] > 0.0 {
                    nodes.push(MeasureNodeJson {
                        theta1: wrap_angle(mu.branches.nodes[i].arg()),
                        theta2: wrap_angle(g.arg()),
                        mass: mu.node_mass[j][i],
                        branch: j,
                    });
                }
            }
        }
        let excluded = mu
            .excluded
            .iter()
            .map(|&(j, i)| {
                [
                    wrap_angle(mu.branches.nodes[i].arg()),
                    wrap_angle(mu.branches.branches[j][i].arg()),
                ]
            })
            .collect();
        MeasureJson {
            alpha: [mu.alpha.re, mu.alpha.im],
            nodes,
            excluded,
            mass_deficit_estimate: mu.mass_deficit_estimate,
        }
    }
}
