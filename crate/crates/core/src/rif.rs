//! Rational inner functions on the bidisk: construction and validation,
//! boundary values, unimodular level sets with branch tracking, genericity
//! classification, singular-point location, and Clark weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipoly::{BiPoly, BiPolyJson};
use crate::error::ClarkError;
use crate::{unit, wrap_angle, Result, C64};

/// Default grid resolution per axis for the sampled stability check.
pub const STABILITY_SAMPLES: usize = 64;
/// Default radial pullback for the sampled stability check.
pub const STABILITY_TOL: f64 = 1e-9;
/// Level-set roots may deviate from the unit circle by at most this much.
pub const UNIMODULAR_TOL: f64 = 1e-8;
/// Default grid resolution for the exceptional-alpha line scan.
pub const EXCEPTIONAL_GRID: usize = 128;
/// Default tolerance for the exceptional-alpha line scan.
pub const EXCEPTIONAL_TOL: f64 = 1e-6;

/// A rational inner function `phi = e^{ia} z1^{m1} z2^{m2} p~ / p` with `p`
/// stable. The reflection `p~` and the full numerator are cached at
/// construction.
#[derive(Clone, Debug)]
pub struct Rif {
    p: BiPoly,
    p_tilde: BiPoly,
    /// `e^{ia} z1^{m1} z2^{m2} p~`, the polynomial numerator of `phi`
    numerator: BiPoly,
    monomial: (usize, usize),
    phase: f64,
}

/// Level set `C_alpha` discretized over `N` uniformly spaced nodes
/// `xi_i = e^{2 pi i i / N}` on the first circle, with the `z2`-roots sorted
/// into continuous branches.
#[derive(Clone, Debug)]
pub struct LevelSetBranches {
    pub alpha: C64,
    /// first-coordinate nodes, `xi_i = e^{2 pi i i / N}`
    pub nodes: Vec<C64>,
    /// `branches[j][i]` is the value of the j-th branch over `nodes[i]`
    pub branches: Vec<Vec<C64>>,
    /// largest arc gap between consecutive values on any branch, including
    /// the wrap-around step
    pub continuity_residual: f64,
    /// node indices where two roots collided within matching tolerance
    pub crossings: Vec<usize>,
}

/// Torus points where `p` and `p~` vanish simultaneously (within tolerance),
/// i.e. where the boundary values of the function are discontinuous.
#[derive(Clone, Debug, Default)]
pub struct SingularSet {
    pub points: Vec<(C64, C64)>,
}

impl Rif {
    /// Validates stability of `p` by sampling, forms the reflection, and
    /// spot-checks inner-ness (interior contractivity and boundary
    /// unimodularity away from singular points).
    pub fn new(p: BiPoly, monomial: (usize, usize), phase: f64) -> Result<Self> {
        let cert = p.sampled_stability(STABILITY_SAMPLES, STABILITY_TOL)?;
        if !cert.stable {
            let (z1, modulus) = match cert.witness {
                Some((_, fixed, root)) => (fixed, root.norm()),
                None => (C64::new(0.0, 0.0), 0.0),
            };
            return Err(ClarkError::Stability { z1, modulus });
        }
        let p_tilde = p.reflect()?;
        let numerator = p_tilde
            .shift_monomial(monomial.0, monomial.1)
            .scaled(unit(phase));
        let rif = Rif {
            p,
            p_tilde,
            numerator,
            monomial,
            phase,
        };
        rif.check_inner()?;
        Ok(rif)
    }

    fn check_inner(&self) -> Result<()> {
        // interior contractivity on a coarse radial-angular grid
        for &r in &[0.35, 0.7, 0.95] {
            for a in 0..12 {
                for b in 0..12 {
                    let z1 = C64::from_polar(r, std::f64::consts::TAU * a as f64 / 12.0);
                    let z2 = C64::from_polar(r, std::f64::consts::TAU * b as f64 / 12.0 + 0.1);
                    let v = self.eval_interior(z1, z2)?;
                    if v.norm() > 1.0 + 1e-9 {
                        return Err(ClarkError::InnerUnimodularity {
                            z1,
                            z2,
                            deviation: v.norm() - 1.0,
                        });
                    }
                }
            }
        }
        // boundary unimodularity away from zeros of p
        let sing_tol = 1e-8 * self.p.scale().max(1.0);
        for a in 0..32 {
            for b in 0..32 {
                let z1 = unit(std::f64::consts::TAU * a as f64 / 32.0);
                let z2 = unit(std::f64::consts::TAU * b as f64 / 32.0);
                if self.p.eval(z1, z2).norm() < sing_tol.max(1e-6) {
                    continue;
                }
                let v = self.numerator.eval(z1, z2) / self.p.eval(z1, z2);
                if (v.norm() - 1.0).abs() > 1e-9 {
                    return Err(ClarkError::InnerUnimodularity {
                        z1,
                        z2,
                        deviation: (v.norm() - 1.0).abs(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn denominator(&self) -> &BiPoly {
        &self.p
    }

    pub fn reflection(&self) -> &BiPoly {
        &self.p_tilde
    }

    /// Polynomial numerator `e^{ia} z^m p~` of the function.
    pub fn numerator(&self) -> &BiPoly {
        &self.numerator
    }

    pub fn monomial(&self) -> (usize, usize) {
        self.monomial
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Bidegree of the denominator.
    pub fn bidegree(&self) -> (usize, usize) {
        self.p.bidegree()
    }

    /// Degree of the level sets in `z2` (and generic branch count).
    pub fn level_degree(&self) -> usize {
        self.p.bidegree().1 + self.monomial.1
    }

    /// `phi(0, 0)`.
    pub fn at_origin(&self) -> C64 {
        self.numerator.eval(C64::new(0.0, 0.0), C64::new(0.0, 0.0))
            / self.p.eval(C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    /// Evaluates inside the open bidisk; errors if a coordinate has modulus
    /// `>= 1`.
    pub fn eval_interior(&self, z1: C64, z2: C64) -> Result<C64> {
        if z1.norm() >= 1.0 || z2.norm() >= 1.0 {
            return Err(ClarkError::Domain {
                z1,
                z2,
                what: "both coordinates must lie strictly inside the disk".into(),
            });
        }
        Ok(self.numerator.eval(z1, z2) / self.p.eval(z1, z2))
    }

    /// Boundary value `q(zeta)/p(zeta)` at a torus point; errors within
    /// tolerance of a singular point, where the boundary limit is
    /// direction-dependent.
    pub fn eval_boundary(&self, z1: C64, z2: C64) -> Result<C64> {
        let sing_tol = 1e-10 * self.p.scale().max(1.0);
        let den = self.p.eval(z1, z2);
        if den.norm() < sing_tol.max(1e-10) {
            return Err(ClarkError::SingularPoint { z1, z2 });
        }
        Ok(self.numerator.eval(z1, z2) / den)
    }

    /// Boundary value with a nontangential fallback: within tolerance of a
    /// singular point the function is evaluated at radius `1 - 1e-6` along
    /// the same angles. Used for grid sampling where a finite value is
    /// required at every node.
    pub fn eval_boundary_or_inward(&self, z1: C64, z2: C64) -> C64 {
        match self.eval_boundary(z1, z2) {
            Ok(v) => v,
            Err(_) => {
                let r = 1.0 - 1e-6;
                let w1 = z1 * r;
                let w2 = z2 * r;
                self.numerator.eval(w1, w2) / self.p.eval(w1, w2)
            }
        }
    }

    /// Roots in `z2` of the level-set slice `(q - alpha p)(xi, .)`; each root
    /// must be unimodular within tolerance. Sorted by principal argument.
    pub fn level_set_slice(&self, alpha: C64, xi: C64) -> Result<Vec<C64>> {
        let pencil = self.numerator.sub(&self.p.scaled(alpha));
        let s = pencil.slice(1, xi);
        if s.is_zero() || s.degree() == 0 {
            // sliced pencil degenerates: xi lies on a vertical line of the
            // level set or alpha is exceptional
            return Err(ClarkError::ExceptionalAlpha {
                alpha,
                detail: format!("level-set slice at xi = {xi} has no z2-roots"),
            });
        }
        let roots = s.roots()?;
        for &root in &roots {
            let dev = (root.norm() - 1.0).abs();
            if dev > UNIMODULAR_TOL {
                return Err(ClarkError::NonUnimodularRoot {
                    root,
                    deviation: dev,
                });
            }
        }
        Ok(roots)
    }

    /// Builds the discretized level set over `n` nodes (a power of two,
    /// at least 64), sorting per-node roots into continuous branches by
    /// nearest-neighbor continuation from `xi = 1`.
    pub fn level_set_branches(&self, alpha: C64, n: usize) -> Result<LevelSetBranches> {
        if n < 64 || !n.is_power_of_two() {
            return Err(ClarkError::Config(format!(
                "node count must be a power of two >= 64, got {n}"
            )));
        }
        let nodes: Vec<C64> = (0..n)
            .map(|i| unit(std::f64::consts::TAU * i as f64 / n as f64))
            .collect();
        let per_node: Vec<Vec<C64>> = nodes
            .par_iter()
            .map(|&xi| self.level_set_slice(alpha, xi))
            .collect::<Result<_>>()?;

        let branch_count = per_node[0].len();
        for (i, roots) in per_node.iter().enumerate() {
            if roots.len() != branch_count {
                return Err(ClarkError::ExceptionalAlpha {
                    alpha,
                    detail: format!(
                        "root count changes from {branch_count} to {} at node {i}",
                        roots.len()
                    ),
                });
            }
        }

        // branches[j] starts from the roots over xi = 1 in argument order;
        // later nodes are matched greedily by smallest arc distance
        let mut branches: Vec<Vec<C64>> = (0..branch_count)
            .map(|j| {
                let mut v = Vec::with_capacity(n);
                v.push(per_node[0][j]);
                v
            })
            .collect();
        let mut crossings = Vec::new();
        let collision_tol = 1e-7;
        for i in 1..n {
            let roots = &per_node[i];
            let mut pairs: Vec<(f64, usize, usize)> =
                Vec::with_capacity(branch_count * branch_count);
            for (j, branch) in branches.iter().enumerate() {
                let prev = *branch.last().unwrap();
                for (r, &root) in roots.iter().enumerate() {
                    pairs.push(((root - prev).norm(), j, r));
                }
            }
            pairs.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap()
                    .then(a.1.cmp(&b.1))
                    .then(a.2.cmp(&b.2))
            });
            let mut branch_done = vec![false; branch_count];
            let mut root_done = vec![false; branch_count];
            let mut assigned = 0;
            for &(_, j, r) in &pairs {
                if branch_done[j] || root_done[r] {
                    continue;
                }
                branches[j].push(roots[r]);
                branch_done[j] = true;
                root_done[r] = true;
                assigned += 1;
                if assigned == branch_count {
                    break;
                }
            }
            // collision: two distinct roots closer than tolerance
            for a in 0..branch_count {
                for b in a + 1..branch_count {
                    if (roots[a] - roots[b]).norm() < collision_tol {
                        crossings.push(i);
                    }
                }
            }
        }

        // a branch that is constant in z2 signals a horizontal line in the
        // level set, i.e. an exceptional alpha (also the atorality spot-check)
        for branch in &branches {
            let first = branch[0];
            if branch.iter().all(|&v| (v - first).norm() < 1e-10) && n >= 64 {
                return Err(ClarkError::ExceptionalAlpha {
                    alpha,
                    detail: format!("level set contains the horizontal line z2 = {first}"),
                });
            }
        }

        let mut continuity_residual = 0.0f64;
        for branch in &branches {
            for i in 0..n {
                let gap = (branch[(i + 1) % n] - branch[i]).norm();
                continuity_residual = continuity_residual.max(gap);
            }
        }
        crossings.dedup();

        Ok(LevelSetBranches {
            alpha,
            nodes,
            branches,
            continuity_residual,
            crossings,
        })
    }

    /// Grid test for exceptional `alpha`: true when the level set contains a
    /// horizontal or vertical line to grid resolution. Singular nodes are
    /// skipped (the boundary value is ill-defined there).
    pub fn is_exceptional(&self, alpha: C64, grid_n: usize, tol: f64) -> Result<bool> {
        if grid_n < 128 {
            return Err(ClarkError::Config(format!(
                "exceptional-alpha grid must have at least 128 points, got {grid_n}"
            )));
        }
        let points: Vec<C64> = (0..grid_n)
            .map(|i| unit(std::f64::consts::TAU * i as f64 / grid_n as f64))
            .collect();
        let sing_tol = 1e-8 * self.p.scale().max(1.0);
        // horizontal line z2 = eta: phi(xi, eta) = alpha for all xi
        'eta: for &eta in &points {
            for &xi in &points {
                if self.p.eval(xi, eta).norm() < sing_tol {
                    continue; // singular node, no boundary value
                }
                let v = self.numerator.eval(xi, eta) / self.p.eval(xi, eta);
                if (v - alpha).norm() >= tol {
                    continue 'eta;
                }
            }
            return Ok(true);
        }
        // vertical line z1 = eta
        'eta2: for &eta in &points {
            for &zeta in &points {
                if self.p.eval(eta, zeta).norm() < sing_tol {
                    continue;
                }
                let v = self.numerator.eval(eta, zeta) / self.p.eval(eta, zeta);
                if (v - alpha).norm() >= tol {
                    continue 'eta2;
                }
            }
            return Ok(true);
        }
        Ok(false)
    }

    /// Checks `is_exceptional` at default resolution and returns an error for
    /// exceptional values; used as the precondition guard by downstream
    /// constructions.
    pub fn require_generic(&self, alpha: C64) -> Result<()> {
        if self.is_exceptional(alpha, EXCEPTIONAL_GRID, EXCEPTIONAL_TOL)? {
            return Err(ClarkError::ExceptionalAlpha {
                alpha,
                detail: "level set contains a horizontal or vertical line".into(),
            });
        }
        Ok(())
    }

    /// Locates common torus zeros of `p` and `p~`. On the torus
    /// `|p~| = |p|`, so these are the zeros of `p` on the torus: the scan
    /// walks the `z2`-roots of `p(xi, .)` over a fine `xi`-grid and refines
    /// local minima of the root-modulus gap by golden-section search.
    pub fn singular_points(&self) -> SingularSet {
        if self.p.bidegree() == (0, 0) {
            return SingularSet::default();
        }
        let tol = 1e-8 * self.p.scale().max(1.0);
        let coarse = 512usize;
        // distance of the z2-root set of p(e^{i t}, .) from the unit circle
        let circle_gap = |t: f64| -> f64 {
            let xi = unit(t);
            let s = self.p.slice(1, xi);
            if s.is_zero() {
                return 0.0;
            }
            if s.degree() == 0 {
                return f64::INFINITY;
            }
            match s.roots() {
                Ok(roots) => roots
                    .iter()
                    .map(|r| (r.norm() - 1.0).abs())
                    .fold(f64::INFINITY, f64::min),
                Err(_) => f64::INFINITY,
            }
        };
        let gaps: Vec<f64> = (0..coarse)
            .into_par_iter()
            .map(|i| circle_gap(std::f64::consts::TAU * i as f64 / coarse as f64))
            .collect();
        let mut found: Vec<(C64, C64)> = Vec::new();
        for i in 0..coarse {
            let prev = gaps[(i + coarse - 1) % coarse];
            let next = gaps[(i + 1) % coarse];
            let here = gaps[i];
            if here > 1e-2 || here > prev || here > next {
                continue; // not a local minimum candidate
            }
            let t0 = std::f64::consts::TAU * (i as f64 - 1.0) / coarse as f64;
            let t1 = std::f64::consts::TAU * (i as f64 + 1.0) / coarse as f64;
            let t_star = golden_minimize(circle_gap, t0, t1, 1e-12);
            if circle_gap(t_star) < tol {
                let xi = unit(t_star);
                let s = self.p.slice(1, xi);
                if let Ok(roots) = s.roots() {
                    for r in roots {
                        if (r.norm() - 1.0).abs() < tol.max(1e-7) {
                            let z2 = r / r.norm();
                            if !found
                                .iter()
                                .any(|&(a, b)| (a - xi).norm() < 1e-6 && (b - z2).norm() < 1e-6)
                            {
                                found.push((xi, z2));
                            }
                        }
                    }
                }
            }
        }
        found.sort_by(|a, b| {
            a.0.arg()
                .partial_cmp(&b.0.arg())
                .unwrap()
                .then(a.1.arg().partial_cmp(&b.1.arg()).unwrap())
        });
        SingularSet { points: found }
    }

    /// Clark weight `1 / |d phi / d z_axis|` at a torus point, with the
    /// derivative computed by the quotient rule on the polynomial numerator
    /// and denominator.
    pub fn clark_weight_at(&self, z1: C64, z2: C64, axis: usize) -> Result<f64> {
        let sing_tol = 1e-10 * self.p.scale().max(1.0);
        let den = self.p.eval(z1, z2);
        if den.norm() < sing_tol.max(1e-10) {
            return Err(ClarkError::SingularPoint { z1, z2 });
        }
        let dq = self.numerator.partial(axis).eval(z1, z2);
        let dp = self.p.partial(axis).eval(z1, z2);
        let q = self.numerator.eval(z1, z2);
        let derivative = (dq * den - q * dp) / (den * den);
        let scale = self.p.scale().max(self.numerator.scale());
        if derivative.norm() < 1e-12 * scale {
            return Err(ClarkError::VanishingDerivative { z1, z2 });
        }
        Ok(1.0 / derivative.norm())
    }
}

fn golden_minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

impl LevelSetBranches {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Flattens to `(theta1, theta2, branch)` triples in `(-pi, pi]` angles.
    pub fn points(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::with_capacity(self.nodes.len() * self.branches.len());
        for (j, branch) in self.branches.iter().enumerate() {
            for (i, &g) in branch.iter().enumerate() {
                out.push((wrap_angle(self.nodes[i].arg()), wrap_angle(g.arg()), j));
            }
        }
        out
    }
}

/// Wire format for [`Rif`]: `{"p": <BiPoly>, "monomial":[m1,m2], "phase": a}`.
#[derive(Serialize, Deserialize)]
pub struct RifJson {
    pub p: BiPolyJson,
    pub monomial: [usize; 2],
    pub phase: f64,
}

impl From<&Rif> for RifJson {
    fn from(rif: &Rif) -> Self {
        RifJson {
            p: (&rif.p).into(),
            monomial: [rif.monomial.0, rif.monomial.1],
            phase: rif.phase,
        }
    }
}

impl TryFrom<RifJson> for Rif {
    type Error = ClarkError;

    fn try_from(j: RifJson) -> Result<Self> {
        Rif::new(j.p.try_into()?, (j.monomial[0], j.monomial[1]), j.phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn construction_examples() {
        let zw = bundled::zw();
        assert_eq!(zw.bidegree(), (0, 0));
        assert_eq!(zw.monomial(), (1, 1));

        let fave = bundled::fave();
        assert_eq!(fave.bidegree(), (1, 1));
        // numerator of the singular example is 2 z1 z2 - z1 - z2
        assert!((fave.numerator().coeff(1, 1) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((fave.numerator().coeff(1, 0) - c(-1.0, 0.0)).norm() < 1e-15);

        let unstable = BiPoly::from_real(1, 0, &[1.0, -2.0]).unwrap();
        assert!(matches!(
            Rif::new(unstable, (0, 0), 0.0),
            Err(ClarkError::Stability { .. })
        ));
    }

    #[test]
    fn interior_evaluation_examples() {
        let zw = bundled::zw();
        let v = zw.eval_interior(c(0.5, 0.0), c(0.0, 0.5)).unwrap();
        assert!((v - c(0.0, 0.25)).norm() < 1e-15);

        let fave = bundled::fave();
        assert!(fave.eval_interior(c(0.0, 0.0), c(0.0, 0.0)).unwrap().norm() < 1e-15);
        let v = fave.eval_interior(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert!((v - c(-1.0 / 3.0, 0.0)).norm() < 1e-12);

        assert!(zw.eval_interior(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn boundary_evaluation_examples() {
        let zw = bundled::zw();
        let v = zw.eval_boundary(c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);

        let fave = bundled::fave();
        for &theta in &[1.0, 2.0, -2.5] {
            let v = fave.eval_boundary(c(1.0, 0.0), unit(theta)).unwrap();
            assert!((v - c(-1.0, 0.0)).norm() < 1e-10, "theta={theta}");
        }
        assert!(matches!(
            fave.eval_boundary(c(1.0, 0.0), c(1.0, 0.0)),
            Err(ClarkError::SingularPoint { .. })
        ));
    }

    #[test]
    fn level_set_slice_examples() {
        let zw = bundled::zw();
        let roots = zw.level_set_slice(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - c(0.0, -1.0)).norm() < 1e-12);

        let fave = bundled::fave();
        let alpha = c(0.0, 1.0);
        let roots = fave.level_set_slice(alpha, c(1.0, 0.0)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - c(1.0, 0.0)).norm() < 1e-12);

        let xi = c(-1.0, 0.0);
        let roots = fave.level_set_slice(alpha, xi).unwrap();
        let expected = (2.0 * alpha - alpha * xi + xi) / (2.0 * xi - 1.0 + alpha);
        assert!((roots[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn branch_tracking_follows_the_rigid_rotation() {
        let zw = bundled::zw();
        let alpha = unit(std::f64::consts::FRAC_PI_4);
        let ls = zw.level_set_branches(alpha, 256).unwrap();
        assert_eq!(ls.branch_count(), 1);
        for (i, &g) in ls.branches[0].iter().enumerate() {
            let expected = alpha * ls.nodes[i].conj();
            assert!((g - expected).norm() < 1e-10);
        }
        assert!(ls.crossings.is_empty());

        let ls64 = zw.level_set_branches(alpha, 64).unwrap();
        assert!(ls64.continuity_residual <= std::f64::consts::TAU / 64.0 + 1e-8);
    }

    #[test]
    fn fave_branch_passes_through_the_singularity() {
        let fave = bundled::fave();
        let ls = fave.level_set_branches(c(1.0, 0.0), 256).unwrap();
        assert_eq!(ls.branch_count(), 1);
        // branch over xi = 1 sits at z2 = 1
        assert!((ls.branches[0][0] - c(1.0, 0.0)).norm() < 1e-8);
    }

    // the branch construction reuses the slice solver node by node
    #[test]
    fn branches_reproduce_per_node_slices() {
        let fave = bundled::fave();
        let alpha = unit(0.7);
        let ls = fave.level_set_branches(alpha, 64).unwrap();
        for (i, &xi) in ls.nodes.iter().enumerate() {
            let mut from_branches: Vec<C64> =
                ls.branches.iter().map(|branch| branch[i]).collect();
            let mut from_slice = fave.level_set_slice(alpha, xi).unwrap();
            let key = |z: &C64| z.arg();
            from_branches.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            from_slice.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            for (a, b) in from_branches.iter().zip(&from_slice) {
                assert_eq!(a, b, "node {i}");
            }
        }
    }

    #[test]
    fn exceptional_alpha_examples() {
        let fave = bundled::fave();
        assert!(fave.is_exceptional(c(-1.0, 0.0), 128, 1e-6).unwrap());
        assert!(!fave.is_exceptional(c(1.0, 0.0), 128, 1e-6).unwrap());

        let zw = bundled::zw();
        assert!(!zw.is_exceptional(c(0.0, 1.0), 128, 1e-6).unwrap());
    }

    #[test]
    fn singular_point_examples() {
        let fave = bundled::fave();
        let sing = fave.singular_points();
        assert_eq!(sing.points.len(), 1);
        assert!((sing.points[0].0 - c(1.0, 0.0)).norm() < 1e-6);
        assert!((sing.points[0].1 - c(1.0, 0.0)).norm() < 1e-6);

        assert!(bundled::zw().singular_points().points.is_empty());

        let p = BiPoly::from_real(1, 1, &[3.0, -1.0, -1.0, 0.0]).unwrap();
        let rif = Rif::new(p, (0, 0), 0.0).unwrap();
        assert!(rif.singular_points().points.is_empty());
    }

    #[test]
    fn clark_weights_match_closed_forms() {
        let zw = bundled::zw();
        for &theta in &[0.3, 1.7, -2.1] {
            let z1 = unit(theta);
            let z2 = unit(0.9) * z1.conj(); // on C_alpha for alpha = e^{0.9 i}
            let w = zw.clark_weight_at(z1, z2, 2).unwrap();
            assert!((w - 1.0).abs() < 1e-12);
        }

        // weight along the level curve of the singular example:
        // 2 |xi - 1|^2 / |2 xi - 1 + alpha|^2
        let fave = bundled::fave();
        let alpha = unit(0.7);
        for &theta in &[0.5, 1.3, 2.9, -1.1] {
            let xi = unit(theta);
            let g = (2.0 * alpha - alpha * xi + xi) / (2.0 * xi - 1.0 + alpha);
            let w = fave.clark_weight_at(xi, g, 2).unwrap();
            let expected = 2.0 * (xi - 1.0).norm_sqr() / (2.0 * xi - 1.0 + alpha).norm_sqr();
            assert!(
                (w - expected).abs() < 1e-10 * expected.max(1.0),
                "theta={theta}"
            );
        }

        // at the singular point the weight limit is zero; the quotient rule
        // itself must refuse
        assert!(fave.clark_weight_at(c(1.0, 0.0), c(1.0, 0.0), 2).is_err());
        let near = unit(1e-4);
        let g = (2.0 * alpha - alpha * near + near) / (2.0 * near - 1.0 + alpha);
        let w = fave.clark_weight_at(near, g, 2).unwrap();
        assert!(w < 1e-6, "weight near the singularity should vanish, got {w}");
    }

    #[test]
    fn rif_json_round_trip() {
        let fave = bundled::fave();
        let json = serde_json::to_string(&RifJson::from(&fave)).unwrap();
        assert!(json.contains("\"monomial\""));
        let back: Rif = serde_json::from_str::<RifJson>(&json)
            .unwrap()
            .try_into()
            .unwrap();
        assert_eq!(back.bidegree(), fave.bidegree());
        assert_eq!(back.monomial(), fave.monomial());
    }
}
