//! Truncated two-variable model space: the projector onto `K_phi`, compressed
//! shifts, the bounded symbols driving the unitary perturbation, the Clark
//! unitaries themselves, the evaluation embedding into the quadrature space
//! and its adjoint, and the residual checks tying them together.
//!
//! Functions are represented by monomial coefficients on the box
//! `0 <= k, l <= D`; torus function products run through a `G x G` boundary
//! grid with frequency truncation (`G` a power of two, `G >= 2D + 2`).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bipoly::{BiPoly, UniPoly};
use crate::clark::ClarkMeasureQuad;
use crate::error::ClarkError;
use crate::fft;
use crate::rif::Rif;
use crate::{unit, Result, C64};

/// Coordinate direction on the bidisk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Z1,
    Z2,
}

impl Axis {
    /// 1-based index used by the polynomial layer.
    pub fn index(self) -> usize {
        match self {
            Axis::Z1 => 1,
            Axis::Z2 => 2,
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::Z1 => Axis::Z2,
            Axis::Z2 => Axis::Z1,
        }
    }
}

/// Truncation parameters: monomials `z1^k z2^l` with `0 <= k, l <= degree`,
/// sampled on a `grid x grid` torus grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncatedHardy {
    degree: usize,
    grid: usize,
}

impl TruncatedHardy {
    pub fn new(degree: usize, grid: usize) -> Result<Self> {
        if !grid.is_power_of_two() || grid < 2 * degree + 2 {
            return Err(ClarkError::Config(format!(
                "grid must be a power of two >= 2 D + 2 = {}, got {grid}",
                2 * degree + 2
            )));
        }
        Ok(TruncatedHardy { degree, grid })
    }

    /// Default grid for a function: `max(2D + 2, 64)` rounded up to a power
    /// of two, doubled when the function has boundary singularities (its
    /// boundary values decay slowly in frequency).
    pub fn for_rif(phi: &Rif, degree: usize) -> Self {
        let mut grid = (2 * degree + 2).max(64).next_power_of_two();
        if !phi.singular_points().points.is_empty() {
            grid *= 2;
        }
        TruncatedHardy { degree, grid }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn dimension(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    fn index(&self, k: usize, l: usize) -> usize {
        k * (self.degree + 1) + l
    }

    /// Boundary samples of the function on the grid, row-major in the first
    /// angle; singular grid points take the nontangential fallback value.
    pub fn sample_boundary(&self, phi: &Rif) -> Vec<C64> {
        let g = self.grid;
        (0..g * g)
            .into_par_iter()
            .map(|idx| {
                let a = idx / g;
                let b = idx % g;
                let z1 = unit(std::f64::consts::TAU * a as f64 / g as f64);
                let z2 = unit(std::f64::consts::TAU * b as f64 / g as f64);
                phi.eval_boundary_or_inward(z1, z2)
            })
            .collect()
    }

    /// Grid values of a box-coefficient vector (zero-padded inverse
    /// transform).
    fn grid_values(&self, coeffs: &DVector<C64>) -> Vec<C64> {
        let g = self.grid;
        let d = self.degree;
        let mut data = vec![C64::new(0.0, 0.0); g * g];
        for k in 0..=d {
            for l in 0..=d {
                data[k * g + l] = coeffs[self.index(k, l)];
            }
        }
        fft::inverse2(&mut data, g);
        data
    }

    /// Box coefficients of a grid function (forward transform, truncated to
    /// frequencies `0..=D` in each axis).
    fn box_coeffs(&self, grid_fn: &[C64]) -> DVector<C64> {
        let g = self.grid;
        let d = self.degree;
        let mut data = grid_fn.to_vec();
        fft::forward2(&mut data, g);
        let scale = 1.0 / (g * g) as f64;
        let mut out = DVector::<C64>::zeros(self.dimension());
        for k in 0..=d {
            for l in 0..=d {
                out[self.index(k, l)] = data[k * g + l] * scale;
            }
        }
        out
    }

    /// Evaluates a box-coefficient vector at a point by Horner recursion.
    pub fn eval_coeffs(&self, coeffs: &DVector<C64>, z1: C64, z2: C64) -> C64 {
        let d = self.degree;
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..=d).rev() {
            let mut inner = C64::new(0.0, 0.0);
            for l in (0..=d).rev() {
                inner = inner * z2 + coeffs[self.index(k, l)];
            }
            acc = acc * z1 + inner;
        }
        acc
    }
}

/// Numerical projector onto the model space and an orthonormal basis of its
/// range.
#[derive(Clone, Debug)]
pub struct KphiBasis {
    pub projector: DMatrix<C64>,
    /// `dimension x rank`, orthonormal columns
    pub basis: DMatrix<C64>,
    pub spectral_cut: f64,
    /// singular values of the symmetrized projector (conditioning report)
    pub spectrum: Vec<f64>,
    /// `|| (P^2 - P) B ||`: idempotency defect on the retained subspace,
    /// i.e. `max |s (s - 1)|` over the kept spectral values
    pub idempotency: f64,
    /// `|| P - P* || / 2` of the raw assembly
    pub hermiticity: f64,
    /// per-column coefficient mass outside the half box
    /// `max(k, l) <= D/2`; operators spread degrees upward, so only columns
    /// well inside the box see truncation-free action
    pub boundary_mass: Vec<f64>,
}

impl KphiBasis {
    /// Assembles `P f = f - phi P_+(conj(phi) f)` column by column over the
    /// monomials (boundary sampling, pointwise multiplication, nonnegative
    /// frequency truncation) and keeps the spectral range above the cut.
    pub fn build(phi: &Rif, space: &TruncatedHardy) -> KphiBasis {
        Self::build_with_cut(phi, space, 0.5)
    }

    pub fn build_with_cut(phi: &Rif, space: &TruncatedHardy, spectral_cut: f64) -> KphiBasis {
        let g = space.grid;
        let d = space.degree;
        let dim = space.dimension();
        let phi_grid = space.sample_boundary(phi);
        let phi_conj: Vec<C64> = phi_grid.iter().map(|v| v.conj()).collect();

        // power tables: pow[a][k] = e^{2 pi i a k / G}
        let pow_table: Vec<Vec<C64>> = (0..g)
            .map(|a| {
                let base = unit(std::f64::consts::TAU * a as f64 / g as f64);
                let mut row = Vec::with_capacity(d + 1);
                let mut acc = C64::new(1.0, 0.0);
                for _ in 0..=d {
                    row.push(acc);
                    acc *= base;
                }
                row
            })
            .collect();

        let columns: Vec<DVector<C64>> = (0..dim)
            .into_par_iter()
            .map(|col| {
                let k = col / (d + 1);
                let l = col % (d + 1);
                // conj(phi) * z1^k z2^l on the grid
                let mut work: Vec<C64> = (0..g * g)
                    .map(|idx| {
                        let a = idx / g;
                        let b = idx % g;
                        phi_conj[idx] * pow_table[a][k] * pow_table[b][l]
                    })
                    .collect();
                fft::forward2(&mut work, g);
                // keep nonnegative frequencies below the Nyquist band
                for m in 0..g {
                    for n in 0..g {
                        if m >= g / 2 || n >= g / 2 {
                            work[m * g + n] = C64::new(0.0, 0.0);
                        }
                    }
                }
                fft::inverse2(&mut work, g);
                let scale = 1.0 / (g * g) as f64;
                for (idx, v) in work.iter_mut().enumerate() {
                    *v = *v * scale * phi_grid[idx];
                }
                let mut column = -space.box_coeffs(&work);
                column[space.index(k, l)] += 1.0;
                column
            })
            .collect();

        let mut projector = DMatrix::<C64>::zeros(dim, dim);
        for (j, col) in columns.iter().enumerate() {
            projector.set_column(j, col);
        }

        let hermiticity = spectral_norm(&(projector.clone() - projector.adjoint())) / 2.0;
        let sym = (projector.clone() + projector.adjoint()) * C64::new(0.5, 0.0);

        let svd = sym.clone().svd(true, false);
        let u = svd.u.expect("u requested");
        let spectrum: Vec<f64> = svd.singular_values.iter().cloned().collect();
        let rank = spectrum.iter().filter(|&&s| s > spectral_cut).count();

        // idempotency defect restricted to the retained range
        let idempotency = spectrum
            .iter()
            .filter(|&&s| s > spectral_cut)
            .map(|&s| (s * s - s).abs())
            .fold(0.0, f64::max);

        // Orthonormal basis of the retained range by pivoted Gram-Schmidt on
        // the range projector's columns. Spectral vectors inside degenerate
        // eigenspaces mix arbitrarily; the pivoted sweep realigns them with
        // the coordinate directions wherever the range allows it, which keeps
        // the basis reproducible and the boundary-mass report meaningful.
        let u_kept = u.columns(0, rank).clone_owned();
        let q_range = &u_kept * u_kept.adjoint();
        let mut work: Vec<DVector<C64>> = (0..dim).map(|c| q_range.column(c).clone_owned()).collect();
        let mut picked: Vec<(usize, DVector<C64>)> = Vec::with_capacity(rank);
        for _ in 0..rank {
            let mut pivot = 0usize;
            let mut best = -1.0f64;
            for (c, col) in work.iter().enumerate() {
                let norm = col.norm();
                if norm > best + 1e-12 {
                    best = norm;
                    pivot = c;
                }
            }
            let mut v = work[pivot].clone();
            v /= C64::new(v.norm(), 0.0);
            // canonical phase: dominant entry positive real
            let mut arg_max = 0usize;
            let mut biggest = -1.0f64;
            for (r, entry) in v.iter().enumerate() {
                if entry.norm() > biggest + 1e-12 {
                    biggest = entry.norm();
                    arg_max = r;
                }
            }
            let phase = v[arg_max] / v[arg_max].norm();
            v /= phase;
            for col in &mut work {
                let overlap = v.dotc(col);
                *col -= &v * overlap;
            }
            picked.push((arg_max, v));
        }
        picked.sort_by_key(|(arg_max, _)| *arg_max);
        let mut basis = DMatrix::<C64>::zeros(dim, rank);
        for (j, (_, col)) in picked.iter().enumerate() {
            basis.set_column(j, col);
        }

        let half = d / 2;
        let boundary_mass = (0..rank)
            .map(|j| {
                let mut acc = 0.0;
                for k in 0..=d {
                    for l in 0..=d {
                        if k.max(l) > half {
                            acc += basis[(space.index(k, l), j)].norm_sqr();
                        }
                    }
                }
                acc.sqrt()
            })
            .collect();

        KphiBasis {
            projector,
            basis,
            spectral_cut,
            spectrum,
            idempotency,
            hermiticity,
            boundary_mass,
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Basis coordinates of a box-coefficient vector (orthogonal projection
    /// onto the basis span).
    pub fn coords(&self, coeffs: &DVector<C64>) -> DVector<C64> {
        self.basis.adjoint() * coeffs
    }

    /// Columns essentially supported in the half box (coefficient mass
    /// outside `max(k, l) <= D/2` below the threshold); operator identities
    /// restricted to these columns are unaffected by the box truncation up
    /// to tails that shrink exponentially in `D`.
    pub fn interior_columns(&self, threshold: f64) -> Vec<usize> {
        (0..self.rank())
            .filter(|&j| self.boundary_mass[j] < threshold)
            .collect()
    }
}

/// A square operator on an explicit finite basis.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub matrix: DMatrix<C64>,
    /// `"kphi"` for model-space bases, `"nodes"` for quadrature-node bases
    pub basis_ref: String,
    pub residuals: BTreeMap<String, f64>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Boundary samples of the bounded symbol
/// `psi^1 = conj(alpha) (B_1 phi) / (1 - conj(alpha) phi(0, z2))`
/// (axis 2 symmetric), with its boundedness certificate.
#[derive(Clone, Debug)]
pub struct PsiAlpha {
    pub axis: Axis,
    pub alpha: C64,
    /// `G x G` row-major samples on the torus grid
    pub samples: Vec<C64>,
    pub max_modulus: f64,
}

/// Builds the symbol from its rational closed form. For axis `Z1`:
/// `psi = conj(alpha) N(z) / (p(z) d(z2))` with
/// `N = (q p(0,.) - q(0,.) p) / z1` and `d = p(0,.) - conj(alpha) q(0,.)`.
/// A root of `d` inside the closed disk means the symbol is unbounded and the
/// value of alpha exceptional.
pub fn psi_alpha(phi: &Rif, alpha: C64, axis: Axis, space: &TruncatedHardy) -> Result<PsiAlpha> {
    let q = phi.numerator();
    let p = phi.denominator();
    let slice_axis = axis.index();
    let origin = C64::new(0.0, 0.0);
    let p0 = p.slice(slice_axis, origin);
    let q0 = q.slice(slice_axis, origin);
    let lift = |u: &UniPoly| -> BiPoly {
        match axis {
            Axis::Z1 => BiPoly::new(0, u.degree(), u.coeffs().to_vec()).expect("lift layout"),
            Axis::Z2 => BiPoly::new(u.degree(), 0, u.coeffs().to_vec()).expect("lift layout"),
        }
    };
    let numerator_full = q.mul(&lift(&p0)).sub(&lift(&q0).mul(p));
    let (n_poly, residue) = numerator_full.divide_monomial(slice_axis);
    debug_assert!(residue <= 1e-10 * numerator_full.scale().max(1.0));

    let d_poly = p0.add(&q0.scaled(-alpha.conj()));
    if d_poly.is_zero() {
        return Err(ClarkError::ExceptionalAlpha {
            alpha,
            detail: "symbol denominator vanishes identically".into(),
        });
    }
    if d_poly.degree() >= 1 {
        for root in d_poly.roots()? {
            if root.norm() <= 1.0 + 1e-6 {
                return Err(ClarkError::ExceptionalAlpha {
                    alpha,
                    detail: format!(
                        "symbol denominator has the zero {root} in the closed disk; \
                         the symbol is unbounded"
                    ),
                });
            }
        }
    }

    let g = space.grid;
    let scale = p.scale().max(1.0);
    let samples: Vec<C64> = (0..g * g)
        .into_par_iter()
        .map(|idx| {
            let a = idx / g;
            let b = idx % g;
            let z1 = unit(std::f64::consts::TAU * a as f64 / g as f64);
            let z2 = unit(std::f64::consts::TAU * b as f64 / g as f64);
            let d_val = match axis {
                Axis::Z1 => d_poly.eval(z2),
                Axis::Z2 => d_poly.eval(z1),
            };
            let den = p.eval(z1, z2) * d_val;
            if den.norm() < 1e-9 * scale {
                // removable 0/0 at a boundary singularity: approach from inside
                let r = 1.0 - 1e-6;
                let (w1, w2) = (z1 * r, z2 * r);
                let dv = match axis {
                    Axis::Z1 => d_poly.eval(w2),
                    Axis::Z2 => d_poly.eval(w1),
                };
                alpha.conj() * n_poly.eval(w1, w2) / (p.eval(w1, w2) * dv)
            } else {
                alpha.conj() * n_poly.eval(z1, z2) / den
            }
        })
        .collect();
    let max_modulus = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_modulus > 1e6 {
        return Err(ClarkError::ExceptionalAlpha {
            alpha,
            detail: format!("symbol grid maximum {max_modulus:.3e} indicates unboundedness"),
        });
    }
    Ok(PsiAlpha {
        axis,
        alpha,
        samples,
        max_modulus,
    })
}

/// Matrix of the compressed shift `P_phi M_{z_axis}` in the basis.
pub fn compressed_shift(basis: &KphiBasis, space: &TruncatedHardy, axis: Axis) -> TruncatedOperator {
    let shifted = shift_columns(&basis.basis, space, axis);
    let matrix = basis.basis.adjoint() * (&basis.projector * shifted);
    TruncatedOperator {
        matrix,
        basis_ref: format!("kphi-{}", basis.rank()),
        residuals: BTreeMap::new(),
    }
}

fn shift_columns(cols: &DMatrix<C64>, space: &TruncatedHardy, axis: Axis) -> DMatrix<C64> {
    let d = space.degree;
    let mut out = DMatrix::<C64>::zeros(cols.nrows(), cols.ncols());
    for j in 0..cols.ncols() {
        for k in 0..=d {
            for l in 0..=d {
                let v = cols[(space.index(k, l), j)];
                match axis {
                    Axis::Z1 if k < d => out[(space.index(k + 1, l), j)] = v,
                    Axis::Z2 if l < d => out[(space.index(k, l + 1), j)] = v,
                    _ => {}
                }
            }
        }
    }
    out
}

/// Backward shift on box coefficients: degree moves down by one along the
/// axis, the constant-in-axis part is dropped.
pub fn backward_shift(coeffs: &DVector<C64>, space: &TruncatedHardy, axis: Axis) -> DVector<C64> {
    let d = space.degree;
    let mut out = DVector::<C64>::zeros(coeffs.len());
    for k in 0..=d {
        for l in 0..=d {
            let v = coeffs[space.index(k, l)];
            match axis {
                Axis::Z1 if k > 0 => out[space.index(k - 1, l)] = v,
                Axis::Z2 if l > 0 => out[space.index(k, l - 1)] = v,
                _ => {}
            }
        }
    }
    out
}

/// Correction term `P_phi P_{H^2_other} M_{conj(psi)}` applied to one
/// box-coefficient vector, before the final projection.
fn correction_coeffs(
    psi: &PsiAlpha,
    space: &TruncatedHardy,
    coeffs: &DVector<C64>,
) -> DVector<C64> {
    let g = space.grid;
    let d = space.degree;
    let mut values = space.grid_values(coeffs);
    for (idx, v) in values.iter_mut().enumerate() {
        *v *= psi.samples[idx].conj();
    }
    let mut spec = values;
    fft::forward2(&mut spec, g);
    let scale = 1.0 / (g * g) as f64;
    let mut out = DVector::<C64>::zeros(space.dimension());
    match psi.axis {
        // U^1 correction lands in H^2_2: frequencies (0, l)
        Axis::Z1 => {
            for l in 0..=d {
                out[space.index(0, l)] = spec[l] * scale;
            }
        }
        // U^2 correction lands in H^2_1: frequencies (k, 0)
        Axis::Z2 => {
            for k in 0..=d {
                out[space.index(k, 0)] = spec[k * g] * scale;
            }
        }
    }
    out
}

/// Clark unitary `U = S_phi + P_phi P_{H^2} M_{conj(psi)}` on the basis.
/// Stores the full-basis unitarity residual; truncation-affected boundary
/// columns make that residual pessimistic (see
/// [`KphiBasis::interior_columns`]).
pub fn clark_unitary(
    phi: &Rif,
    alpha: C64,
    axis: Axis,
    basis: &KphiBasis,
    space: &TruncatedHardy,
) -> Result<TruncatedOperator> {
    phi.require_generic(alpha)?;
    let psi = psi_alpha(phi, alpha, axis, space)?;
    let shift = compressed_shift(basis, space, axis);
    let rank = basis.rank();
    let correction_cols: Vec<DVector<C64>> = (0..rank)
        .into_par_iter()
        .map(|j| {
            let col: DVector<C64> = basis.basis.column(j).clone_owned();
            let v = correction_coeffs(&psi, space, &col);
            basis.basis.adjoint() * (&basis.projector * v)
        })
        .collect();
    let mut matrix = shift.matrix;
    for (j, col) in correction_cols.iter().enumerate() {
        for i in 0..rank {
            matrix[(i, j)] += col[i];
        }
    }
    let unitarity = spectral_norm(&(matrix.adjoint() * &matrix - DMatrix::<C64>::identity(rank, rank)));
    let mut residuals = BTreeMap::new();
    residuals.insert("unitarity".to_string(), unitarity);
    Ok(TruncatedOperator {
        matrix,
        basis_ref: format!("kphi-{rank}"),
        residuals,
    })
}

/// The (boundary-value, mass-scaled) embedding into the quadrature space:
/// row `(branch, node)` of the matrix evaluates a basis vector at that node
/// and scales by the square root of the node mass, so Euclidean inner
/// products realize the measure pairing. Rows follow branch-major node-minor
/// order, skipping excluded nodes.
pub fn embedding_j(
    basis: &KphiBasis,
    space: &TruncatedHardy,
    mu: &ClarkMeasureQuad,
) -> DMatrix<C64> {
    let nodes = active_nodes(mu);
    let rank = basis.rank();
    let cols: Vec<DVector<C64>> = (0..rank).map(|j| basis.basis.column(j).clone_owned()).collect();
    let rows: Vec<Vec<C64>> = nodes
        .par_iter()
        .map(|&(z1, z2, mass)| {
            let sqrt_mass = mass.sqrt();
            cols.iter()
                .map(|col| space.eval_coeffs(col, z1, z2) * sqrt_mass)
                .collect()
        })
        .collect();
    let mut out = DMatrix::<C64>::zeros(nodes.len(), rank);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// Node data in embedding row order: `(zeta1, zeta2, mass)`.
pub fn active_nodes(mu: &ClarkMeasureQuad) -> Vec<(C64, C64, f64)> {
    let mut out = Vec::new();
    for (j, branch) in mu.branches.branches.iter().enumerate() {
        for (i, &g) in branch.iter().enumerate() {
            let mass = mu.node_mass[j][i];
            if mass > 0.0 {
                out.push((mu.branches.nodes[i], g, mass));
            }
        }
    }
    out
}

/// Coordinate multipliers in embedding row order.
pub fn node_multipliers(mu: &ClarkMeasureQuad, axis: Axis) -> Vec<C64> {
    active_nodes(mu)
        .iter()
        .map(|&(z1, z2, _)| match axis {
            Axis::Z1 => z1,
            Axis::Z2 => z2,
        })
        .collect()
}

/// Collocation points for the adjoint: the tensor grid of radius-0.5 roots of
/// unity with `s = max(ceil(sqrt(rank)), D + 1)` points per axis. The lower
/// bound `D + 1` keeps powers `z^k`, `k <= D`, distinct on the grid.
fn collocation_points(rank: usize, degree: usize) -> Vec<(C64, C64)> {
    let s = ((rank as f64).sqrt().ceil() as usize).max(degree + 1);
    let mut pts = Vec::with_capacity(s * s);
    for a in 0..s {
        for b in 0..s {
            pts.push((
                C64::from_polar(0.5, std::f64::consts::TAU * a as f64 / s as f64),
                C64::from_polar(0.5, std::f64::consts::TAU * b as f64 / s as f64),
            ));
        }
    }
    pts
}

/// Matrix form of the embedding adjoint: the conjugate transpose of
/// [`embedding_j`] (the adjoint in finite coordinates). The weighted
/// Cauchy-transform realization lives in [`adjoint_j_apply`], which must
/// agree with this matrix on node samples of model-space functions within
/// quadrature tolerance.
pub fn adjoint_j_matrix(
    basis: &KphiBasis,
    space: &TruncatedHardy,
    mu: &ClarkMeasureQuad,
) -> DMatrix<C64> {
    embedding_j(basis, space, mu).adjoint()
}

/// Applies the embedding adjoint to raw node samples `h` through the
/// weighted Cauchy transform: the function
/// `(1 - conj(alpha) phi(w)) sum h(zeta) k_zeta(w) mass(zeta)` is evaluated
/// at interior collocation points and fitted over the basis span by least
/// squares. Returns basis coordinates.
pub fn adjoint_j_apply(
    phi: &Rif,
    alpha: C64,
    basis: &KphiBasis,
    space: &TruncatedHardy,
    mu: &ClarkMeasureQuad,
    h: &[C64],
) -> Result<DVector<C64>> {
    let nodes = active_nodes(mu);
    if h.len() != nodes.len() {
        return Err(ClarkError::Config(format!(
            "sample count {} does not match active node count {}",
            h.len(),
            nodes.len()
        )));
    }
    let rank = basis.rank();
    let pts = collocation_points(rank, space.degree);
    let cols: Vec<DVector<C64>> = (0..rank).map(|j| basis.basis.column(j).clone_owned()).collect();
    let mut vmat = DMatrix::<C64>::zeros(pts.len(), rank);
    for (i, &(w1, w2)) in pts.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            vmat[(i, j)] = space.eval_coeffs(col, w1, w2);
        }
    }
    let svd = vmat.clone().svd(true, true);
    let smax = svd.singular_values[0];
    let smin = svd.singular_values[svd.singular_values.len() - 1];
    if smin < 1e-12 * smax {
        return Err(ClarkError::Collocation { ratio: smin / smax });
    }

    let mut rhs = DVector::<C64>::zeros(pts.len());
    for (i, &(w1, w2)) in pts.iter().enumerate() {
        let prefactor = 1.0 - alpha.conj() * phi.eval_interior(w1, w2)?;
        let mut transform = C64::new(0.0, 0.0);
        for (&(z1, z2, mass), &sample) in nodes.iter().zip(h) {
            let szego = 1.0 / ((1.0 - w1 * z1.conj()) * (1.0 - w2 * z2.conj()));
            transform += sample * szego * mass;
        }
        rhs[i] = prefactor * transform;
    }
    svd.solve(&rhs, 1e-14 * smax)
        .map_err(|_| ClarkError::Collocation { ratio: smin / smax })
        .map(|m| m.column(0).clone_owned())
}

/// Residuals of the two intertwining identities: `|| J U - M J ||` (the
/// unitary is conjugate to coordinate multiplication) and
/// `|| J* conj(M) - V J* ||` for the backward-shift form
/// `V f = B f + psi f(0, .)`.
pub struct IntertwiningResiduals {
    pub u_form: f64,
    pub v_form: f64,
}

/// Measures both intertwining residuals. The `interior` columns select the
/// basis directions unaffected by box truncation: the U-form residual
/// restricts the operator domain to them, the V-form residual restricts the
/// basis output rows.
#[allow(clippy::too_many_arguments)]
pub fn intertwining_residual(
    phi: &Rif,
    alpha: C64,
    axis: Axis,
    basis: &KphiBasis,
    space: &TruncatedHardy,
    mu: &ClarkMeasureQuad,
    u: &TruncatedOperator,
    interior: &[usize],
) -> Result<IntertwiningResiduals> {
    let j = embedding_j(basis, space, mu);
    let m = node_multipliers(mu, axis);

    let ju = &j * &u.matrix;
    let mut mj = j.clone();
    for (i, &mult) in m.iter().enumerate() {
        for c in 0..mj.ncols() {
            mj[(i, c)] *= mult;
        }
    }
    let diff = ju - mj;
    let u_form = spectral_norm(&select_columns(&diff, interior));

    // V in basis coordinates
    let psi = psi_alpha(phi, alpha, axis, space)?;
    let rank = basis.rank();
    let mut v_mat = DMatrix::<C64>::zeros(rank, rank);
    for jcol in 0..rank {
        let col: DVector<C64> = basis.basis.column(jcol).clone_owned();
        let mut acc = backward_shift(&col, space, axis);
        acc += psi_times_base_slice(&psi, space, &col);
        let coords = basis.coords(&acc);
        v_mat.set_column(jcol, &coords);
    }
    let jh = j.adjoint();
    let mut jh_mbar = jh.clone();
    for (c, &mult) in m.iter().enumerate() {
        for r in 0..jh_mbar.nrows() {
            jh_mbar[(r, c)] *= mult.conj();
        }
    }
    let vdiff = jh_mbar - v_mat * jh;
    let v_form = spectral_norm(&select_rows(&vdiff, interior));

    Ok(IntertwiningResiduals { u_form, v_form })
}

fn select_columns(m: &DMatrix<C64>, cols: &[usize]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(m.nrows(), cols.len());
    for (j, &c) in cols.iter().enumerate() {
        out.set_column(j, &m.column(c));
    }
    out
}

fn select_rows(m: &DMatrix<C64>, rows: &[usize]) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(rows.len(), m.ncols());
    for (i, &r) in rows.iter().enumerate() {
        out.set_row(i, &m.row(r));
    }
    out
}

/// `psi * f(0, z2)` (axis `Z1`) or `psi * f(z1, 0)` (axis `Z2`) as box
/// coefficients.
fn psi_times_base_slice(
    psi: &PsiAlpha,
    space: &TruncatedHardy,
    coeffs: &DVector<C64>,
) -> DVector<C64> {
    let g = space.grid;
    let d = space.degree;
    let mut values = vec![C64::new(0.0, 0.0); g * g];
    match psi.axis {
        Axis::Z1 => {
            // f(0, z2): row k = 0
            for b in 0..g {
                let z2 = unit(std::f64::consts::TAU * b as f64 / g as f64);
                let mut acc = C64::new(0.0, 0.0);
                for l in (0..=d).rev() {
                    acc = acc * z2 + coeffs[space.index(0, l)];
                }
                for a in 0..g {
                    values[a * g + b] = acc * psi.samples[a * g + b];
                }
            }
        }
        Axis::Z2 => {
            for a in 0..g {
                let z1 = unit(std::f64::consts::TAU * a as f64 / g as f64);
                let mut acc = C64::new(0.0, 0.0);
                for k in (0..=d).rev() {
                    acc = acc * z1 + coeffs[space.index(k, 0)];
                }
                for b in 0..g {
                    values[a * g + b] = acc * psi.samples[a * g + b];
                }
            }
        }
    }
    space.box_coeffs(&values)
}

/// Largest norm of `(I - P_phi) P_{H^2} M_{conj(psi)}` over the basis
/// vectors: strictly positive output certifies that the model-space
/// projection in the unitary formula is not redundant. Returns 0 for the
/// cross case `phi = z1 psi`, where the projection is provably unnecessary.
pub fn p_phi_necessity(
    phi: &Rif,
    alpha: C64,
    basis: &KphiBasis,
    space: &TruncatedHardy,
) -> Result<f64> {
    let (n1, n2) = phi.bidegree();
    let (m1, m2) = phi.monomial();
    if n1 + m1 == 0 || n2 + m2 == 0 {
        return Err(ClarkError::Hypothesis(
            "the function must depend on both variables".into(),
        ));
    }
    let q0 = phi.numerator().slice(1, C64::new(0.0, 0.0));
    if q0.is_zero() {
        // cross case phi = z1 psi: H^2_2 already sits inside K_phi
        return Ok(0.0);
    }
    let psi = psi_alpha(phi, alpha, Axis::Z1, space)?;
    let mut worst = 0.0f64;
    for j in 0..basis.rank() {
        let col: DVector<C64> = basis.basis.column(j).clone_owned();
        let v = correction_coeffs(&psi, space, &col);
        let outside = &v - &basis.projector * &v;
        worst = worst.max(outside.norm());
    }
    Ok(worst)
}

/// `|| U1 U2 - U2 U1 ||` restricted to the given interior columns.
pub fn commutation_residual(
    u1: &TruncatedOperator,
    u2: &TruncatedOperator,
    interior: &[usize],
) -> Result<f64> {
    if u1.basis_ref != u2.basis_ref {
        return Err(ClarkError::BasisMismatch {
            left: u1.basis_ref.clone(),
            right: u2.basis_ref.clone(),
        });
    }
    let c = &u1.matrix * &u2.matrix - &u2.matrix * &u1.matrix;
    Ok(spectral_norm(&restrict(&c, interior)))
}

/// `(|| U* U - I ||, || U U* - I ||)` restricted to the interior columns.
pub fn unitarity_residual(u: &TruncatedOperator, interior: &[usize]) -> (f64, f64) {
    let n = u.dim();
    let eye = DMatrix::<C64>::identity(n, n);
    let a = u.matrix.adjoint() * &u.matrix - &eye;
    let b = &u.matrix * u.matrix.adjoint() - &eye;
    (
        spectral_norm(&restrict(&a, interior)),
        spectral_norm(&restrict(&b, interior)),
    )
}

fn restrict(m: &DMatrix<C64>, indices: &[usize]) -> DMatrix<C64> {
    let n = indices.len();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for (i, &r) in indices.iter().enumerate() {
        for (j, &c) in indices.iter().enumerate() {
            out[(i, j)] = m[(r, c)];
        }
    }
    out
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values[0]
}

/// Taylor coefficients of the function on the box `0..=d` in each variable
/// (two-variable series division; the denominator is stable so `p(0) != 0`).
pub fn taylor_box(phi: &Rif, d: usize) -> DMatrix<C64> {
    let p = phi.denominator();
    let q = phi.numerator();
    let p00 = p.coeff(0, 0);
    let mut inv = DMatrix::<C64>::zeros(d + 1, d + 1);
    inv[(0, 0)] = C64::new(1.0, 0.0) / p00;
    for k in 0..=d {
        for l in 0..=d {
            if k == 0 && l == 0 {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..=k {
                for j in 0..=l {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    acc += p.coeff(i, j) * inv[(k - i, l - j)];
                }
            }
            inv[(k, l)] = -acc / p00;
        }
    }
    let mut out = DMatrix::<C64>::zeros(d + 1, d + 1);
    for k in 0..=d {
        for l in 0..=d {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..=k {
                for j in 0..=l {
                    acc += q.coeff(i, j) * inv[(k - i, l - j)];
                }
            }
            out[(k, l)] = acc;
        }
    }
    out
}

/// Operator export format:
/// `{"basis":"kphi|nodes","dim":n,"matrix":[[re,im],...],"residuals":{...}}`
/// with the matrix row-major.
#[derive(Serialize, Deserialize)]
pub struct OperatorJson {
    pub basis: String,
    pub dim: usize,
    pub matrix: Vec<[f64; 2]>,
    pub residuals: BTreeMap<String, f64>,
}

impl From<&TruncatedOperator> for OperatorJson {
    fn from(op: &TruncatedOperator) -> Self {
        let n = op.dim();
        let mut matrix = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = op.matrix[(i, j)];
                matrix.push([v.re, v.im]);
            }
        }
        OperatorJson {
            basis: if op.basis_ref.starts_with("kphi") {
                "kphi".into()
            } else {
                "nodes".into()
            },
            dim: n,
            matrix,
            residuals: op.residuals.clone(),
        }
    }
}
