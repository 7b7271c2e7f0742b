//! Taylor-joint-spectrum membership for commuting pairs of matrices via the
//! rank conditions of the associated chain complex, a joint-eigenvalue
//! oracle, and torus grid scans.
//!
//! For a commuting pair `(A, B)` and a point `(l1, l2)`, the complex
//!
//! ```text
//! 0 -> H --d1--> H (+) H --d2--> H -> 0
//! d1 h        = ((A - l1) h, (B - l2) h)
//! d2 (h1, h2) = (A - l1) h2 - (B - l2) h1
//! ```
//!
//! is exact at every stage iff `rank d1 = rank d2 = n`: the range of `d1`
//! always sits inside the kernel of `d2`, and the dimension count
//! `dim ker d2 = 2n - rank d2` turns both inclusions into equalities exactly
//! when both ranks are full.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ClarkError;
use crate::{unit, wrap_angle, Result, C64};

/// Default relative rank tolerance: singular values below `tol * sigma_max`
/// count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Relative commutation bound required of input pairs.
pub const COMMUTATION_LIMIT: f64 = 1e-8;

/// Rank report of the chain complex at one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoszulReport {
    pub lambda: [f64; 4],
    pub n: usize,
    pub rank_delta1: usize,
    pub rank_delta2: usize,
    pub tolerance: f64,
    pub singular: bool,
}

/// Membership mask of a torus grid scan.
#[derive(Clone, Debug)]
pub struct SpectrumScan {
    pub grid_n: usize,
    /// angles of the grid lines, in `(-pi, pi]`
    pub angles: Vec<f64>,
    /// row-major `grid_n x grid_n` membership mask (`mask[i * grid_n + j]`
    /// for the point `(angles[i], angles[j])`)
    pub mask: Vec<bool>,
    pub tolerance: f64,
    /// FNV-1a hash of the input matrices for provenance
    pub matrices_hash: u64,
}

fn check_commuting(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<()> {
    let scale = a.norm() * b.norm();
    let comm = (a * b - b * a).norm();
    if comm > COMMUTATION_LIMIT * scale.max(1e-300) {
        return Err(ClarkError::Commutation {
            relative: comm / scale.max(1e-300),
            limit: COMMUTATION_LIMIT,
        });
    }
    Ok(())
}

/// Ranks of the two boundary maps at `lambda`, by singular value counting
/// against `tol * sigma_max`.
pub fn koszul_ranks(
    a: &DMatrix<C64>,
    b: &DMatrix<C64>,
    lambda: (C64, C64),
    tol: f64,
) -> Result<KoszulReport> {
    check_commuting(a, b)?;
    let n = a.nrows();
    let a_shift = a - DMatrix::<C64>::identity(n, n) * lambda.0;
    let b_shift = b - DMatrix::<C64>::identity(n, n) * lambda.1;

    // d1: H -> H (+) H, stacked 2n x n
    let mut d1 = DMatrix::<C64>::zeros(2 * n, n);
    d1.view_mut((0, 0), (n, n)).copy_from(&a_shift);
    d1.view_mut((n, 0), (n, n)).copy_from(&b_shift);
    // d2: H (+) H -> H, n x 2n: (h1, h2) -> (A - l1) h2 - (B - l2) h1
    let mut d2 = DMatrix::<C64>::zeros(n, 2 * n);
    d2.view_mut((0, 0), (n, n)).copy_from(&(-&b_shift));
    d2.view_mut((0, n), (n, n)).copy_from(&a_shift);

    let rank = |m: &DMatrix<C64>| -> usize {
        let sv = m.clone().svd(false, false).singular_values;
        let smax = sv[0].max(f64::MIN_POSITIVE);
        sv.iter().filter(|&&s| s > tol * smax).count()
    };
    let rank_delta1 = rank(&d1);
    let rank_delta2 = rank(&d2);
    Ok(KoszulReport {
        lambda: [lambda.0.re, lambda.0.im, lambda.1.re, lambda.1.im],
        n,
        rank_delta1,
        rank_delta2,
        tolerance: tol,
        singular: !(rank_delta1 == n && rank_delta2 == n),
    })
}

/// Joint eigenvalues of a commuting pair through a common Schur basis: for a
/// deterministic sequence of mixing weights `mu`, the Schur vectors of
/// `A + mu B` are tested for triangularizing both inputs; the first weight
/// whose strict lower residual is small wins, and the diagonal pairs are
/// deduplicated.
pub fn joint_eigenvalues(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<Vec<(C64, C64)>> {
    check_commuting(a, b)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = (a.norm() + b.norm()).max(1e-300);
    let tolerance = 1e-8 * scale;
    // fixed mixing weights with irrational angles; collisions between
    // distinct joint eigenvalues need a measure-zero coincidence per weight
    let weights = [
        C64::new(1.0, 0.0),
        C64::new(0.7548776662466927, 0.3388131789017201),
        C64::new(-0.3612491820397998, 0.914768437420245),
        C64::new(0.1411200080598672, -0.6536436208636119),
    ];
    let mut best_residual = f64::INFINITY;
    for &mu in &weights {
        let mixed = a + b * mu;
        let (q, _) = mixed.schur().unpack();
        let ta = q.adjoint() * a * &q;
        let tb = q.adjoint() * b * &q;
        let mut lower = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                lower += ta[(i, j)].norm_sqr() + tb[(i, j)].norm_sqr();
            }
        }
        let lower = lower.sqrt();
        best_residual = best_residual.min(lower);
        if lower <= tolerance {
            let mut pairs: Vec<(C64, C64)> = (0..n).map(|i| (ta[(i, i)], tb[(i, i)])).collect();
            // deduplicate within tolerance, keeping first occurrences
            let mut unique: Vec<(C64, C64)> = Vec::new();
            let dedup_tol = 1e-7 * scale.max(1.0);
            pairs.sort_by(|x, y| {
                (x.0.re, x.0.im, x.1.re, x.1.im)
                    .partial_cmp(&(y.0.re, y.0.im, y.1.re, y.1.im))
                    .unwrap()
            });
            for p in pairs {
                if !unique
                    .iter()
                    .any(|u| (u.0 - p.0).norm() + (u.1 - p.1).norm() < dedup_tol)
                {
                    unique.push(p);
                }
            }
            return Ok(unique);
        }
    }
    Err(ClarkError::Refinement {
        residual: best_residual,
        tolerance,
    })
}

/// Scan over a `grid_n x grid_n` torus grid: a cell is in the mask when the
/// smallest singular value of either boundary map at the cell center falls
/// below the absolute threshold `tau`. For commuting normal pairs that
/// smallest singular value is exactly the distance from the cell center to
/// the joint spectrum, so `tau` is the spatial resolution of the mask; see
/// [`cell_radius`] and [`scan_threshold`] for the standard choice. The test
/// runs as a shifted Cholesky factorization of the boundary-map Gram
/// matrices; exactly diagonal pairs take an O(n) closed-form path.
pub fn taylor_spectrum_on_torus(
    a: &DMatrix<C64>,
    b: &DMatrix<C64>,
    grid_n: usize,
    tau: f64,
) -> Result<SpectrumScan> {
    let n = a.nrows();
    let off_diag = |m: &DMatrix<C64>| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += m[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };
    // diagonal pairs commute trivially and their unitarity is a modulus
    // check; deciding this first keeps the preconditions O(n^2) for the
    // (possibly large) node-multiplication case
    let diagonal_fast_path = off_diag(a) < 1e-12 && off_diag(b) < 1e-12;
    if diagonal_fast_path {
        for i in 0..n {
            if (a[(i, i)].norm() - 1.0).abs() > 1e-6 || (b[(i, i)].norm() - 1.0).abs() > 1e-6 {
                return Err(ClarkError::Config(format!(
                    "diagonal entry {i} is not unimodular within 1e-6"
                )));
            }
        }
    } else {
        check_commuting(a, b)?;
        for (name, m) in [("first", a), ("second", b)] {
            let dev = (m.adjoint() * m - DMatrix::<C64>::identity(n, n)).norm();
            if dev > 1e-6 * (n as f64).sqrt().max(1.0) {
                return Err(ClarkError::Config(format!(
                    "{name} matrix is not unitary within 1e-6 (deviation {dev:.3e})"
                )));
            }
        }
    }
    let angles: Vec<f64> = (0..grid_n)
        .map(|i| wrap_angle(std::f64::consts::TAU * i as f64 / grid_n as f64))
        .collect();

    let mask: Vec<bool> = if diagonal_fast_path {
        let da: Vec<C64> = (0..n).map(|i| a[(i, i)]).collect();
        let db: Vec<C64> = (0..n).map(|i| b[(i, i)]).collect();
        (0..grid_n * grid_n)
            .into_par_iter()
            .map(|cell| {
                let l1 = unit(angles[cell / grid_n]);
                let l2 = unit(angles[cell % grid_n]);
                let smin = da
                    .iter()
                    .zip(&db)
                    .map(|(&x, &y)| ((x - l1).norm_sqr() + (y - l2).norm_sqr()).sqrt())
                    .fold(f64::INFINITY, f64::min);
                smin <= tau
            })
            .collect()
    } else {
        // lambda-independent pieces of the two Gram matrices:
        // d1* d1 = A*A + B*B - l1 A* - conj(l1) A - l2 B* - conj(l2) B + 2 I
        // d2 d2* = A A* + B B* - (same shift terms)            + 2 I
        let a_adj = a.adjoint();
        let b_adj = b.adjoint();
        let gram1_const = &a_adj * a + &b_adj * b;
        let gram2_const = a * &a_adj + b * &b_adj;
        let eye = DMatrix::<C64>::identity(n, n);
        (0..grid_n * grid_n)
            .into_par_iter()
            .map(|cell| {
                let l1 = unit(angles[cell / grid_n]);
                let l2 = unit(angles[cell % grid_n]);
                let shifts = &a_adj * (-l1) + a * (-l1.conj()) + &b_adj * (-l2) + b * (-l2.conj());
                let diag = C64::new(2.0 - tau * tau, 0.0);
                let g1 = &gram1_const + &shifts + &eye * diag;
                if !is_positive_definite(g1) {
                    return true;
                }
                let g2 = &gram2_const + &shifts + &eye * diag;
                !is_positive_definite(g2)
            })
            .collect()
    };

    Ok(SpectrumScan {
        grid_n,
        angles,
        mask,
        tolerance: tau,
        matrices_hash: fnv1a_matrices(a, b),
    })
}

/// Hermitian positive-definiteness by the elimination pivot test, reading
/// only the lower triangle. (The generic complex Cholesky in the linear
/// algebra backend takes complex square roots and never rejects an
/// indefinite Hermitian matrix, so the test is done by hand.)
fn is_positive_definite(mut m: DMatrix<C64>) -> bool {
    let n = m.nrows();
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d -= m[(j, k)].norm_sqr();
        }
        // a NaN pivot counts as indefinite
        if d.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return false;
        }
        let pivot = d.sqrt();
        m[(j, j)] = C64::new(pivot, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= m[(i, k)] * m[(j, k)].conj();
            }
            m[(i, j)] = v / pivot;
        }
    }
    true
}

/// Half-diagonal of one scan cell: every point of the torus lies within this
/// distance of some cell center.
pub fn cell_radius(grid_n: usize) -> f64 {
    std::f64::consts::PI * std::f64::consts::SQRT_2 / grid_n as f64
}

/// Standard scan threshold: the cell half-diagonal widened by ten times the
/// measured commutation residual of the pair (inexactly commuting inputs
/// displace the joint spectrum by about that much).
pub fn scan_threshold(a: &DMatrix<C64>, b: &DMatrix<C64>, grid_n: usize) -> f64 {
    let comm = (a * b - b * a).norm();
    cell_radius(grid_n) + 10.0 * comm
}

impl SpectrumScan {
    /// Angle pairs of the masked cells.
    pub fn masked_points(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for i in 0..self.grid_n {
            for j in 0..self.grid_n {
                if self.mask[i * self.grid_n + j] {
                    out.push((self.angles[i], self.angles[j]));
                }
            }
        }
        out
    }

    /// Symmetric Hausdorff distance (torus geodesic) between the masked set
    /// and a reference point set.
    pub fn hausdorff_to(&self, reference: &[(f64, f64)]) -> f64 {
        let mine = self.masked_points();
        if mine.is_empty() || reference.is_empty() {
            return f64::INFINITY;
        }
        let one_way = |from: &[(f64, f64)], to: &[(f64, f64)]| -> f64 {
            from.par_iter()
                .map(|&p| {
                    to.iter()
                        .map(|&q| crate::torus_distance(p, q))
                        .fold(f64::INFINITY, f64::min)
                })
                .reduce(|| 0.0, f64::max)
        };
        one_way(&mine, reference).max(one_way(reference, &mine))
    }
}

fn fnv1a_matrices(a: &DMatrix<C64>, b: &DMatrix<C64>) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    let mut eat = |x: f64| {
        for byte in x.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    };
    for m in [a, b] {
        for v in m.iter() {
            eat(v.re);
            eat(v.im);
        }
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(values: &[C64]) -> DMatrix<C64> {
        DMatrix::<C64>::from_diagonal(&nalgebra::DVector::from_row_slice(values))
    }

    #[test]
    fn rank_examples() {
        // joint eigenvalue of 1x1 scalars
        let a = diag(&[c(2.0, 0.0)]);
        let b = diag(&[c(3.0, 0.0)]);
        let report = koszul_ranks(&a, &b, (c(2.0, 0.0), c(3.0, 0.0)), 1e-8).unwrap();
        assert_eq!(report.rank_delta1, 0);
        assert!(report.singular);

        let a = diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let b = diag(&[c(1.0, 0.0), c(0.0, -1.0)]);
        // (1, -i) pairs the wrong coordinates: nonsingular
        let report = koszul_ranks(&a, &b, (c(1.0, 0.0), c(0.0, -1.0)), 1e-8).unwrap();
        assert_eq!((report.rank_delta1, report.rank_delta2), (2, 2));
        assert!(!report.singular);
        // (i, -i) is the joint eigenvalue of the second coordinate
        let report = koszul_ranks(&a, &b, (c(0.0, 1.0), c(0.0, -1.0)), 1e-8).unwrap();
        assert!(report.singular);
    }

    #[test]
    fn commutation_precondition_is_enforced() {
        let a = DMatrix::<C64>::from_row_slice(2, 2, &[
            c(0.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0),
        ]);
        let b = DMatrix::<C64>::from_row_slice(2, 2, &[
            c(0.0, 0.0), c(0.0, 0.0),
            c(1.0, 0.0), c(0.0, 0.0),
        ]);
        assert!(matches!(
            koszul_ranks(&a, &b, (c(0.0, 0.0), c(0.0, 0.0)), 1e-8),
            Err(ClarkError::Commutation { .. })
        ));
    }

    #[test]
    fn joint_eigenvalue_examples() {
        let a = diag(&[c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)]);
        let b = diag(&[c(3.0, 0.0), c(0.5, 0.5), c(0.0, -1.0)]);
        let pairs = joint_eigenvalues(&a, &b).unwrap();
        assert_eq!(pairs.len(), 3);
        for (x, y) in [(1.0, 3.0), (-2.0, 0.0)] {
            assert!(pairs
                .iter()
                .any(|p| (p.0 - c(x, 0.0)).norm() < 1e-10 && (p.1.re - y).abs() < 1e-10));
        }

        // a joint Jordan block has the single joint eigenvalue (0, 0)
        let j = DMatrix::<C64>::from_row_slice(2, 2, &[
            c(0.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0),
        ]);
        let pairs = joint_eigenvalues(&j, &j).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].0.norm() < 1e-10 && pairs[0].1.norm() < 1e-10);
    }

    #[test]
    fn rank_verdicts_match_joint_eigenvalues_for_random_normal_pairs() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        for trial in 0..25 {
            let n = rng.random_range(2..=6);
            // random commuting normal pair: unitary conjugation of diagonals
            let gauss = DMatrix::<C64>::from_fn(n, n, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let q = gauss.qr().q();
            let d1: Vec<C64> = (0..n)
                .map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            let d2: Vec<C64> = (0..n)
                .map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            let a = &q * diag(&d1) * q.adjoint();
            let b = &q * diag(&d2) * q.adjoint();
            let joint = joint_eigenvalues(&a, &b).unwrap();
            // every joint eigenvalue is singular, a shifted point is not
            for &(l1, l2) in &joint {
                let r = koszul_ranks(&a, &b, (l1, l2), 1e-8).unwrap();
                assert!(r.singular, "trial {trial}");
                let r = koszul_ranks(&a, &b, (l1 + 0.1, l2), 1e-8).unwrap();
                assert!(!r.singular, "trial {trial}");
            }
        }
    }

    #[test]
    fn scan_of_a_tiny_diagonal_pair_marks_one_cell() {
        let l1 = unit(std::f64::consts::TAU * 3.0 / 16.0);
        let l2 = unit(-std::f64::consts::TAU * 5.0 / 16.0);
        let a = diag(&[l1]);
        let b = diag(&[l2]);
        let scan = taylor_spectrum_on_torus(&a, &b, 16, 1e-6).unwrap();
        let points = scan.masked_points();
        assert_eq!(points.len(), 1);
        assert!((points[0].0 - wrap_angle(l1.arg())).abs() < 1e-12);
        assert!((points[0].1 - wrap_angle(l2.arg())).abs() < 1e-12);
    }

    #[test]
    fn fast_and_general_paths_agree() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        let n = 5;
        let d1: Vec<C64> = (0..n)
            .map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
            .collect();
        let d2: Vec<C64> = (0..n)
            .map(|_| C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
            .collect();
        let a_diag = diag(&d1);
        let b_diag = diag(&d2);
        // conjugating by a unitary must not change the masked set
        let gauss = DMatrix::<C64>::from_fn(n, n, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let q = gauss.qr().q();
        let a = &q * &a_diag * q.adjoint();
        let b = &q * &b_diag * q.adjoint();
        let tau = 0.1;
        let scan_fast = taylor_spectrum_on_torus(&a_diag, &b_diag, 32, tau).unwrap();
        let scan_general = taylor_spectrum_on_torus(&a, &b, 32, tau).unwrap();
        assert_eq!(scan_fast.mask, scan_general.mask);
    }

    #[test]
    fn masked_set_is_nonempty_and_contained_in_the_product_of_spectra() {
        let a = diag(&[unit(0.3), unit(1.2)]);
        let b = diag(&[unit(-0.4), unit(2.2)]);
        let tau = cell_radius(64);
        let scan = taylor_spectrum_on_torus(&a, &b, 64, tau).unwrap();
        let points = scan.masked_points();
        assert!(!points.is_empty());
        let step = std::f64::consts::TAU / 64.0;
        for &(t1, t2) in &points {
            let near1 = [0.3f64, 1.2]
                .iter()
                .any(|&s| (wrap_angle(t1 - s)).abs() < 1.5 * step);
            let near2 = [-0.4f64, 2.2]
                .iter()
                .any(|&s| (wrap_angle(t2 - s)).abs() < 1.5 * step);
            assert!(near1 && near2, "({t1}, {t2}) outside the spectral product");
        }
    }
}
