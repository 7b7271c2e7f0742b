//! One-variable baseline: finite Blaschke products, their finite-dimensional
//! model spaces, Clark measures as weighted point masses, and the rank-one
//! Clark unitaries. The two-variable machinery must degenerate to this
//! picture, so everything here doubles as an oracle.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bipoly::UniPoly;
use crate::error::ClarkError;
use crate::{Result, C64};

/// Truncation degree for monomial coordinates; kernel coefficients decay at
/// least geometrically with ratio `max(|w|, |lambda_j|) < 1`, so this is far
/// past double precision for the fixed sample radius used below.
const COEFF_TRUNCATION: usize = 384;

/// Gram condition number above which the kernel sample points are rejected.
const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Finite Blaschke product `e^{ia} z^m prod_j b_{lambda_j}(z)` with
/// `b_lambda(z) = (|lambda|/lambda)(lambda - z)/(1 - conj(lambda) z)`.
/// Zeros at the origin are carried by the monomial power `m`.
#[derive(Clone, Debug)]
pub struct BlaschkeProduct {
    zeros: Vec<C64>,
    monomial_power: usize,
    phase: f64,
}

/// Clark measure of a finite Blaschke product: `deg phi` unimodular atoms
/// with weights `1/|phi'|`.
#[derive(Clone, Debug)]
pub struct Clark1D {
    pub alpha: C64,
    pub atoms: Vec<(C64, f64)>,
}

/// Orthonormal basis of the model space in truncated monomial coordinates.
#[derive(Clone, Debug)]
pub struct ModelBasis1D {
    /// `(COEFF_TRUNCATION + 1) x deg` matrix with orthonormal columns
    pub coeffs: DMatrix<C64>,
    /// kernel sample points the basis was orthonormalized from
    pub points: Vec<C64>,
    /// condition number of the exact kernel Gram matrix
    pub gram_condition: f64,
}

impl BlaschkeProduct {
    /// All zeros must satisfy `0 < |lambda| < 1`; zeros at the origin go into
    /// `monomial_power`.
    pub fn new(zeros: Vec<C64>, monomial_power: usize, phase: f64) -> Result<Self> {
        for &z in &zeros {
            if z.norm() >= 1.0 {
                return Err(ClarkError::Config(format!(
                    "Blaschke zero {z} must lie strictly inside the disk"
                )));
            }
            if z.norm() == 0.0 {
                return Err(ClarkError::Config(
                    "zeros at the origin are carried by the monomial power".into(),
                ));
            }
        }
        Ok(BlaschkeProduct {
            zeros,
            monomial_power,
            phase,
        })
    }

    pub fn degree(&self) -> usize {
        self.monomial_power + self.zeros.len()
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn monomial_power(&self) -> usize {
        self.monomial_power
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// Numerator polynomial `e^{ia} z^m prod (|l|/l)(l - z)`.
    pub fn numerator(&self) -> UniPoly {
        let mut q = UniPoly::new(vec![C64::from_polar(1.0, self.phase)]);
        for &l in &self.zeros {
            let unimod = C64::new(l.norm(), 0.0) / l;
            q = q.mul(&UniPoly::new(vec![unimod * l, -unimod]));
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); self.monomial_power];
        coeffs.extend_from_slice(q.coeffs());
        UniPoly::new(coeffs)
    }

    /// Denominator polynomial `prod (1 - conj(l) z)`.
    pub fn denominator(&self) -> UniPoly {
        let mut p = UniPoly::new(vec![C64::new(1.0, 0.0)]);
        for &l in &self.zeros {
            p = p.mul(&UniPoly::new(vec![C64::new(1.0, 0.0), -l.conj()]));
        }
        p
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.numerator().eval(z) / self.denominator().eval(z)
    }

    /// `phi'` by the quotient rule.
    pub fn derivative(&self, z: C64) -> C64 {
        let q = self.numerator();
        let p = self.denominator();
        (q.derivative().eval(z) * p.eval(z) - q.eval(z) * p.derivative().eval(z))
            / (p.eval(z) * p.eval(z))
    }

    /// Clark measure: atoms at the roots of `q - alpha p` with weights
    /// `1/|phi'|`. A nonconstant product yields exactly `deg phi` unimodular
    /// atoms.
    pub fn clark_measure(&self, alpha: C64) -> Result<Clark1D> {
        if self.degree() == 0 {
            return Err(ClarkError::Config(
                "Clark measure needs a nonconstant Blaschke product".into(),
            ));
        }
        let pencil = self
            .numerator()
            .add(&self.denominator().scaled(-alpha));
        let roots = pencil.roots()?;
        let mut atoms = Vec::with_capacity(roots.len());
        for r in roots {
            let zeta = r / r.norm(); // snap to the circle
            let w = 1.0 / self.derivative(zeta).norm();
            atoms.push((zeta, w));
        }
        Ok(Clark1D { alpha, atoms })
    }

    /// Orthonormal basis of the model space, built from reproducing kernels
    /// at the `n` solutions of `w^n = 1/2` and orthonormalized through their
    /// exact Gram matrix.
    pub fn model_basis(&self) -> Result<ModelBasis1D> {
        let n = self.degree();
        if n == 0 {
            return Err(ClarkError::Config(
                "model space of a constant inner function is trivial".into(),
            ));
        }
        let radius = 0.5f64.powf(1.0 / n as f64);
        let points: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(radius, std::f64::consts::TAU * j as f64 / n as f64))
            .collect();

        let m = COEFF_TRUNCATION;
        let phi_series = self.taylor_series(m);
        // kernel coefficients: k^phi_w = (1 - conj(phi(w)) phi) * geom(conj(w))
        let mut kernels = DMatrix::<C64>::zeros(m + 1, n);
        for (j, &w) in points.iter().enumerate() {
            let phi_w = self.eval(w);
            // (1 - conj(phi(w)) phi) as a series
            let mut top = vec![C64::new(0.0, 0.0); m + 1];
            for (k, &c) in phi_series.iter().enumerate() {
                top[k] = -phi_w.conj() * c;
            }
            top[0] += 1.0;
            // multiply by sum_k conj(w)^k z^k
            let wb = w.conj();
            let mut pow = C64::new(1.0, 0.0);
            let mut geom = Vec::with_capacity(m + 1);
            for _ in 0..=m {
                geom.push(pow);
                pow *= wb;
            }
            for k in 0..=m {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..=k {
                    acc += top[i] * geom[k - i];
                }
                kernels[(k, j)] = acc;
            }
        }

        // exact Gram from the reproducing property
        let mut gram = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let w = points[j];
                let v = points[i];
                let kernel = (1.0 - self.eval(w).conj() * self.eval(v))
                    / (1.0 - w.conj() * v);
                gram[(i, j)] = kernel;
            }
        }
        let eig = gram.clone().symmetric_eigen();
        let max_ev = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let min_ev = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        let cond = max_ev / min_ev.max(f64::MIN_POSITIVE);
        if min_ev.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
            || cond > GRAM_CONDITION_LIMIT
        {
            return Err(ClarkError::PointSelection {
                cond,
                limit: GRAM_CONDITION_LIMIT,
            });
        }
        // G^{-1/2} = U diag(1/sqrt(lambda)) U^H
        let mut scaled = eig.eigenvectors.clone();
        for (c, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::new(1.0 / eig.eigenvalues[c].sqrt(), 0.0);
        }
        let inv_sqrt = &scaled * eig.eigenvectors.adjoint();
        let basis = kernels * inv_sqrt;

        Ok(ModelBasis1D {
            coeffs: basis,
            points,
            gram_condition: cond,
        })
    }

    /// Taylor coefficients of `phi` up to degree `m` (series division; the
    /// denominator has no zeros in the closed disk).
    pub fn taylor_series(&self, m: usize) -> Vec<C64> {
        let q = self.numerator();
        let p = self.denominator();
        let p0 = p.coeffs()[0];
        let mut inv = vec![C64::new(0.0, 0.0); m + 1];
        inv[0] = C64::new(1.0, 0.0) / p0;
        for k in 1..=m {
            let mut acc = C64::new(0.0, 0.0);
            for i in 1..=k.min(p.degree()) {
                acc += p.coeffs()[i] * inv[k - i];
            }
            inv[k] = -acc / p0;
        }
        let mut out = vec![C64::new(0.0, 0.0); m + 1];
        for k in 0..=m {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..=k.min(q.degree()) {
                acc += q.coeffs()[i] * inv[k - i];
            }
            out[k] = acc;
        }
        out
    }

    /// Rank-one Clark unitary on the model basis for `phi(0) = 0`:
    /// `U f = S f + alpha <f, T* phi> 1`. The general case is out of scope
    /// here and reported as an error.
    pub fn clark_unitary(&self, alpha: C64, basis: &ModelBasis1D) -> Result<DMatrix<C64>> {
        let phi0 = self.eval(C64::new(0.0, 0.0));
        if phi0.norm() > 1e-12 {
            return Err(ClarkError::Phi0 { phi0 });
        }
        let m = COEFF_TRUNCATION;
        let n = basis.coeffs.ncols();
        let b = &basis.coeffs;

        // compressed shift: coefficients move up one degree, then project
        let mut shifted = DMatrix::<C64>::zeros(m + 1, n);
        for j in 0..n {
            for k in 0..m {
                shifted[(k + 1, j)] = b[(k, j)];
            }
        }
        // B^H B = I, so the compressed shift in basis coordinates is B^H Z B
        let s = b.adjoint() * &shifted;
        // backward shift of phi
        let phi_series = self.taylor_series(m + 1);
        let t = DVector::<C64>::from_iterator(m + 1, (1..=m + 1).map(|k| phi_series[k]));
        let u_vec = b.adjoint() * &t;
        // constant function 1 (in the model space since phi(0) = 0)
        let mut one = DVector::<C64>::zeros(m + 1);
        one[0] = C64::new(1.0, 0.0);
        let e = b.adjoint() * one;

        Ok(s + e * u_vec.adjoint() * alpha)
    }
}

/// Eigenvalues of a (small) complex matrix via its Schur form.
pub fn eigenvalues(matrix: &DMatrix<C64>) -> Vec<C64> {
    let (_, t) = matrix.clone().schur().unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// One-sided Hausdorff-style distance between two finite point sets.
pub fn hausdorff(a: &[C64], b: &[C64]) -> f64 {
    let one_way = |x: &[C64], y: &[C64]| {
        x.iter()
            .map(|&p| {
                y.iter()
                    .map(|&q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Wire format: `{"zeros":[[re,im],...], "m":m, "phase":a}`.
#[derive(Serialize, Deserialize)]
pub struct BlaschkeJson {
    pub zeros: Vec<[f64; 2]>,
    pub m: usize,
    pub phase: f64,
}

impl From<&BlaschkeProduct> for BlaschkeJson {
    fn from(b: &BlaschkeProduct) -> Self {
        BlaschkeJson {
            zeros: b.zeros.iter().map(|z| [z.re, z.im]).collect(),
            m: b.monomial_power,
            phase: b.phase,
        }
    }
}

impl TryFrom<BlaschkeJson> for BlaschkeProduct {
    type Error = ClarkError;

    fn try_from(j: BlaschkeJson) -> Result<Self> {
        BlaschkeProduct::new(
            j.zeros.iter().map(|z| C64::new(z[0], z[1])).collect(),
            j.m,
            j.phase,
        )
    }
}
