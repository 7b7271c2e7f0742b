//! Bivariate complex polynomials with explicit bidegree: evaluation,
//! reflection, slicing, companion-matrix root finding, and a sampled bidisk
//! stability test.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::ClarkError;
use crate::{Result, C64};

/// Relative threshold below which trailing coefficients are trimmed.
pub const TRIM_RELATIVE: f64 = 1e-12;

/// Dense bivariate polynomial `p(z1, z2) = sum coeffs[k][l] z1^k z2^l`,
/// `0 <= k <= n1`, `0 <= l <= n2`. Trailing all-zero rows and columns are
/// trimmed at construction so the stored extents equal the bidegree.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly {
    coeffs: Vec<C64>, // row-major: index k * (n2 + 1) + l
    n1: usize,
    n2: usize,
}

/// One-variable slice of a [`BiPoly`]; leading coefficient is nonzero unless
/// the polynomial is identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly {
    coeffs: Vec<C64>,
}

/// Outcome of the sampled stability test. The test is a necessary-condition
/// check on a finite grid, not a decision procedure, so the parameters travel
/// with the verdict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityCertificate {
    pub stable: bool,
    /// grid resolution per axis that was actually sampled
    pub samples: usize,
    /// radial pullback: the closed disk of radius `1 - tol` was scanned
    pub tol: f64,
    /// when unstable: `(axis, fixed coordinate, offending root)` of the
    /// slice whose root entered the bidisk
    pub witness: Option<(usize, C64, C64)>,
}

impl BiPoly {
    /// Builds a polynomial from row-major coefficients at declared extents
    /// `(n1, n2)`; trailing near-zero rows/columns are trimmed.
    pub fn new(n1: usize, n2: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != (n1 + 1) * (n2 + 1) {
            return Err(ClarkError::Config(format!(
                "coefficient count {} does not match extents ({},{})",
                coeffs.len(),
                n1,
                n2
            )));
        }
        let mut p = BiPoly { coeffs, n1, n2 };
        p.trim();
        Ok(p)
    }

    /// The zero polynomial, stored with extents (0, 0).
    pub fn zero() -> Self {
        BiPoly {
            coeffs: vec![C64::new(0.0, 0.0)],
            n1: 0,
            n2: 0,
        }
    }

    /// Constant polynomial.
    pub fn constant(c: C64) -> Self {
        BiPoly {
            coeffs: vec![c],
            n1: 0,
            n2: 0,
        }
    }

    /// Convenience constructor from real coefficients.
    pub fn from_real(n1: usize, n2: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(
            n1,
            n2,
            coeffs.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn coeff(&self, k: usize, l: usize) -> C64 {
        if k <= self.n1 && l <= self.n2 {
            self.coeffs[k * (self.n2 + 1) + l]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Largest coefficient modulus; 0 only for the zero polynomial.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.scale() == 0.0
    }

    fn trim(&mut self) {
        let threshold = TRIM_RELATIVE * self.scale();
        let row_nonzero = |p: &BiPoly, k: usize| {
            (0..=p.n2).any(|l| p.coeffs[k * (p.n2 + 1) + l].norm() > threshold)
        };
        let col_nonzero = |p: &BiPoly, l: usize| {
            (0..=p.n1).any(|k| p.coeffs[k * (p.n2 + 1) + l].norm() > threshold)
        };
        while self.n1 > 0 && !row_nonzero(self, self.n1) {
            self.coeffs.truncate(self.n1 * (self.n2 + 1));
            self.n1 -= 1;
        }
        while self.n2 > 0 && !col_nonzero(self, self.n2) {
            let old_stride = self.n2 + 1;
            let mut next = Vec::with_capacity((self.n1 + 1) * self.n2);
            for k in 0..=self.n1 {
                next.extend_from_slice(&self.coeffs[k * old_stride..k * old_stride + self.n2]);
            }
            self.coeffs = next;
            self.n2 -= 1;
        }
        if self.n1 == 0 && self.n2 == 0 && self.coeffs[0].norm() <= threshold {
            self.coeffs[0] = C64::new(0.0, 0.0);
        }
    }

    /// Evaluates by Horner recursion in each variable.
    pub fn eval(&self, z1: C64, z2: C64) -> C64 {
        let stride = self.n2 + 1;
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..=self.n1).rev() {
            let row = &self.coeffs[k * stride..(k + 1) * stride];
            let mut inner = C64::new(0.0, 0.0);
            for &c in row.iter().rev() {
                inner = inner * z2 + c;
            }
            acc = acc * z1 + inner;
        }
        acc
    }

    /// Reflection `p~(z) = z1^{n1} z2^{n2} conj(p(1/conj(z1), 1/conj(z2)))`:
    /// coefficient `(k, l)` becomes `conj(coeffs[n1-k][n2-l])`. Rejects the
    /// zero polynomial.
    pub fn reflect(&self) -> Result<BiPoly> {
        if self.is_zero() {
            return Err(ClarkError::ZeroPolynomial);
        }
        let stride = self.n2 + 1;
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len()];
        for k in 0..=self.n1 {
            for l in 0..=self.n2 {
                out[k * stride + l] = self.coeffs[(self.n1 - k) * stride + (self.n2 - l)].conj();
            }
        }
        BiPoly::new(self.n1, self.n2, out)
    }

    /// One-variable slice: axis 1 fixes `z1 = xi` (result in `z2`), axis 2
    /// fixes `z2 = xi` (result in `z1`). Trailing coefficients below the
    /// relative threshold are trimmed.
    pub fn slice(&self, axis: usize, xi: C64) -> UniPoly {
        let stride = self.n2 + 1;
        let coeffs = match axis {
            1 => (0..=self.n2)
                .map(|l| {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in (0..=self.n1).rev() {
                        acc = acc * xi + self.coeffs[k * stride + l];
                    }
                    acc
                })
                .collect(),
            2 => (0..=self.n1)
                .map(|k| {
                    let row = &self.coeffs[k * stride..(k + 1) * stride];
                    let mut acc = C64::new(0.0, 0.0);
                    for &c in row.iter().rev() {
                        acc = acc * xi + c;
                    }
                    acc
                })
                .collect(),
            _ => panic!("axis must be 1 or 2"),
        };
        UniPoly::new(coeffs)
    }

    /// Formal partial derivative along the given axis.
    pub fn partial(&self, axis: usize) -> BiPoly {
        let stride = self.n2 + 1;
        match axis {
            1 => {
                if self.n1 == 0 {
                    return BiPoly::zero();
                }
                let mut out = vec![C64::new(0.0, 0.0); self.n1 * stride];
                for k in 1..=self.n1 {
                    for l in 0..=self.n2 {
                        out[(k - 1) * stride + l] = self.coeffs[k * stride + l] * k as f64;
                    }
                }
                BiPoly::new(self.n1 - 1, self.n2, out).expect("extent arithmetic")
            }
            2 => {
                if self.n2 == 0 {
                    return BiPoly::zero();
                }
                let mut out = vec![C64::new(0.0, 0.0); (self.n1 + 1) * self.n2];
                for k in 0..=self.n1 {
                    for l in 1..=self.n2 {
                        out[k * self.n2 + (l - 1)] = self.coeffs[k * stride + l] * l as f64;
                    }
                }
                BiPoly::new(self.n1, self.n2 - 1, out).expect("extent arithmetic")
            }
            _ => panic!("axis must be 1 or 2"),
        }
    }

    /// `self + rhs` with extents padded to the maximum, then trimmed.
    pub fn add(&self, rhs: &BiPoly) -> BiPoly {
        self.combine(rhs, C64::new(1.0, 0.0))
    }

    /// `self - rhs`.
    pub fn sub(&self, rhs: &BiPoly) -> BiPoly {
        self.combine(rhs, C64::new(-1.0, 0.0))
    }

    /// `self * s` for a scalar.
    pub fn scaled(&self, s: C64) -> BiPoly {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out.trim();
        out
    }

    fn combine(&self, rhs: &BiPoly, sign: C64) -> BiPoly {
        let n1 = self.n1.max(rhs.n1);
        let n2 = self.n2.max(rhs.n2);
        let stride = n2 + 1;
        let mut out = vec![C64::new(0.0, 0.0); (n1 + 1) * stride];
        for k in 0..=n1 {
            for l in 0..=n2 {
                out[k * stride + l] = self.coeff(k, l) + sign * rhs.coeff(k, l);
            }
        }
        let mut p = BiPoly { coeffs: out, n1, n2 };
        p.trim();
        p
    }

    /// Product of two polynomials (plain coefficient convolution).
    pub fn mul(&self, rhs: &BiPoly) -> BiPoly {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let n1 = self.n1 + rhs.n1;
        let n2 = self.n2 + rhs.n2;
        let stride = n2 + 1;
        let mut out = vec![C64::new(0.0, 0.0); (n1 + 1) * stride];
        for k in 0..=self.n1 {
            for l in 0..=self.n2 {
                let a = self.coeff(k, l);
                if a.norm() == 0.0 {
                    continue;
                }
                for r in 0..=rhs.n1 {
                    for s in 0..=rhs.n2 {
                        out[(k + r) * stride + (l + s)] += a * rhs.coeff(r, s);
                    }
                }
            }
        }
        let mut p = BiPoly { coeffs: out, n1, n2 };
        p.trim();
        p
    }

    /// Multiplies by the monomial `z1^{m1} z2^{m2}`.
    pub fn shift_monomial(&self, m1: usize, m2: usize) -> BiPoly {
        if self.is_zero() {
            return BiPoly::zero();
        }
        let n1 = self.n1 + m1;
        let n2 = self.n2 + m2;
        let stride = n2 + 1;
        let mut out = vec![C64::new(0.0, 0.0); (n1 + 1) * stride];
        for k in 0..=self.n1 {
            for l in 0..=self.n2 {
                out[(k + m1) * stride + (l + m2)] = self.coeff(k, l);
            }
        }
        BiPoly { coeffs: out, n1, n2 }
    }

    /// Exact division by `z1` (axis 1) or `z2` (axis 2). The divided-out
    /// row/column must be numerically zero; its residue is returned so the
    /// caller can assert it.
    pub fn divide_monomial(&self, axis: usize) -> (BiPoly, f64) {
        let stride = self.n2 + 1;
        match axis {
            1 => {
                let residue = (0..=self.n2)
                    .map(|l| self.coeffs[l].norm())
                    .fold(0.0, f64::max);
                if self.n1 == 0 {
                    return (BiPoly::zero(), residue);
                }
                let mut out = vec![C64::new(0.0, 0.0); self.n1 * stride];
                for k in 1..=self.n1 {
                    out[(k - 1) * stride..k * stride]
                        .copy_from_slice(&self.coeffs[k * stride..(k + 1) * stride]);
                }
                (
                    BiPoly::new(self.n1 - 1, self.n2, out).expect("extent arithmetic"),
                    residue,
                )
            }
            2 => {
                let residue = (0..=self.n1)
                    .map(|k| self.coeffs[k * stride].norm())
                    .fold(0.0, f64::max);
                if self.n2 == 0 {
                    return (BiPoly::zero(), residue);
                }
                let mut out = vec![C64::new(0.0, 0.0); (self.n1 + 1) * self.n2];
                for k in 0..=self.n1 {
                    for l in 1..=self.n2 {
                        out[k * self.n2 + (l - 1)] = self.coeffs[k * stride + l];
                    }
                }
                (
                    BiPoly::new(self.n1, self.n2 - 1, out).expect("extent arithmetic"),
                    residue,
                )
            }
            _ => panic!("axis must be 1 or 2"),
        }
    }

    /// Sampled stability test: scans a radial-angular grid of the closed disk
    /// of radius `1 - tol` in each variable and requires every root of the
    /// orthogonal slice to have modulus at least `1 - tol`. Both slice
    /// orientations are scanned so zeros that depend on a single variable are
    /// seen as slice roots. This certifies a necessary condition only; the
    /// grid parameters travel in the certificate.
    pub fn sampled_stability(&self, samples: usize, tol: f64) -> Result<StabilityCertificate> {
        if samples < 16 {
            return Err(ClarkError::Config(format!(
                "stability sampling needs at least 16 samples per axis, got {samples}"
            )));
        }
        let fail = |witness: Option<(usize, C64, C64)>| StabilityCertificate {
            stable: false,
            samples,
            tol,
            witness,
        };
        if self.is_zero() {
            return Ok(fail(None));
        }
        let radius = 1.0 - tol;
        let threshold = TRIM_RELATIVE * self.scale();
        for axis in [1usize, 2] {
            for i in 0..samples {
                // include both the center and the rim
                let r = radius * i as f64 / (samples - 1) as f64;
                let angle_count = if i == 0 { 1 } else { samples };
                for j in 0..angle_count {
                    let fixed =
                        C64::from_polar(r, std::f64::consts::TAU * j as f64 / angle_count as f64);
                    let q = self.slice(axis, fixed);
                    if q.is_zero() {
                        // the whole slice line lies in the zero set
                        return Ok(fail(Some((axis, fixed, fixed))));
                    }
                    if q.degree() == 0 {
                        if q.coeffs()[0].norm() <= threshold {
                            return Ok(fail(Some((axis, fixed, fixed))));
                        }
                        continue;
                    }
                    for root in q.roots()? {
                        if root.norm() < 1.0 - tol {
                            return Ok(fail(Some((axis, fixed, root))));
                        }
                    }
                }
            }
        }
        Ok(StabilityCertificate {
            stable: true,
            samples,
            tol,
            witness: None,
        })
    }

    /// Convenience wrapper around [`BiPoly::sampled_stability`].
    pub fn is_stable(&self, samples: usize, tol: f64) -> Result<bool> {
        Ok(self.sampled_stability(samples, tol)?.stable)
    }
}

impl UniPoly {
    /// Builds from ascending-power coefficients, trimming trailing
    /// coefficients below the relative threshold.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let threshold = TRIM_RELATIVE * scale;
        while coeffs.len() > 1 && coeffs.last().unwrap().norm() <= threshold {
            coeffs.pop();
        }
        if coeffs.len() == 1 && coeffs[0].norm() <= threshold {
            coeffs[0] = C64::new(0.0, 0.0);
        }
        UniPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Formal derivative.
    pub fn derivative(&self) -> UniPoly {
        if self.degree() == 0 {
            return UniPoly::new(vec![C64::new(0.0, 0.0)]);
        }
        UniPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i + 1) as f64)
                .collect(),
        )
    }

    pub fn add(&self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or_default()
                        + rhs.coeffs.get(i).copied().unwrap_or_default()
                })
                .collect(),
        )
    }

    pub fn scaled(&self, s: C64) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, rhs: &UniPoly) -> UniPoly {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }

    /// All complex roots with multiplicity, computed as eigenvalues of the
    /// companion matrix of the monic normalization, sorted by principal
    /// argument and then modulus. Rejects polynomials of degree zero.
    pub fn roots(&self) -> Result<Vec<C64>> {
        if self.is_zero() {
            return Err(ClarkError::ZeroPolynomial);
        }
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[d];
        if d == 1 {
            let mut r = vec![-self.coeffs[0] / lead];
            sort_by_argument(&mut r);
            return Ok(r);
        }
        let mut companion = DMatrix::<C64>::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = C64::new(1.0, 0.0);
        }
        for i in 0..d {
            companion[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let schur = companion.schur();
        let (_, t) = schur.unpack();
        let mut roots: Vec<C64> = (0..d).map(|i| t[(i, i)]).collect();
        sort_by_argument(&mut roots);
        Ok(roots)
    }
}

fn sort_by_argument(roots: &mut [C64]) {
    roots.sort_by(|a, b| {
        a.arg()
            .partial_cmp(&b.arg())
            .unwrap()
            .then(a.norm().partial_cmp(&b.norm()).unwrap())
    });
}

/// Wire format for [`BiPoly`]: `{"bidegree":[n1,n2],"coeffs":[[re,im],...]}`
/// with coefficients row-major in `k` then `l`.
#[derive(Serialize, Deserialize)]
pub struct BiPolyJson {
    pub bidegree: [usize; 2],
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&BiPoly> for BiPolyJson {
    fn from(p: &BiPoly) -> Self {
        BiPolyJson {
            bidegree: [p.n1, p.n2],
            coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl TryFrom<BiPolyJson> for BiPoly {
    type Error = ClarkError;

    fn try_from(j: BiPolyJson) -> Result<Self> {
        BiPoly::new(
            j.bidegree[0],
            j.bidegree[1],
            j.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect(),
        )
    }
}
