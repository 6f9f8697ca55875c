//! Small dense linear algebra: matrices up to 16×16, inversion, ranks of
//! operator powers and eigenvalue clusters.

use std::fmt;
use std::ops::{Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_DIM: usize = 16;

/// Default relative threshold for counting singular values as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular within tolerance (pivot {pivot:e}, scale {scale:e})")]
    Degenerate { pivot: f64, scale: f64 },
    #[error("matrix dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge(usize),
    #[error("expected a square matrix, got {rows} rows with a row of length {cols}")]
    NotSquare { rows: usize, cols: usize },
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(LinalgError::NotSquare { rows: n, cols: r.len() });
            }
            data.extend(r);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        SquareMatrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &SquareMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SquareMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Column `j`, i.e. the image of the `j`-th basis vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &SquareMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.n), |acc, _| &acc * self)
    }

    /// Largest deviation from symmetry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Bilinear form `uᵀ·self·v`.
    pub fn form(&self, u: &[f64], v: &[f64]) -> f64 {
        let sv = self.mul_vec(v);
        u.iter().zip(&sv).map(|(a, b)| a * b).sum()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SquareMatrix {
    type Error = LinalgError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        Self::from_rows(rows)
    }
}

impl From<SquareMatrix> for Vec<Vec<f64>> {
    fn from(m: SquareMatrix) -> Self {
        m.rows()
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n);
        SquareMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Gauss–Jordan inversion with partial pivoting. A pivot below
/// `tol·max|A|` is treated as singular.
pub fn invert(a: &SquareMatrix, tol: f64) -> Result<SquareMatrix, LinalgError> {
    let n = a.dim();
    if n > MAX_DIM {
        return Err(LinalgError::TooLarge(n));
    }
    let scale = a.max_abs();
    let mut work = a.clone();
    let mut inv = SquareMatrix::identity(n);
    for col in 0..n {
        let (piv_row, piv) = (col..n)
            .map(|r| (r, work[(r, col)]))
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
            .expect("non-empty pivot range");
        if piv.abs() <= tol * scale || piv == 0.0 {
            return Err(LinalgError::Degenerate { pivot: piv.abs(), scale });
        }
        if piv_row != col {
            for j in 0..n {
                work.data.swap(col * n + j, piv_row * n + j);
                inv.data.swap(col * n + j, piv_row * n + j);
            }
        }
        let p = work[(col, col)];
        for j in 0..n {
            work[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = work[(r, col)];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                work.data[r * n + j] -= f * work.data[col * n + j];
                inv.data[r * n + j] -= f * inv.data[col * n + j];
            }
        }
    }
    Ok(inv)
}

/// Number of negative and positive eigenvalues of a symmetric matrix.
pub fn signature(g: &SquareMatrix) -> (usize, usize) {
    let eig = nalgebra::SymmetricEigen::new(g.to_nalgebra());
    let scale = eig.eigenvalues.amax().max(1e-300);
    let neg = eig.eigenvalues.iter().filter(|&&v| v < -1e-12 * scale).count();
    let pos = eig.eigenvalues.iter().filter(|&&v| v > 1e-12 * scale).count();
    (neg, pos)
}

pub fn singular_values(a: &SquareMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// One eigenvalue with its algebraic multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

impl EigenCluster {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub eigenvalues: Vec<EigenCluster>,
    /// `ranks[k]` is the rank of `T^k`, for `k = 0..=n`.
    pub ranks: Vec<usize>,
    /// Least `k` with `T^k = 0`, or 0 when `T` is not nilpotent.
    pub nilpotency_index: usize,
    pub rank_tol: f64,
}

impl SpectralProfile {
    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_index > 0
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, c| m.max(c.value().norm()))
    }
}

/// Rank of `a`, counting singular values above `tol·max(reference, 1e-12)`.
pub fn rank_with_reference(a: &SquareMatrix, tol: f64, reference: f64) -> usize {
    let threshold = tol * reference.max(1e-12);
    singular_values(a).iter().filter(|&&s| s > threshold).count()
}

/// Ranks of powers, nilpotency index and eigenvalue clusters of `t`.
///
/// The rank of `T^k` is measured against `σ_max(T)^k` rather than the
/// largest singular value of `T^k` itself, so rounding residue in a power
/// that should vanish is not promoted to full rank.
pub fn spectral_profile(t: &SquareMatrix, tol: f64) -> SpectralProfile {
    let n = t.dim();
    let sigma = singular_values(t).first().copied().unwrap_or(0.0);
    let mut ranks = vec![n];
    let mut power = SquareMatrix::identity(n);
    let mut nilpotency_index = 0;
    for k in 1..=n {
        power = &power * t;
        let r = rank_with_reference(&power, tol, sigma.powi(k as i32));
        // Rank is non-increasing in exact arithmetic.
        let r = r.min(*ranks.last().expect("non-empty"));
        ranks.push(r);
        if r == 0 && nilpotency_index == 0 {
            nilpotency_index = k;
        }
    }
    if nilpotency_index > 0 {
        // Fill the tail so the sequence always covers 0..=n.
        for r in ranks.iter_mut().skip(nilpotency_index) {
            *r = 0;
        }
    }

    let eigenvalues = if n == 0 {
        Vec::new()
    } else if nilpotency_index > 0 {
        vec![EigenCluster { re: 0.0, im: 0.0, multiplicity: n }]
    } else {
        cluster(&eigenvalues(t))
    };

    SpectralProfile { eigenvalues, ranks, nilpotency_index, rank_tol: tol }
}

/// Eigenvalues by the Francis QR iteration (real Schur form).
pub fn eigenvalues(t: &SquareMatrix) -> Vec<Complex64> {
    if t.dim() == 0 {
        return Vec::new();
    }
    t.to_nalgebra().complex_eigenvalues().iter().copied().collect()
}

/// Merge numerically coincident eigenvalues. Each cluster is represented by
/// its mean, which is far more accurate than the individual members of a
/// perturbed multiple root.
pub fn cluster(values: &[Complex64]) -> Vec<EigenCluster> {
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let radius = 1e-6 * scale;
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &v in values {
        match groups.iter_mut().find(|g| g.iter().any(|w| (w - v).norm() <= radius)) {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    let mut out: Vec<EigenCluster> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<Complex64>() / g.len() as f64;
            let im = if mean.im.abs() <= radius { 0.0 } else { mean.im };
            EigenCluster { re: mean.re, im, multiplicity: g.len() }
        })
        .collect();
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Characteristic polynomial coefficients `c[0..=n]` of `det(λI − T)`,
/// lowest degree first, by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(t: &SquareMatrix) -> Vec<f64> {
    let n = t.dim();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = SquareMatrix::zeros(n);
    for k in 1..=n {
        let mut next = t * &m;
        for i in 0..n {
            next[(i, i)] += c[n - k + 1];
        }
        m = next;
        c[n - k] = -(t * &m).trace() / k as f64;
    }
    c
}

/// Roots of a monic-normalizable real polynomial (coefficients lowest
/// degree first) by Durand–Kerner iteration followed by Newton polishing.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let monic: Vec<f64> = coeffs[..=deg].iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let deriv = |z: Complex64| {
        monic
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, (k, &c)| acc * z + c * k as f64)
    };

    let bound = 1.0 + monic[..deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..deg {
            let zi = roots[i];
            let denom = (0..deg)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (zi - roots[j]));
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(zi) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta <= 1e-15 * bound {
            break;
        }
    }
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*z);
            if d.norm() == 0.0 {
                break;
            }
            let next = *z - eval(*z) / d;
            if eval(next).norm() < eval(*z).norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &SquareMatrix, inv: &SquareMatrix) -> f64 {
        (&(a * inv) - &SquareMatrix::identity(a.dim())).max_abs()
    }

    #[test]
    fn invert_identity_and_involution() {
        let i = SquareMatrix::identity(3);
        assert_eq!(invert(&i, 1e-12).unwrap(), i);
        let d = SquareMatrix::diagonal(&[1.0, -1.0]);
        assert_eq!(invert(&d, 1e-12).unwrap(), d);
    }

    #[test]
    fn invert_off_diagonal_metric() {
        // (x, y, z, x̄) metric with g(∂x, ∂z) = 2e^y at y = 0.3.
        let f = 2.0 * 0.3f64.exp();
        let g = SquareMatrix::from_rows(vec![
            vec![0.0, 0.0, f, 1.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![f, 0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let inv = invert(&g, 1e-12).unwrap();
        assert!(residual(&g, &inv) <= 1e-10 * g.max_abs());
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let g = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(invert(&g, 1e-12), Err(LinalgError::Degenerate { .. })));
    }

    #[test]
    fn zero_operator_profile() {
        let p = spectral_profile(&SquareMatrix::zeros(4), DEFAULT_RANK_TOL);
        assert_eq!(p.ranks, vec![4, 0, 0, 0, 0]);
        assert_eq!(p.nilpotency_index, 1);
        assert_eq!(p.eigenvalues, vec![EigenCluster { re: 0.0, im: 0.0, multiplicity: 4 }]);
    }

    #[test]
    fn nilpotent_jordan_block() {
        let j = SquareMatrix::from_fn(4, |i, k| if k == i + 1 { 3.0 } else { 0.0 });
        let p = spectral_profile(&j, DEFAULT_RANK_TOL);
        assert_eq!(p.ranks, vec![4, 3, 2, 1, 0]);
        assert_eq!(p.nilpotency_index, 4);
    }

    #[test]
    fn rotation_like_complex_structure() {
        // J² = −id with double eigenvalues ±i.
        let j = SquareMatrix::from_rows(vec![
            vec![0.0, 1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, -1.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let p = spectral_profile(&j, DEFAULT_RANK_TOL);
        assert_eq!(p.nilpotency_index, 0);
        assert_eq!(p.eigenvalues.len(), 2);
        for c in &p.eigenvalues {
            assert_eq!(c.multiplicity, 2);
            assert!(c.re.abs() < 1e-12 && (c.im.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        let c = characteristic_polynomial(&SquareMatrix::diagonal(&[1.0, 2.0, 3.0]));
        // (λ−1)(λ−2)(λ−3) = λ³ − 6λ² + 11λ − 6
        assert_eq!(c, vec![-6.0, 11.0, -6.0, 1.0]);
        let mut roots: Vec<f64> = polynomial_roots(&c).iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        for (r, e) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_json_is_row_lists() {
        let m = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1.0,2.0],[3.0,4.0]]");
        let back: SquareMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SquareMatrix>("[[1.0],[2.0,3.0]]").is_err());
    }
}
