//! Algebraic curvature models `(V, ⟨·,·⟩, A)`.
//!
//! A model is a nondegenerate inner product on `ℝⁿ` together with a 4-tensor
//! having the symmetries of a Riemann tensor. The curvature operator, the
//! polarized Jacobi operator and the Ricci operator are derived from `A`
//! and the inner product with the same conventions as [`crate::curvature`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{curvature_at, CurvatureData, CurvatureError, MetricChart};
use crate::linalg::{invert, signature, LinalgError, SquareMatrix};

/// Symmetry tolerance, relative to `max|A| + 1`.
pub const MODEL_SYMMETRY_TOL: f64 = 1e-10;

/// Allowed deviation `‖ρ₀ − s·id‖ ≤ tol·(|s|+1)` for an Einstein input.
pub const EINSTEIN_INPUT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("tensor has {got} entries, expected n⁴ = {expected}")]
    TensorLength { got: usize, expected: usize },
    #[error("metric is {got}×{got}, tensor dimension is {expected}")]
    MetricDimension { got: usize, expected: usize },
    #[error("metric is not symmetric (deviation {0:e})")]
    AsymmetricMetric(f64),
    #[error("degenerate inner product: {0}")]
    Degenerate(#[from] LinalgError),
    #[error("tensor fails curvature symmetries: {0}")]
    Symmetry(String),
    #[error("non-finite entry in model")]
    NonFinite,
    #[error("inner product is not the identity (doubling needs an orthonormal basis)")]
    NotOrthonormal,
    #[error("model is not Einstein: ‖ρ − s·id‖ = {residual:e} with s = {s}")]
    NotEinstein { s: f64, residual: f64 },
    #[error("signature ({neg},{pos}) does not add up to dimension {n}")]
    Signature { neg: usize, pos: usize, n: usize },
    #[error("dimension {0} outside the supported range")]
    Dimension(usize),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

#[inline]
fn idx(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// `A(x,y,z,w)` for a flat `n⁴` tensor.
pub fn contract4(n: usize, a: &[f64], x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if y[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                if z[k] == 0.0 {
                    continue;
                }
                for l in 0..n {
                    s += x[i] * y[j] * z[k] * w[l] * a[idx(n, i, j, k, l)];
                }
            }
        }
    }
    s
}

/// Worst violation of one symmetry identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub identity: &'static str,
    pub indices: [usize; 4],
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub first_bianchi: f64,
    pub scale: f64,
    pub tol: f64,
    pub violations: Vec<Violation>,
}

impl SymmetryReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Residuals of `A(1234) = −A(2134)`, `A(1234) = A(3412)` and the first
/// Bianchi identity. A violation is listed for each identity whose worst
/// residual exceeds `tol·(max|A|+1)`.
pub fn validate(n: usize, a: &[f64], tol: f64) -> SymmetryReport {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
    let mut worst = [(0.0f64, [0usize; 4]); 3];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = a[idx(n, i, j, k, l)];
                    let res = [
                        (v + a[idx(n, j, i, k, l)]).abs(),
                        (v - a[idx(n, k, l, i, j)]).abs(),
                        (v + a[idx(n, j, k, i, l)] + a[idx(n, k, i, j, l)]).abs(),
                    ];
                    for (w, r) in worst.iter_mut().zip(res) {
                        if r > w.0 || r.is_nan() {
                            *w = (r, [i, j, k, l]);
                        }
                    }
                }
            }
        }
    }
    let names = ["antisymmetry", "pair_symmetry", "first_bianchi"];
    let violations = worst
        .iter()
        .zip(names)
        .filter(|((r, _), _)| !(*r <= tol * scale))
        .map(|(&(residual, indices), identity)| Violation { identity, indices, residual })
        .collect();
    SymmetryReport {
        antisymmetry: worst[0].0,
        pair_symmetry: worst[1].0,
        first_bianchi: worst[2].0,
        scale,
        tol,
        violations,
    }
}

/// JSON exchange format: `{"n": .., "metric": [[..]], "A": [..]}` with `A`
/// flattened in `(i,j,k,l)` row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub n: usize,
    pub metric: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    n: usize,
    metric: SquareMatrix,
    metric_inv: SquareMatrix,
    tensor: Vec<f64>,
}

impl Model {
    /// Build a model, checking the inner product and the curvature symmetries.
    pub fn new(metric: SquareMatrix, tensor: Vec<f64>) -> Result<Self, ModelError> {
        let n = metric.dim();
        if tensor.len() != n.pow(4) {
            return Err(ModelError::TensorLength { got: tensor.len(), expected: n.pow(4) });
        }
        if !metric.is_finite() || tensor.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        let asym = metric.asymmetry();
        if asym > 1e-12 * (metric.max_abs() + 1.0) {
            return Err(ModelError::AsymmetricMetric(asym));
        }
        let metric_inv = invert(&metric, 1e-12)?;
        let report = validate(n, &tensor, MODEL_SYMMETRY_TOL);
        if let Some(v) = report.violations.first() {
            return Err(ModelError::Symmetry(format!(
                "{} residual {:e} at {:?}",
                v.identity, v.residual, v.indices
            )));
        }
        Ok(Model { n, metric, metric_inv, tensor })
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self, ModelError> {
        let metric = SquareMatrix::from_rows(doc.metric.clone())?;
        if metric.dim() != doc.n {
            return Err(ModelError::MetricDimension { got: metric.dim(), expected: doc.n });
        }
        Model::new(metric, doc.a.clone())
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument { n: self.n, metric: self.metric.rows(), a: self.tensor.clone() }
    }

    pub fn zero(metric: SquareMatrix) -> Result<Self, ModelError> {
        let n = metric.dim();
        Model::new(metric, vec![0.0; n.pow(4)])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> &SquareMatrix {
        &self.metric
    }

    pub fn tensor(&self) -> &[f64] {
        &self.tensor
    }

    pub fn a(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.tensor[idx(self.n, i, j, k, l)]
    }

    pub fn eval(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        contract4(self.n, &self.tensor, x, y, z, w)
    }

    /// `(neg, pos)` counts of the inner product.
    pub fn signature(&self) -> (usize, usize) {
        signature(&self.metric)
    }

    /// `max|A| + 1`.
    pub fn scale(&self) -> f64 {
        self.tensor.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0
    }

    /// Raise the last slot: `M[l][k] = Σ_m g^{lm} f(k, m)`.
    fn raised(&self, f: impl Fn(usize, usize) -> f64) -> SquareMatrix {
        let n = self.n;
        SquareMatrix::from_fn(n, |l, k| (0..n).map(|m| self.metric_inv[(l, m)] * f(k, m)).sum())
    }

    /// `𝒜(e_i,e_j)` with `⟨𝒜(v₁,v₂)v₃,v₄⟩ = A(v₁,v₂,v₃,v₄)`.
    pub fn curvature_operator(&self, i: usize, j: usize) -> SquareMatrix {
        self.raised(|k, m| self.a(i, j, k, m))
    }

    /// Polarized Jacobi operator `J(e_i,e_j)` with
    /// `⟨J(v₁,v₂)v₃,v₄⟩ = ½(A(v₃,v₁,v₂,v₄) + A(v₃,v₂,v₁,v₄))`.
    pub fn jacobi(&self, i: usize, j: usize) -> SquareMatrix {
        self.raised(|k, m| 0.5 * (self.a(k, i, j, m) + self.a(k, j, i, m)))
    }

    /// Quadratic Jacobi operator `J(x) = J(x,x)`.
    pub fn jacobi_along(&self, x: &[f64]) -> SquareMatrix {
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let c = x[i] * x[j];
                if c != 0.0 {
                    out = out.add(&self.jacobi(i, j).scale(c));
                }
            }
        }
        out
    }

    /// `ρ(e_i,e_j) = Tr J(e_i,e_j)`.
    pub fn ricci_form(&self) -> SquareMatrix {
        SquareMatrix::from_fn(self.n, |i, j| self.jacobi(i, j).trace())
    }

    pub fn ricci_operator(&self) -> SquareMatrix {
        &self.metric_inv * &self.ricci_form()
    }
}

/// Pointwise curvature of a chart, as a model.
pub fn model_at(chart: &MetricChart, p: &[f64]) -> Result<Model, ModelError> {
    let cd = curvature_at(chart, p)?;
    model_from_curvature(&cd)
}

pub fn model_from_curvature(cd: &CurvatureData) -> Result<Model, ModelError> {
    Model::new(cd.g.clone(), cd.riemann.clone())
}

/// `c[φ(x,w)φ(y,z) − φ(x,z)φ(y,w)]` as a flat tensor.
pub fn canonical_tensor(phi: &SquareMatrix, c: f64) -> Vec<f64> {
    let n = phi.dim();
    let mut a = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    a[idx(n, i, j, k, l)] =
                        c * (phi[(i, l)] * phi[(j, k)] - phi[(i, k)] * phi[(j, l)]);
                }
            }
        }
    }
    a
}

/// Canonical model with inner product `φ`. With `φ` positive definite this
/// is the constant sectional curvature `c` model.
pub fn canonical_model(phi: &SquareMatrix, c: f64) -> Result<Model, ModelError> {
    Model::new(phi.clone(), canonical_tensor(phi, c))
}

/// `diag(−1,…,−1,+1,…,+1)` with `neg` negative entries.
pub fn signature_metric(neg: usize, pos: usize) -> SquareMatrix {
    let signs: Vec<f64> = (0..neg).map(|_| -1.0).chain((0..pos).map(|_| 1.0)).collect();
    SquareMatrix::diagonal(&signs)
}

/// Seeded random model: inner product `diag(−1^neg, +1^pos)` and a sum of
/// one to three canonical tensors built from random symmetric matrices with
/// entries uniform in `[−1, 1]`.
pub fn random_model(seed: u64, n: usize, neg: usize) -> Result<Model, ModelError> {
    if n == 0 || n > 8 {
        return Err(ModelError::Dimension(n));
    }
    if neg > n {
        return Err(ModelError::Signature { neg, pos: 0, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = rng.random_range(1..=3);
    let mut a = vec![0.0; n.pow(4)];
    for _ in 0..terms {
        let mut phi = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..=1.0);
                phi[(i, j)] = v;
                phi[(j, i)] = v;
            }
        }
        let c = rng.random_range(-1.0..=1.0);
        for (dst, src) in a.iter_mut().zip(canonical_tensor(&phi, c)) {
            *dst += src;
        }
    }
    Model::new(signature_metric(neg, n - neg), a)
}

/// Einstein constant `s = Tr ρ / n`, or an error if `ρ` is not `s·id`.
pub fn einstein_constant(model: &Model) -> Result<f64, ModelError> {
    let rho = model.ricci_operator();
    let n = model.dim();
    let s = rho.trace() / n as f64;
    let residual = (&rho - &SquareMatrix::identity(n).scale(s)).max_abs();
    if residual > EINSTEIN_INPUT_TOL * (s.abs() + 1.0) {
        return Err(ModelError::NotEinstein { s, residual });
    }
    Ok(s)
}

/// Doubling of a Riemannian model written in an orthonormal basis.
///
/// Basis of the result: `e_i⁺ = e_i` at index `i`, `e_i⁻ = √−1·e_i` at
/// index `n + i`. The inner product is `Re` and the tensor is `Im` of the
/// complex-multilinear extension, so an entry with `k` minus-slots is
/// `Im(√−1^k)·A₀`: `+A₀` for one, `−A₀` for three, zero otherwise.
pub fn double_model(m0: &Model) -> Result<Model, ModelError> {
    let n = m0.dim();
    if (m0.metric() - &SquareMatrix::identity(n)).max_abs() != 0.0 {
        return Err(ModelError::NotOrthonormal);
    }
    einstein_constant(m0)?;
    let im_of_i_pow = |k: usize| -> f64 {
        match k % 4 {
            1 => 1.0,
            3 => -1.0,
            _ => 0.0,
        }
    };
    let n1 = 2 * n;
    let mut a1 = vec![0.0; n1.pow(4)];
    for i in 0..n1 {
        for j in 0..n1 {
            for k in 0..n1 {
                for l in 0..n1 {
                    let minus = [i, j, k, l].iter().filter(|&&x| x >= n).count();
                    let f = im_of_i_pow(minus);
                    if f != 0.0 {
                        a1[idx(n1, i, j, k, l)] = f * m0.a(i % n, j % n, k % n, l % n);
                    }
                }
            }
        }
    }
    Model::new(signature_metric(0, n).direct_sum(&signature_metric(n, 0)), a1)
}

impl SquareMatrix {
    /// Block-diagonal `[[self, 0], [0, other]]`.
    pub fn direct_sum(&self, other: &SquareMatrix) -> SquareMatrix {
        let (a, b) = (self.dim(), other.dim());
        SquareMatrix::from_fn(a + b, |i, j| match (i < a, j < a) {
            (true, true) => self[(i, j)],
            (false, false) => other[(i - a, j - a)],
            _ => 0.0,
        })
    }
}
