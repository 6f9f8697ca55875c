//! Levi-Civita connection and curvature of a coordinate-chart metric.
//!
//! Conventions, for coordinate fields `∂_i`:
//!
//! * `Γ_{ijk} = g(∇_{∂i}∂j, ∂k) = ½(∂_i g_{jk} + ∂_j g_{ik} − ∂_k g_{ij})`
//! * `R(∂i,∂j)∂k = ∇_i∇_j∂k − ∇_j∇_i∂k = R_{ijk}{}^l ∂l`
//! * `R_{ijkl} = R(∂i,∂j,∂k,∂l) = g(R(∂i,∂j)∂k, ∂l)`
//! * `J(x)y = R(y,x)x`, polarized `J(u,v)w = ½(R(w,u)v + R(w,v)u)`
//! * `ρ(u,v) = Tr J(u,v)`, and the Ricci operator raises an index with `g⁻¹`.
//!
//! Everything is computed by pushing metric jets through the formulas:
//! derivatives of the metric inverse come from a truncated Neumann series,
//! and each coordinate derivative lowers the jet order by one. With order-3
//! metric jets the curvature comes out as an order-1 jet, which is all that
//! `∇R` needs.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{eval_jet_order, ExprError, Jet3, Params, ScalarExpr};
use crate::linalg::{invert, LinalgError, SquareMatrix};

/// Pivot threshold used when inverting metric values.
pub const METRIC_INVERT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("degenerate metric: {0}")]
    Degenerate(#[from] LinalgError),
    #[error("point violates domain condition `{label}` (value {value:e})")]
    DomainViolation { label: String, value: f64 },
    #[error("point has dimension {got}, chart has dimension {expected}")]
    PointDimension { got: usize, expected: usize },
    #[error("coordinate x{index} out of range for chart dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
}

/// A point is admitted only if the given partial derivative of `expr`
/// has absolute value above `min_abs` there.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainCondition {
    pub label: String,
    pub expr: ScalarExpr,
    /// Coordinates to differentiate along (at most 3); empty for the value.
    pub derivative: Vec<usize>,
    pub min_abs: f64,
}

impl DomainCondition {
    pub fn nonzero(label: impl Into<String>, expr: ScalarExpr) -> Self {
        DomainCondition { label: label.into(), expr, derivative: Vec::new(), min_abs: 1e-12 }
    }

    pub fn nonzero_derivative(label: impl Into<String>, expr: ScalarExpr, wrt: Vec<usize>) -> Self {
        assert!(wrt.len() <= 3, "domain conditions use at most third derivatives");
        DomainCondition { label: label.into(), expr, derivative: wrt, min_abs: 1e-12 }
    }

    pub fn with_min_abs(mut self, min_abs: f64) -> Self {
        self.min_abs = min_abs;
        self
    }

    pub fn value_at(&self, p: &[f64], params: &Params) -> Result<f64, ExprError> {
        let j = eval_jet_order(&self.expr, p, params, self.derivative.len())?;
        Ok(match self.derivative.as_slice() {
            [] => j.value(),
            [a] => j.d1(*a),
            [a, b] => j.d2(*a, *b),
            [a, b, c] => j.d3(*a, *b, *c),
            _ => unreachable!(),
        })
    }
}

/// A metric on a coordinate chart: symmetric matrix of expressions,
/// parameter bindings and a domain predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricChart {
    dim: usize,
    components: Vec<ScalarExpr>,
    params: Params,
    domain: Vec<DomainCondition>,
}

impl MetricChart {
    /// The zero metric of dimension `dim`; fill it with [`MetricChart::set`].
    pub fn new(dim: usize) -> Self {
        MetricChart {
            dim,
            components: vec![ScalarExpr::zero(); dim * dim],
            params: Params::new(),
            domain: Vec::new(),
        }
    }

    /// Set `g_{ij}` and `g_{ji}`.
    pub fn set(&mut self, i: usize, j: usize, e: ScalarExpr) -> Result<(), CurvatureError> {
        let dim = self.dim;
        for index in [i, j].into_iter().chain(e.max_coord()) {
            if index >= dim {
                return Err(CurvatureError::CoordinateOutOfRange { index, dim });
            }
        }
        self.components[i * dim + j] = e.clone();
        self.components[j * dim + i] = e;
        Ok(())
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn bind(&mut self, name: impl Into<String>, value: f64) {
        self.params.insert(name.into(), value);
    }

    pub fn add_domain_condition(&mut self, c: DomainCondition) {
        self.domain.push(c);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.components[i * self.dim + j]
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn domain(&self) -> &[DomainCondition] {
        &self.domain
    }

    fn check_point(&self, p: &[f64]) -> Result<(), CurvatureError> {
        if p.len() != self.dim {
            return Err(CurvatureError::PointDimension { got: p.len(), expected: self.dim });
        }
        Ok(())
    }

    /// Check the domain predicate at `p`.
    pub fn check_domain(&self, p: &[f64]) -> Result<(), CurvatureError> {
        self.check_point(p)?;
        for c in &self.domain {
            let value = c.value_at(p, &self.params)?;
            if value.abs() <= c.min_abs {
                return Err(CurvatureError::DomainViolation { label: c.label.clone(), value });
            }
        }
        Ok(())
    }

    /// True when `p` satisfies the domain predicate and `g(p)` is invertible.
    pub fn admits(&self, p: &[f64]) -> bool {
        self.check_domain(p).is_ok()
            && self
                .metric_at(p)
                .map(|g| invert(&g, METRIC_INVERT_TOL).is_ok())
                .unwrap_or(false)
    }

    /// Plain evaluation of `g(p)`, no derivatives.
    pub fn metric_at(&self, p: &[f64]) -> Result<SquareMatrix, CurvatureError> {
        self.check_point(p)?;
        let m = self.dim;
        let mut g = SquareMatrix::zeros(m);
        for i in 0..m {
            for j in i..m {
                let v = self.components[i * m + j].eval(p, &self.params)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    fn metric_jets(&self, p: &[f64], order: usize) -> Result<Vec<Jet3>, CurvatureError> {
        let m = self.dim;
        let mut out = vec![Jet3::constant(m, order, 0.0); m * m];
        for i in 0..m {
            for j in i..m {
                let e = &self.components[i * m + j];
                if e.is_zero() {
                    continue;
                }
                let jet = eval_jet_order(e, p, &self.params, order)?;
                out[i * m + j] = jet.clone();
                out[j * m + i] = jet;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CurvatureOptions {
    /// Also compute `∇R` (needs third derivatives of the metric).
    pub nabla_r: bool,
}

/// Pointwise geometry of a chart. Tensors are flat row-major arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub point: Vec<f64>,
    pub dim: usize,
    pub g: SquareMatrix,
    pub g_inv: SquareMatrix,
    /// `∂_a g_{ij}` at `[a][i][j]`.
    pub metric_gradient: Vec<f64>,
    /// `Γ_{ijk}` at `[i][j][k]`.
    pub christoffel_first: Vec<f64>,
    /// `Γ_{ij}{}^k` at `[i][j][k]`.
    pub christoffel_second: Vec<f64>,
    /// `R_{ijkl}` at `[i][j][k][l]`.
    pub riemann: Vec<f64>,
    /// `R_{ijk}{}^l` at `[i][j][k][l]`.
    pub riemann_op: Vec<f64>,
    /// `(∇_a R)_{ijkl}` at `[a][i][j][k][l]`, when requested.
    pub nabla_riemann: Option<Vec<f64>>,
    pub ricci_form: SquareMatrix,
    pub ricci_op: SquareMatrix,
}

#[inline]
fn i3(m: usize, i: usize, j: usize, k: usize) -> usize {
    (i * m + j) * m + k
}

#[inline]
fn i4(m: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * m + j) * m + k) * m + l
}

#[inline]
fn i5(m: usize, a: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    (((a * m + i) * m + j) * m + k) * m + l
}

fn jet_matmul(m: usize, a: &[Jet3], b: &[Jet3]) -> Vec<Jet3> {
    let order = a[0].order().min(b[0].order());
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = Jet3::constant(m, order, 0.0);
            for k in 0..m {
                acc = &acc + &(&a[i * m + k] * &b[k * m + j]);
            }
            out.push(acc);
        }
    }
    out
}

/// Inverse of a jet-valued matrix `G = G₀ + N` (N has zero value part):
/// `G⁻¹ = Σ_k (−G₀⁻¹N)^k G₀⁻¹`, exact once `k` exceeds the jet order.
fn jet_inverse(m: usize, g: &[Jet3], g0_inv: &SquareMatrix) -> Vec<Jet3> {
    let order = g[0].order();
    let constant = |s: &SquareMatrix| -> Vec<Jet3> {
        s.as_slice().iter().map(|&v| Jet3::constant(m, order, v)).collect()
    };
    let neg_inv = constant(&g0_inv.scale(-1.0));
    let nil: Vec<Jet3> = g.iter().map(|j| j - &Jet3::constant(m, order, j.value())).collect();
    let step = jet_matmul(m, &neg_inv, &nil);
    let mut sum = constant(&SquareMatrix::identity(m));
    let mut term = sum.clone();
    for _ in 0..order {
        term = jet_matmul(m, &term, &step);
        sum = sum.iter().zip(&term).map(|(a, b)| a + b).collect();
    }
    jet_matmul(m, &sum, &constant(g0_inv))
}

/// Curvature data at `p`, without `∇R`.
pub fn curvature_at(chart: &MetricChart, p: &[f64]) -> Result<CurvatureData, CurvatureError> {
    curvature_at_with(chart, p, CurvatureOptions::default())
}

pub fn curvature_at_with(
    chart: &MetricChart,
    p: &[f64],
    opts: CurvatureOptions,
) -> Result<CurvatureData, CurvatureError> {
    chart.check_domain(p)?;
    let m = chart.dim();
    let order = if opts.nabla_r { 3 } else { 2 };

    let g_jets = chart.metric_jets(p, order)?;
    let g = SquareMatrix::from_fn(m, |i, j| g_jets[i * m + j].value());
    let g_inv = invert(&g, METRIC_INVERT_TOL)?;
    let g_inv_jets = jet_inverse(m, &g_jets, &g_inv);

    // ∂_a g_{ij}, order − 1
    let mut dg = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for ij in 0..m * m {
            dg.push(g_jets[ij].derivative(a));
        }
    }
    let dg_at = |a: usize, i: usize, j: usize| &dg[i3(m, a, i, j)];

    let mut gamma1 = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let s = &(dg_at(i, j, k) + dg_at(j, i, k)) - dg_at(k, i, j);
                gamma1.push(s.scale(0.5));
            }
        }
    }

    let mut gamma2 = Vec::with_capacity(m * m * m);
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                let mut acc = Jet3::constant(m, order - 1, 0.0);
                for q in 0..m {
                    acc = &acc + &(&g_inv_jets[l * m + q] * &gamma1[i3(m, i, j, q)]);
                }
                gamma2.push(acc);
            }
        }
    }

    // ∂_a Γ_{jk}^l at [a][j][k][l], order − 2
    let mut dgamma = Vec::with_capacity(m.pow(4));
    for a in 0..m {
        for jkl in 0..m * m * m {
            dgamma.push(gamma2[jkl].derivative(a));
        }
    }

    let r_order = order - 2;
    let mut r_op = Vec::with_capacity(m.pow(4));
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut acc = &dgamma[i4(m, i, j, k, l)] - &dgamma[i4(m, j, i, k, l)];
                    for q in 0..m {
                        let t1 = &gamma2[i3(m, i, q, l)].truncate(r_order) * &gamma2[i3(m, j, k, q)];
                        let t2 = &gamma2[i3(m, j, q, l)].truncate(r_order) * &gamma2[i3(m, i, k, q)];
                        acc = &acc + &(&t1 - &t2);
                    }
                    r_op.push(acc);
                }
            }
        }
    }

    let mut r_low = Vec::with_capacity(m.pow(4));
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let mut acc = Jet3::constant(m, r_order, 0.0);
                    for q in 0..m {
                        acc = &acc + &(&r_op[i4(m, i, j, k, q)] * &g_jets[q * m + l]);
                    }
                    r_low.push(acc);
                }
            }
        }
    }

    let values = |v: &[Jet3]| v.iter().map(Jet3::value).collect::<Vec<f64>>();
    let christoffel_second = values(&gamma2);
    let riemann = values(&r_low);

    let nabla_riemann = opts.nabla_r.then(|| {
        let gam = |a: usize, i: usize, q: usize| christoffel_second[i3(m, a, i, q)];
        let r = |i: usize, j: usize, k: usize, l: usize| riemann[i4(m, i, j, k, l)];
        let mut out = vec![0.0; m.pow(5)];
        for a in 0..m {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            let mut v = r_low[i4(m, i, j, k, l)].d1(a);
                            for q in 0..m {
                                v -= gam(a, i, q) * r(q, j, k, l)
                                    + gam(a, j, q) * r(i, q, k, l)
                                    + gam(a, k, q) * r(i, j, q, l)
                                    + gam(a, l, q) * r(i, j, k, q);
                            }
                            out[i5(m, a, i, j, k, l)] = v;
                        }
                    }
                }
            }
        }
        out
    });

    let riemann_op = values(&r_op);
    let ricci_form = SquareMatrix::from_fn(m, |j, k| {
        0.5 * (0..m)
            .map(|i| riemann_op[i4(m, i, j, k, i)] + riemann_op[i4(m, i, k, j, i)])
            .sum::<f64>()
    });
    let ricci_op = &g_inv * &ricci_form;

    Ok(CurvatureData {
        point: p.to_vec(),
        dim: m,
        metric_gradient: values(&dg),
        christoffel_first: values(&gamma1),
        christoffel_second,
        riemann,
        riemann_op,
        nabla_riemann,
        ricci_form,
        ricci_op,
        g,
        g_inv,
    })
}

impl CurvatureData {
    pub fn gamma_first(&self, i: usize, j: usize, k: usize) -> f64 {
        self.christoffel_first[i3(self.dim, i, j, k)]
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.christoffel_second[i3(self.dim, i, j, k)]
    }

    pub fn dg(&self, a: usize, i: usize, j: usize) -> f64 {
        self.metric_gradient[i3(self.dim, a, i, j)]
    }

    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riemann[i4(self.dim, i, j, k, l)]
    }

    pub fn r_op(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riemann_op[i4(self.dim, i, j, k, l)]
    }

    pub fn nabla_r(&self, a: usize, i: usize, j: usize, k: usize, l: usize) -> Option<f64> {
        self.nabla_riemann.as_ref().map(|v| v[i5(self.dim, a, i, j, k, l)])
    }

    /// `max|R_{ijkl}| + 1`.
    pub fn scale(&self) -> f64 {
        self.riemann.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1.0
    }

    pub fn max_abs_nabla_r(&self) -> Option<f64> {
        self.nabla_riemann
            .as_ref()
            .map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }

    /// `R(x,y,z,w)` for arbitrary vectors.
    pub fn r_vec(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        crate::models::contract4(self.dim, &self.riemann, x, y, z, w)
    }
}

/// Matrix of `y ↦ R(y,x)x`.
pub fn jacobi_op(cd: &CurvatureData, x: &[f64]) -> SquareMatrix {
    let m = cd.dim;
    assert_eq!(x.len(), m);
    SquareMatrix::from_fn(m, |l, k| {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += x[i] * x[j] * cd.r_op(k, i, j, l);
            }
        }
        s
    })
}

/// Matrix of `w ↦ ½(R(w,e_i)e_j + R(w,e_j)e_i)`.
pub fn jacobi_polarized(cd: &CurvatureData, i: usize, j: usize) -> SquareMatrix {
    SquareMatrix::from_fn(cd.dim, |l, k| 0.5 * (cd.r_op(k, i, j, l) + cd.r_op(k, j, i, l)))
}

/// Matrix of `z ↦ R(e_i,e_j)z`.
pub fn curvature_operator(cd: &CurvatureData, i: usize, j: usize) -> SquareMatrix {
    SquareMatrix::from_fn(cd.dim, |l, k| cd.r_op(i, j, k, l))
}

/// One scale-normalized residual of a pointwise identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub residual: f64,
    pub scale: f64,
    pub tol: f64,
    pub ok: bool,
}

impl InvariantCheck {
    fn new(name: &'static str, raw: f64, scale: f64, tol: f64) -> Self {
        InvariantCheck { name, residual: raw, scale, tol, ok: raw <= tol * scale }
    }
}

/// Residuals of the curvature identities at this point.
pub fn invariant_checks(cd: &CurvatureData) -> Vec<InvariantCheck> {
    let m = cd.dim;
    let scale = cd.scale();
    let (mut anti, mut pair, mut bianchi, mut contraction) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let r = cd.r(i, j, k, l);
                    anti = anti.max((r + cd.r(j, i, k, l)).abs()).max((r + cd.r(i, j, l, k)).abs());
                    pair = pair.max((r - cd.r(k, l, i, j)).abs());
                    bianchi = bianchi.max((r + cd.r(j, k, i, l) + cd.r(k, i, j, l)).abs());
                }
            }
        }
    }
    for j in 0..m {
        for k in 0..m {
            let contracted: f64 = (0..m).map(|i| cd.r_op(i, j, k, i)).sum();
            contraction = contraction.max((contracted - cd.ricci_form[(j, k)]).abs());
        }
    }
    let mut compat = 0.0f64;
    for a in 0..m {
        for i in 0..m {
            for j in 0..m {
                let lhs = cd.dg(a, i, j);
                compat = compat.max((lhs - cd.gamma_first(a, i, j) - cd.gamma_first(a, j, i)).abs());
            }
        }
    }
    let dg_scale = cd.metric_gradient.iter().fold(0.0f64, |x, v| x.max(v.abs())) + 1.0;
    let gr = &cd.g * &cd.ricci_op;
    let raise = (&gr - &cd.ricci_form).max_abs();
    let self_adjoint = gr.asymmetry();

    let mut out = vec![
        InvariantCheck::new("antisymmetry", anti, scale, 1e-9),
        InvariantCheck::new("pair_symmetry", pair, scale, 1e-9),
        InvariantCheck::new("first_bianchi", bianchi, scale, 1e-9),
        InvariantCheck::new("ricci_symmetry", cd.ricci_form.asymmetry(), scale, 1e-9),
        InvariantCheck::new("ricci_self_adjoint", self_adjoint, scale, 1e-9),
        InvariantCheck::new("ricci_raise_index", raise, scale, 1e-10),
        InvariantCheck::new("ricci_contraction", contraction, scale, 1e-9),
        InvariantCheck::new("metric_compatibility", compat, dg_scale, 1e-9),
    ];
    if cd.nabla_riemann.is_some() {
        let nscale = cd.max_abs_nabla_r().unwrap_or(0.0) + 1.0;
        let mut second = 0.0f64;
        for a in 0..m {
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for l in 0..m {
                            let s = cd.nabla_r(a, i, j, k, l).unwrap()
                                + cd.nabla_r(i, j, a, k, l).unwrap()
                                + cd.nabla_r(j, a, i, k, l).unwrap();
                            second = second.max(s.abs());
                        }
                    }
                }
            }
        }
        out.push(InvariantCheck::new("second_bianchi", second, nscale, 1e-8));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn flat(signs: &[f64]) -> MetricChart {
        let mut c = MetricChart::new(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            c.set(i, i, ScalarExpr::constant(s)).unwrap();
        }
        c
    }

    #[test]
    fn flat_space_has_no_curvature() {
        let chart = flat(&[1.0, 1.0, -1.0]);
        let cd = curvature_at_with(&chart, &[0.3, -0.2, 0.9], CurvatureOptions { nabla_r: true }).unwrap();
        assert!(cd.christoffel_second.iter().all(|&v| v == 0.0));
        assert!(cd.riemann.iter().all(|&v| v == 0.0));
        assert_eq!(cd.ricci_op.max_abs(), 0.0);
        assert_eq!(cd.max_abs_nabla_r(), Some(0.0));
        assert_eq!(jacobi_op(&cd, &[1.0, 2.0, 3.0]).max_abs(), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(jacobi_polarized(&cd, i, j).max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn round_sphere_has_positive_sectional_curvature() {
        // g = dθ² + sin²θ dφ², K = 1.
        let mut c = MetricChart::new(2);
        c.set(0, 0, ScalarExpr::constant(1.0)).unwrap();
        c.set(1, 1, parse_expr("sin(x0)^2", 2, &[]).unwrap()).unwrap();
        let theta: f64 = 0.7;
        let cd = curvature_at(&c, &[theta, 0.1]).unwrap();
        let s2 = theta.sin().powi(2);
        assert!((cd.r(0, 1, 1, 0) - s2).abs() < 1e-12);
        assert!((cd.ricci_op[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((cd.ricci_op[(1, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_of_zero_vector_vanishes() {
        let mut c = MetricChart::new(2);
        c.set(0, 0, ScalarExpr::constant(1.0)).unwrap();
        c.set(1, 1, parse_expr("exp(x0)", 2, &[]).unwrap()).unwrap();
        let cd = curvature_at(&c, &[0.2, 0.0]).unwrap();
        assert_eq!(jacobi_op(&cd, &[0.0, 0.0]).max_abs(), 0.0);
        assert_eq!(curvature_operator(&cd, 1, 1).max_abs(), 0.0);
        let j = jacobi_op(&cd, &[0.4, -1.3]);
        let x = [0.4, -1.3];
        assert!(j.mul_vec(&x).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let c = flat(&[1.0, 0.0]);
        assert!(matches!(curvature_at(&c, &[0.0, 0.0]), Err(CurvatureError::Degenerate(_))));
    }

    #[test]
    fn domain_violation_is_reported() {
        let mut c = flat(&[1.0, 1.0]);
        c.add_domain_condition(DomainCondition::nonzero("x0", ScalarExpr::coord(0)));
        assert!(matches!(
            curvature_at(&c, &[0.0, 1.0]),
            Err(CurvatureError::DomainViolation { .. })
        ));
        assert!(curvature_at(&c, &[0.5, 1.0]).is_ok());
        assert!(!c.admits(&[0.0, 0.3]));
    }

    #[test]
    fn set_rejects_out_of_range_coordinates() {
        let mut c = MetricChart::new(2);
        assert!(c.set(0, 0, ScalarExpr::coord(2)).is_err());
        assert!(c.set(0, 2, ScalarExpr::constant(1.0)).is_err());
    }
}
