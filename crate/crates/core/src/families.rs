//! Example geometries and their family-specific checks.
//!
//! Coordinate order (0-based indices):
//!
//! * `def11`: `x_1..x_k`, then `y_1..y_ℓ`, then `x̄_1..x̄_k`. The `ψ`
//!   entries are written in the chart variables of the `y` block.
//! * `thm13`: `(x, y, z, x̄) = (x0, x1, x2, x3)`, so `φ` is written in `x1`.
//! * Walker charts: `(x0, x1, x2, x3)` with `g(∂0,∂2) = g(∂1,∂3) = 1`.
//!   Functions of the last two coordinates are written in `x2, x3`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curvature::{CurvatureError, DomainCondition, MetricChart};
use crate::expr::{eval_jet_order, parse_expr, ExprError, Params, ScalarExpr};
use crate::linalg::{invert, signature, LinalgError, SquareMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("degenerate matrix: {0}")]
    Degenerate(#[from] LinalgError),
    #[error("{what} depends on x{index}, which is not allowed")]
    Dependency { what: String, index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("the coefficients (a, b, c) must not all vanish")]
    ZeroCoefficients,
    #[error("{0}")]
    Config(String),
}

fn only_depends_on(e: &ScalarExpr, allowed: impl Fn(usize) -> bool, what: &str) -> Result<(), FamilyError> {
    match e.coords().into_iter().find(|&i| !allowed(i)) {
        Some(index) => Err(FamilyError::Dependency { what: what.to_string(), index }),
        None => Ok(()),
    }
}

/// Metric with `g(∂x_i,∂x_j) = −2ψ_ij(y)`, `g(∂y_a,∂y_b) = C_ab` and
/// `g(∂x_i,∂x̄_i) = 1`, of dimension `2k + ℓ`.
pub fn build_def11(
    k: usize,
    l: usize,
    c: &SquareMatrix,
    psi: &[Vec<ScalarExpr>],
    params: Params,
) -> Result<MetricChart, FamilyError> {
    if c.dim() != l {
        return Err(FamilyError::Shape(format!("C is {}×{}, expected {l}×{l}", c.dim(), c.dim())));
    }
    if psi.len() != k || psi.iter().any(|row| row.len() != k) {
        return Err(FamilyError::Shape(format!("ψ must be {k}×{k}")));
    }
    if c.asymmetry() != 0.0 {
        return Err(FamilyError::Shape("C must be symmetric".into()));
    }
    invert(c, 1e-12)?;
    let m = 2 * k + l;
    let mut chart = MetricChart::new(m).with_params(params);
    for i in 0..k {
        for j in 0..k {
            if psi[i][j] != psi[j][i] {
                return Err(FamilyError::Shape(format!("ψ is not symmetric at ({i},{j})")));
            }
            only_depends_on(&psi[i][j], |x| (k..k + l).contains(&x), &format!("ψ[{i}][{j}]"))?;
        }
    }
    for i in 0..k {
        for j in i..k {
            if !psi[i][j].is_zero() {
                chart.set(i, j, ScalarExpr::constant(-2.0) * psi[i][j].clone())?;
            }
        }
        chart.set(i, k + l + i, ScalarExpr::constant(1.0))?;
    }
    for a in 0..l {
        for b in a..l {
            if c[(a, b)] != 0.0 {
                chart.set(k + a, k + b, ScalarExpr::constant(c[(a, b)]))?;
            }
        }
    }
    Ok(chart)
}

/// Expected signature `(k + u, k + v)` of a `def11` metric, where `C` has
/// signature `(u, v)`.
pub fn def11_signature(k: usize, c: &SquareMatrix) -> (usize, usize) {
    let (u, v) = signature(c);
    (k + u, k + v)
}

/// Metric on `ℝ⁴` with `g(∂x,∂x̄) = g(∂y,∂y) = g(∂z,∂z) = 1` and
/// `g(∂x,∂z) = 2φ(y)`. Points where `φ″` vanishes are rejected.
pub fn build_thm13(phi: ScalarExpr, params: Params) -> Result<MetricChart, FamilyError> {
    only_depends_on(&phi, |i| i == 1, "φ")?;
    let mut chart = MetricChart::new(4).with_params(params);
    chart.set(0, 3, ScalarExpr::constant(1.0))?;
    chart.set(1, 1, ScalarExpr::constant(1.0))?;
    chart.set(2, 2, ScalarExpr::constant(1.0))?;
    chart.set(0, 2, ScalarExpr::constant(2.0) * phi.clone())?;
    chart.add_domain_condition(DomainCondition::nonzero_derivative("phi''", phi, vec![1, 1]));
    Ok(chart)
}

/// Walker metric of signature (2,2).
pub fn build_walker(g33: ScalarExpr, g34: ScalarExpr, g44: ScalarExpr, params: Params) -> Result<MetricChart, FamilyError> {
    let mut chart = MetricChart::new(4).with_params(params);
    chart.set(0, 2, ScalarExpr::constant(1.0))?;
    chart.set(1, 3, ScalarExpr::constant(1.0))?;
    for (i, j, e) in [(2, 2, g33), (2, 3, g34), (3, 3, g44)] {
        if !e.is_zero() {
            chart.set(i, j, e)?;
        }
    }
    Ok(chart)
}

/// How a Walker chart with `g34 = x0·P + x1·Q + S` was classified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm14Classification {
    /// `∂P/∂x2 = ∂Q/∂x3` on the sample grid.
    pub closed: bool,
    /// Worst `|∂P/∂x2 − ∂Q/∂x3|` on the grid.
    pub closed_residual: f64,
    pub closed_tol: f64,
    /// Grid points at which both derivatives could be evaluated.
    pub grid_points: usize,
    /// Built by [`make_thm14_case2`], so `P, Q` are the rational pair.
    pub rational_case: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm14Chart {
    pub chart: MetricChart,
    pub p: ScalarExpr,
    pub q: ScalarExpr,
    pub s: ScalarExpr,
    pub classification: Thm14Classification,
}

/// Tolerance for the closedness test, relative to the derivative sizes.
pub const CLOSED_TOL: f64 = 1e-9;

fn closedness(p: &ScalarExpr, q: &ScalarExpr, params: &Params, grid: usize) -> (f64, f64, usize) {
    let mut worst = 0.0f64;
    let mut size = 0.0f64;
    let mut count = 0;
    let steps = grid.max(2);
    for a in 0..steps {
        for b in 0..steps {
            let u = -1.0 + 2.0 * a as f64 / (steps - 1) as f64 + 0.0137;
            let v = -1.0 + 2.0 * b as f64 / (steps - 1) as f64 - 0.0091;
            let pt = [0.0, 0.0, u, v];
            let (Ok(pj), Ok(qj)) = (eval_jet_order(p, &pt, params, 1), eval_jet_order(q, &pt, params, 1)) else {
                continue;
            };
            let (p3, q4) = (pj.d1(2), qj.d1(3));
            if !p3.is_finite() || !q4.is_finite() {
                continue;
            }
            worst = worst.max((p3 - q4).abs());
            size = size.max(p3.abs()).max(q4.abs());
            count += 1;
        }
    }
    (worst, size, count)
}

fn thm14_chart(p: ScalarExpr, q: ScalarExpr, s: ScalarExpr, params: Params, rational_case: bool) -> Result<Thm14Chart, FamilyError> {
    for (e, what) in [(&p, "P"), (&q, "Q"), (&s, "S")] {
        only_depends_on(e, |i| i == 2 || i == 3, what)?;
    }
    let g34 = ScalarExpr::coord(0) * p.clone() + ScalarExpr::coord(1) * q.clone() + s.clone();
    let chart = build_walker(ScalarExpr::zero(), g34, ScalarExpr::zero(), params.clone())?;
    let (worst, size, count) = closedness(&p, &q, &params, 9);
    let closed_tol = CLOSED_TOL * (size + 1.0);
    let classification = Thm14Classification {
        closed: count > 0 && worst <= closed_tol,
        closed_residual: worst,
        closed_tol,
        grid_points: count,
        rational_case,
    };
    Ok(Thm14Chart { chart, p, q, s, classification })
}

/// Walker chart with `g33 = g44 = 0` and `g34 = x0·P + x1·Q + S`, where
/// `P, Q, S` are functions of `x2, x3`.
pub fn build_thm14(p: ScalarExpr, q: ScalarExpr, s: ScalarExpr, params: Params) -> Result<Thm14Chart, FamilyError> {
    thm14_chart(p, q, s, params, false)
}

/// The rational pair `P = c/D`, `Q = b/D` with `D = a + b·x2 + c·x3`.
/// Points with `D = 0` are rejected.
pub fn make_thm14_case2(a: f64, b: f64, c: f64, s: ScalarExpr, params: Params) -> Result<Thm14Chart, FamilyError> {
    make_thm14_rational(a, b, c, 1.0, s, params)
}

/// `P = -2c/D`, `Q = -2b/D`: the rational pair for which the Ricci tensor
/// vanishes identically. The unscaled pair of [`make_thm14_case2`] gives a
/// nonzero nilpotent `ρ` whenever `(b, c) ≠ 0`.
pub fn make_thm14_ricci_flat(a: f64, b: f64, c: f64, s: ScalarExpr, params: Params) -> Result<Thm14Chart, FamilyError> {
    make_thm14_rational(a, b, c, -2.0, s, params)
}

/// `P = k·c/D`, `Q = k·b/D`.
pub fn make_thm14_rational(
    a: f64,
    b: f64,
    c: f64,
    k: f64,
    s: ScalarExpr,
    params: Params,
) -> Result<Thm14Chart, FamilyError> {
    if a == 0.0 && b == 0.0 && c == 0.0 {
        return Err(FamilyError::ZeroCoefficients);
    }
    let den = ScalarExpr::constant(a)
        + ScalarExpr::constant(b) * ScalarExpr::coord(2)
        + ScalarExpr::constant(c) * ScalarExpr::coord(3);
    let p = ScalarExpr::constant(k * c) / den.clone();
    let q = ScalarExpr::constant(k * b) / den.clone();
    let mut out = thm14_chart(p, q, s, params, true)?;
    out.chart.add_domain_condition(DomainCondition::nonzero("a+b*x2+c*x3", den).with_min_abs(1e-6));
    Ok(out)
}

/// Walker chart with `g33 = s·x0·x1`, `g34 = s(x1² − x0²)/2` and
/// `g44 = −s·x0·x1`. The parameter `s` is bound in the chart.
pub fn build_thm19(s: f64) -> Result<MetricChart, FamilyError> {
    use ScalarExpr as E;
    let sp = || E::param("s");
    let (x0, x1) = (|| E::coord(0), || E::coord(1));
    let g33 = sp() * x0() * x1();
    let g34 = sp() * (x1().powi(2) - x0().powi(2)) / E::constant(2.0);
    let g44 = -(sp() * x0() * x1());
    let mut params = Params::new();
    params.insert("s".into(), s);
    build_walker(g33, g34, g44, params)
}

/// `p ↦ L·p + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: SquareMatrix,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn identity(n: usize) -> Self {
        AffineMap { linear: SquareMatrix::identity(n), offset: vec![0.0; n] }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        self.linear.mul_vec(p).iter().zip(&self.offset).map(|(a, b)| a + b).collect()
    }
}

/// The map `(x,y,z,x̄) ↦ (e^{−b·a₂}x + a₁, y + a₂, z + a₃, e^{b·a₂}x̄ + a₄)`,
/// an isometry of the `φ = e^{by}` chart sending the origin to `a`.
pub fn thm13_isometry(b: f64, a: [f64; 4]) -> AffineMap {
    thm13_translation(b, a, 1.0)
}

/// Same translation with the scalings `e^{∓2b·a₂}`. The cross term then picks
/// up `e^{−b·a₂}`, so this is not an isometry unless `a₂ = 0`.
pub fn thm13_isometry_squared_scaling(b: f64, a: [f64; 4]) -> AffineMap {
    thm13_translation(b, a, 2.0)
}

fn thm13_translation(b: f64, a: [f64; 4], rate: f64) -> AffineMap {
    let f = (rate * b * a[1]).exp();
    AffineMap { linear: SquareMatrix::diagonal(&[1.0 / f, 1.0, 1.0, f]), offset: a.to_vec() }
}

/// `max_p ‖Lᵀ g(Tp) L − g(p)‖_max`; zero for an isometry.
pub fn pullback_residual(chart: &MetricChart, t: &AffineMap, points: &[Vec<f64>]) -> Result<f64, FamilyError> {
    let n = chart.dim();
    if t.linear.dim() != n || t.offset.len() != n {
        return Err(FamilyError::Shape(format!("affine map does not act on ℝ^{n}")));
    }
    invert(&t.linear, 1e-12)?;
    let l = &t.linear;
    let mut worst = 0.0f64;
    for p in points {
        let g_image = chart.metric_at(&t.apply(p))?;
        let pulled = &(&l.transpose() * &g_image) * l;
        worst = worst.max((&pulled - &chart.metric_at(p)?).max_abs());
    }
    Ok(worst)
}

/// Family configuration document, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Def11 {
        k: usize,
        #[serde(alias = "ell")]
        l: usize,
        c: Vec<Vec<f64>>,
        psi: Vec<Vec<String>>,
    },
    Thm13 {
        phi: String,
    },
    Walker {
        #[serde(default = "zero_string")]
        g33: String,
        #[serde(default = "zero_string")]
        g34: String,
        #[serde(default = "zero_string")]
        g44: String,
    },
    Thm14 {
        p: String,
        q: String,
        #[serde(default = "zero_string")]
        s: String,
    },
    Thm14case2 {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "zero_string")]
        s: String,
    },
    Thm19 {
        s: f64,
    },
}

fn zero_string() -> String {
    "0".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    #[serde(flatten)]
    pub spec: FamilySpec,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
}

/// A chart built from a config, with the classification for `thm14` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltFamily {
    pub name: &'static str,
    pub chart: MetricChart,
    pub thm14: Option<Thm14Classification>,
}

impl FamilyConfig {
    pub fn from_json(text: &str) -> Result<Self, FamilyError> {
        serde_json::from_str(text).map_err(|e| FamilyError::Config(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        match &self.spec {
            FamilySpec::Def11 { k, l, .. } => 2 * k + l,
            _ => 4,
        }
    }

    pub fn build(&self) -> Result<BuiltFamily, FamilyError> {
        let names: Vec<String> = self.params.keys().cloned().collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let dim = self.dim();
        let parse = |s: &str| parse_expr(s, dim, &names);
        let params = self.params.clone();
        let (name, chart, thm14) = match &self.spec {
            FamilySpec::Def11 { k, l, c, psi } => {
                let c = SquareMatrix::from_rows(c.clone())?;
                let psi = psi
                    .iter()
                    .map(|row| row.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                ("def11", build_def11(*k, *l, &c, &psi, params)?, None)
            }
            FamilySpec::Thm13 { phi } => ("thm13", build_thm13(parse(phi)?, params)?, None),
            FamilySpec::Walker { g33, g34, g44 } => {
                ("walker", build_walker(parse(g33)?, parse(g34)?, parse(g44)?, params)?, None)
            }
            FamilySpec::Thm14 { p, q, s } => {
                let t = build_thm14(parse(p)?, parse(q)?, parse(s)?, params)?;
                ("thm14", t.chart, Some(t.classification))
            }
            FamilySpec::Thm14case2 { a, b, c, s } => {
                let t = make_thm14_case2(*a, *b, *c, parse(s)?, params)?;
                ("thm14case2", t.chart, Some(t.classification))
            }
            FamilySpec::Thm19 { s } => ("thm19", build_thm19(*s)?, None),
        };
        Ok(BuiltFamily { name, chart, thm14 })
    }
}
