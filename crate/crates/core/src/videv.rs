//! Commutation checkers: Einstein, pseudo-Einstein, Jacobi–Videv,
//! skew–Videv, Jacobi–Tsankov, mixed–Tsankov and the tensor condition
//! `A(Tξ₁,ξ₂,ξ₃,ξ₄) = A(ξ₁,Tξ₂,ξ₃,ξ₄) = A(ξ₁,ξ₂,Tξ₃,ξ₄) = A(ξ₁,ξ₂,ξ₃,Tξ₄)`.
//!
//! Conditions quantified over all vectors are decided on polarized basis
//! pairs, which is exact because each operator is multilinear in its
//! arguments. Residuals are normalized by `max|entry of the compared
//! products| + 1`, so the verdict does not depend on the overall size of
//! the curvature.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::curvature::{curvature_at, CurvatureError, MetricChart};
use crate::expr::{eval_jet_order, ExprError, Params, ScalarExpr};
use crate::linalg::{SpectralProfile, SquareMatrix};
use crate::families::{build_thm13, FamilyError};
use crate::models::{Model, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// A residual at or below this passes.
    pub pass: f64,
    /// A residual at or above this fails; anything between is indeterminate.
    pub fail_floor: f64,
    /// Relative radius for grouping eigenvalues.
    pub eigen: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { pass: 1e-8, fail_floor: 1e-4, eigen: 1e-6 }
    }
}

impl Tolerances {
    pub fn with_pass(pass: f64) -> Self {
        Tolerances { pass, fail_floor: Tolerances::default().fail_floor.max(pass), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("{property}: residual {residual:e} lies between pass tolerance {pass:e} and fail floor {fail_floor:e}")]
    Indeterminate { property: String, residual: f64, pass: f64, fail_floor: f64 },
    #[error("operator is not self-adjoint (asymmetry {0:e})")]
    NotSelfAdjoint(f64),
    #[error("operator is {got}×{got}, model dimension is {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("second derivative of φ vanishes at y = {0}")]
    DegenerateProfile(f64),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Verdict of one property with its worst residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyEntry {
    pub verdict: bool,
    /// Scale-normalized residual.
    pub residual: f64,
    /// Normalizing scale; the raw residual is `residual * scale`.
    pub scale: f64,
    /// Basis indices at which the raw residual is largest.
    pub witness: Vec<usize>,
    pub tol: f64,
}

impl PropertyEntry {
    fn decide(
        property: &str,
        raw: f64,
        scale: f64,
        witness: Vec<usize>,
        tol: &Tolerances,
    ) -> Result<Self, CheckError> {
        let residual = raw / scale;
        if residual > tol.pass && residual < tol.fail_floor {
            return Err(CheckError::Indeterminate {
                property: property.to_string(),
                residual,
                pass: tol.pass,
                fail_floor: tol.fail_floor,
            });
        }
        Ok(PropertyEntry { verdict: residual <= tol.pass, residual, scale, witness, tol: tol.pass })
    }
}

pub type PropertyReport = BTreeMap<String, PropertyEntry>;

/// Worst commutator over a family of operator pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorResidual {
    pub raw: f64,
    pub scale: f64,
    pub witness: Vec<usize>,
}

impl CommutatorResidual {
    pub fn normalized(&self) -> f64 {
        self.raw / self.scale
    }
}

fn commutator_residual<'a>(
    pairs: impl Iterator<Item = (Vec<usize>, &'a SquareMatrix, &'a SquareMatrix)>,
) -> CommutatorResidual {
    let mut raw = 0.0f64;
    let mut big = 0.0f64;
    let mut witness = Vec::new();
    for (w, a, b) in pairs {
        let ab = a * b;
        let ba = b * a;
        big = big.max(ab.max_abs()).max(ba.max_abs());
        let r = (&ab - &ba).max_abs();
        if r > raw || witness.is_empty() {
            raw = r;
            witness = w;
        }
    }
    CommutatorResidual { raw, scale: big + 1.0, witness }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

fn strict_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `max_{i≤j} ‖[J(e_i,e_j), T]‖`.
pub fn jacobi_commutator(model: &Model, t: &SquareMatrix) -> CommutatorResidual {
    let ops: Vec<_> = pairs(model.dim()).into_iter().map(|(i, j)| ((i, j), model.jacobi(i, j))).collect();
    commutator_residual(ops.iter().map(|((i, j), m)| (vec![*i, *j], m, t)))
}

/// `max_{i<j} ‖[𝒜(e_i,e_j), T]‖`.
pub fn curvature_commutator(model: &Model, t: &SquareMatrix) -> CommutatorResidual {
    let ops: Vec<_> = strict_pairs(model.dim())
        .into_iter()
        .map(|(i, j)| ((i, j), model.curvature_operator(i, j)))
        .collect();
    commutator_residual(ops.iter().map(|((i, j), m)| (vec![*i, *j], m, t)))
}

/// `ρ = c·id` with `c = Tr ρ / m`.
pub fn check_einstein(rho: &SquareMatrix, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let m = rho.dim();
    let c = rho.trace() / m as f64;
    let dev = &SquareMatrix::identity(m).scale(c) - rho;
    let mut raw = 0.0;
    let mut witness = vec![0, 0];
    for i in 0..m {
        for j in 0..m {
            if dev[(i, j)].abs() > raw {
                raw = dev[(i, j)].abs();
                witness = vec![i, j];
            }
        }
    }
    PropertyEntry::decide("einstein", raw, c.abs() + 1.0, witness, tol)
}

/// Single real eigenvalue, or a single conjugate pair `a ± bi` with `b ≠ 0`.
///
/// The residual is the largest distance from an eigenvalue to the nearer of
/// the two candidate values, relative to `1 + max|λ|`.
pub fn check_pseudo_einstein(profile: &SpectralProfile, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let scale = 1.0 + profile.max_modulus();
    let values: Vec<_> = profile.eigenvalues.iter().map(|c| c.value()).collect();
    let tol = Tolerances { pass: tol.eigen, fail_floor: tol.fail_floor.max(10.0 * tol.eigen), ..*tol };
    // Candidate centre: the eigenvalue with the largest multiplicity, and
    // its conjugate.
    let centre = profile
        .eigenvalues
        .iter()
        .max_by(|a, b| a.multiplicity.cmp(&b.multiplicity))
        .map(|c| c.value())
        .unwrap_or_default();
    let mut raw = 0.0f64;
    let mut witness = Vec::new();
    for (k, v) in values.iter().enumerate() {
        let d = (v - centre).norm().min((v - centre.conj()).norm());
        if d > raw {
            raw = d;
            witness = vec![k];
        }
    }
    PropertyEntry::decide("pseudo_einstein", raw, scale, witness, &tol)
}

/// `J(x)ρ = ρJ(x)` for all `x`.
pub fn check_jacobi_videv(model: &Model, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let r = jacobi_commutator(model, &model.ricci_operator());
    PropertyEntry::decide("jacobi_videv", r.raw, r.scale, r.witness, tol)
}

/// `𝒜(x,y)ρ = ρ𝒜(x,y)` for all `x, y`.
pub fn check_skew_videv(model: &Model, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let r = curvature_commutator(model, &model.ricci_operator());
    PropertyEntry::decide("skew_videv", r.raw, r.scale, r.witness, tol)
}

/// Self-adjointness defect `‖gT − (gT)ᵀ‖ / (‖gT‖ + 1)`.
pub fn self_adjoint_defect(metric: &SquareMatrix, t: &SquareMatrix) -> f64 {
    let gt = metric * t;
    gt.asymmetry() / (gt.max_abs() + 1.0)
}

/// Worst deviation among `A(Te_a,·,·,·)`, `A(·,Te_b,·,·)`, `A(·,·,Te_c,·)`
/// and `A(·,·,·,Te_d)` over all basis 4-tuples.
pub fn condition_a(model: &Model, t: &SquareMatrix) -> Result<CommutatorResidual, CheckError> {
    let n = model.dim();
    if t.dim() != n {
        return Err(CheckError::Dimension { got: t.dim(), expected: n });
    }
    let defect = self_adjoint_defect(model.metric(), t);
    if defect > 1e-9 {
        return Err(CheckError::NotSelfAdjoint(defect));
    }
    // slot[s][(i,j,k,l)] = A with T applied in slot s: Σ_m T[m][x] A(.., e_m, ..)
    let a = |i: usize, j: usize, k: usize, l: usize| model.a(i, j, k, l);
    let mut raw = 0.0f64;
    let mut big = 0.0f64;
    let mut witness = vec![0, 0, 0, 0];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = [0.0; 4];
                    for m in 0..n {
                        v[0] += t[(m, i)] * a(m, j, k, l);
                        v[1] += t[(m, j)] * a(i, m, k, l);
                        v[2] += t[(m, k)] * a(i, j, m, l);
                        v[3] += t[(m, l)] * a(i, j, k, m);
                    }
                    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                    big = big.max(hi.abs()).max(lo.abs());
                    if hi - lo > raw {
                        raw = hi - lo;
                        witness = vec![i, j, k, l];
                    }
                }
            }
        }
    }
    Ok(CommutatorResidual { raw, scale: big + 1.0, witness })
}

/// Scale-normalized residual of [`condition_a`].
pub fn condition_a_residual(model: &Model, t: &SquareMatrix) -> Result<f64, CheckError> {
    condition_a(model, t).map(|r| r.normalized())
}

pub fn check_condition_a(model: &Model, t: &SquareMatrix, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let r = condition_a(model, t)?;
    PropertyEntry::decide("condition_a", r.raw, r.scale, r.witness, tol)
}

/// Jacobi commutator with an arbitrary operator, as a verdict.
pub fn check_jacobi_commutes(model: &Model, t: &SquareMatrix, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let r = jacobi_commutator(model, t);
    PropertyEntry::decide("jacobi_commutes", r.raw, r.scale, r.witness, tol)
}

pub fn check_curvature_commutes(model: &Model, t: &SquareMatrix, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let r = curvature_commutator(model, t);
    PropertyEntry::decide("curvature_commutes", r.raw, r.scale, r.witness, tol)
}

/// `J(ξ₁)J(ξ₂) = J(ξ₂)J(ξ₁)` for all `ξ₁, ξ₂`.
pub fn check_jacobi_tsankov(model: &Model, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let ops: Vec<_> = pairs(model.dim()).into_iter().map(|(i, j)| ((i, j), model.jacobi(i, j))).collect();
    let mut items = Vec::new();
    for (a, ((i, j), ma)) in ops.iter().enumerate() {
        for ((k, l), mb) in &ops[a + 1..] {
            items.push((vec![*i, *j, *k, *l], ma, mb));
        }
    }
    let r = commutator_residual(items.into_iter());
    PropertyEntry::decide("jacobi_tsankov", r.raw, r.scale, r.witness, tol)
}

/// `J(ξ₁)𝒜(ξ₂,ξ₃) = 𝒜(ξ₂,ξ₃)J(ξ₁)` for all `ξ₁, ξ₂, ξ₃`.
pub fn check_mixed_tsankov(model: &Model, tol: &Tolerances) -> Result<PropertyEntry, CheckError> {
    let n = model.dim();
    let jac: Vec<_> = pairs(n).into_iter().map(|(i, j)| ((i, j), model.jacobi(i, j))).collect();
    let cur: Vec<_> = strict_pairs(n)
        .into_iter()
        .map(|(k, l)| ((k, l), model.curvature_operator(k, l)))
        .collect();
    let items = jac.iter().flat_map(|((i, j), ma)| {
        cur.iter().map(move |((k, l), mb)| (vec![*i, *j, *k, *l], ma, mb))
    });
    let r = commutator_residual(items);
    PropertyEntry::decide("mixed_tsankov", r.raw, r.scale, r.witness, tol)
}

/// The six pointwise properties of a model.
pub fn property_report(model: &Model, profile: &SpectralProfile, tol: &Tolerances) -> Result<PropertyReport, CheckError> {
    let rho = model.ricci_operator();
    let mut out = PropertyReport::new();
    out.insert("einstein".into(), check_einstein(&rho, tol)?);
    out.insert("pseudo_einstein".into(), check_pseudo_einstein(profile, tol)?);
    out.insert("jacobi_videv".into(), check_jacobi_videv(model, tol)?);
    out.insert("skew_videv".into(), check_skew_videv(model, tol)?);
    out.insert("jacobi_tsankov".into(), check_jacobi_tsankov(model, tol)?);
    out.insert("mixed_tsankov".into(), check_mixed_tsankov(model, tol)?);
    Ok(out)
}

/// Basis `{X, Y, Z, X̄}` of the four-dimensional family with
/// `g(∂x,∂z) = 2φ(y)`, normalized so that `g(X,X̄) = g(Y,Y) = g(Z,Z) = 1`,
/// `R(X,Y,Y,Z) = −1` and the remaining listed curvature entries vanish.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizedBasis {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub z: [f64; 4],
    pub x_bar: [f64; 4],
    pub epsilon1: f64,
    pub delta1: f64,
    /// `R(X,Z,Z,X)`.
    pub alpha: f64,
    /// Worst deviation among the nine normalization relations.
    pub relation_residual: f64,
}

/// `(φ, φ′, φ″)` at `y`.
fn profile_derivatives(phi: &ScalarExpr, params: &Params, y: f64) -> Result<(f64, f64, f64), CheckError> {
    let jet = eval_jet_order(phi, &[y], params, 2)?;
    Ok((jet.value(), jet.d1(0), jet.d2(0, 0)))
}

/// Rewrite `φ` from the chart variable `x1` to a one-variable expression.
fn profile_in_y(phi: &ScalarExpr) -> ScalarExpr {
    fn go(e: &ScalarExpr) -> ScalarExpr {
        use ScalarExpr as E;
        match e {
            E::Coord(_) => E::Coord(0),
            E::Const(_) | E::Param(_) => e.clone(),
            E::Add(a, b) => E::Add(Box::new(go(a)), Box::new(go(b))),
            E::Sub(a, b) => E::Sub(Box::new(go(a)), Box::new(go(b))),
            E::Mul(a, b) => E::Mul(Box::new(go(a)), Box::new(go(b))),
            E::Div(a, b) => E::Div(Box::new(go(a)), Box::new(go(b))),
            E::Neg(a) => E::Neg(Box::new(go(a))),
            E::Pow(a, n) => E::Pow(Box::new(go(a)), *n),
            E::Exp(a) => E::Exp(Box::new(go(a))),
            E::Sin(a) => E::Sin(Box::new(go(a))),
            E::Cos(a) => E::Cos(Box::new(go(a))),
        }
    }
    go(phi)
}

/// `α_φ = φ′φ′/φ″²` at `y`. `φ` is written in the chart variable `x1`.
pub fn alpha_invariant(phi: &ScalarExpr, params: &Params, y: f64) -> Result<f64, CheckError> {
    let (_, d1, d2) = profile_derivatives(&profile_in_y(phi), params, y)?;
    if d2 == 0.0 {
        return Err(CheckError::DegenerateProfile(y));
    }
    Ok(d1 * d1 / (d2 * d2))
}

/// Normalized basis at `p = (x, y, z, x̄)`, with every relation checked
/// against the curvature engine.
pub fn normalized_basis_thm13(phi: &ScalarExpr, params: &Params, p: &[f64]) -> Result<NormalizedBasis, CheckError> {
    let y = p[1];
    let (f, d1, d2) = profile_derivatives(&profile_in_y(phi), params, y)?;
    if d2 == 0.0 {
        return Err(CheckError::DegenerateProfile(y));
    }
    let eps = 1.0 / d2;
    let delta = 0.5 * d1 * d1 / d2;
    let x = [eps, 0.0, eps * delta, -0.5 * eps * (delta * delta + 4.0 * f * delta)];
    let yv = [0.0, 1.0, 0.0, 0.0];
    let z = [0.0, 0.0, 1.0, -(delta + 2.0 * f)];
    let x_bar = [0.0, 0.0, 0.0, 1.0 / eps];

    let chart = build_thm13(phi.clone(), params.clone())?;
    let cd = curvature_at(&chart, p)?;
    let g = &cd.g;
    let r = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| cd.r_vec(a, b, c, d);
    let checks = [
        g.form(&x, &x_bar) - 1.0,
        g.form(&yv, &yv) - 1.0,
        g.form(&z, &z) - 1.0,
        r(&x, &yv, &yv, &x),
        r(&yv, &z, &z, &yv),
        r(&yv, &x, &x, &z),
        r(&x, &yv, &yv, &z) + 1.0,
        r(&x, &z, &z, &yv),
    ];
    let relation_residual = checks.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(NormalizedBasis {
        alpha: r(&x, &z, &z, &x),
        x,
        y: yv,
        z,
        x_bar,
        epsilon1: eps,
        delta1: delta,
        relation_residual,
    })
}

/// Spread of `α` over a set of `y` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaConstancy {
    pub values: Vec<f64>,
    pub spread: f64,
    pub mean: f64,
    pub tol: f64,
    pub constant: bool,
}

/// `α` is constant on the grid when `max − min ≤ tol·(|mean| + 1)`.
pub fn alpha_constancy(phi: &ScalarExpr, params: &Params, ys: &[f64], tol: f64) -> Result<AlphaConstancy, CheckError> {
    let values = ys.iter().map(|&y| alpha_invariant(phi, params, y)).collect::<Result<Vec<_>, _>>()?;
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    let spread = hi - lo;
    Ok(AlphaConstancy { constant: spread <= tol * (mean.abs() + 1.0), values, spread, mean, tol })
}

/// Point-wise model of a chart, for the checkers.
pub fn chart_model(chart: &MetricChart, p: &[f64]) -> Result<Model, CheckError> {
    let cd = curvature_at(chart, p)?;
    Ok(Model::new(cd.g.clone(), cd.riemann.clone())?)
}
