//! Reproduction suite: one criterion per claim, each a list of checks.
//!
//! Every criterion records the checks it ran with the observed values, so a
//! failing line says which number was off and by how much.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{
    curvature_at_with, invariant_checks, jacobi_op, jacobi_polarized, CurvatureData, CurvatureOptions, MetricChart,
};
use crate::expr::{eval_jet_order, parse_expr, Params, ScalarExpr};
use crate::families::{
    build_def11, build_thm13, build_thm14, build_thm19, make_thm14_case2, pullback_residual, thm13_isometry,
    thm13_isometry_squared_scaling, Thm14Chart,
};
use crate::linalg::{invert, signature, spectral_profile, SquareMatrix};
use crate::models::{canonical_model, double_model, einstein_constant, model_from_curvature, random_model, validate, Model};
use crate::oracle::{connection_discrepancy, FD_STEP};
use crate::sampling::{halton_points, sample_points};
use crate::videv::{
    alpha_constancy, alpha_invariant, check_condition_a, check_curvature_commutes, check_einstein,
    check_jacobi_commutes, check_jacobi_tsankov, check_jacobi_videv, check_mixed_tsankov, check_pseudo_einstein,
    check_skew_videv, condition_a_residual, normalized_basis_thm13, CheckError, PropertyEntry, Tolerances,
};

/// Number of sample points per chart.
pub const POINTS_PER_CHART: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub tol: Tolerances,
    pub seed: u64,
    /// Rank threshold for spectral profiles.
    pub rank_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { tol: Tolerances::default(), seed: 20070101, rank_tol: crate::linalg::DEFAULT_RANK_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

impl CriterionResult {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `PASS  2 thm13  title  (n/m checks, t s)` plus the first failure.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut line = format!(
            "{} {:>2} {:<9} {} ({}/{} checks, {:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.title,
            ok,
            self.checks.len(),
            self.seconds
        );
        if let Some(c) = self.failed_checks().next() {
            line.push_str(&format!(" first failure: {}: {}", c.name, c.detail));
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    pub seconds: f64,
}

/// Criterion ids, filter keys and titles.
pub const CRITERIA: [(u8, &str, &str); 7] = [
    (1, "thm12", "split metrics with nilpotent Ricci"),
    (2, "thm13", "nilpotent non-Videv family"),
    (3, "thm14", "Walker metrics g34 = x0 P + x1 Q + S"),
    (4, "thm15-16", "equivalence of commutation conditions"),
    (5, "thm18", "doubling of Einstein models"),
    (6, "thm19", "locally symmetric Walker metric"),
    (7, "engine", "engine identities and oracle"),
];

#[derive(Default)]
struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    /// `value ≤ bound`.
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.check(name, value <= bound, format!("{value:.3e} (bound {bound:.1e})"));
    }

    fn error(&mut self, name: impl Into<String>, e: impl std::fmt::Display) {
        self.check(name, false, format!("error: {e}"));
    }

    fn entry(&mut self, name: impl Into<String>, r: Result<PropertyEntry, CheckError>, expect: bool) {
        match r {
            Ok(e) => self.check(
                name,
                e.verdict == expect,
                format!("verdict {} residual {:.3e} witness {:?}", e.verdict, e.residual, e.witness),
            ),
            Err(e) => self.error(name, e),
        }
    }
}

fn e(text: &str, dim: usize) -> ScalarExpr {
    parse_expr(text, dim, &[]).expect("built-in expression parses")
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn curvature(chart: &MetricChart, p: &[f64]) -> Result<CurvatureData, String> {
    curvature_at_with(chart, p, CurvatureOptions { nabla_r: true }).map_err(|e| e.to_string())
}

/// A split-metric instance: `k`, `ℓ`, `C` and `ψ` as strings in chart variables.
pub struct Def11Instance {
    pub label: &'static str,
    pub k: usize,
    pub l: usize,
    pub c: SquareMatrix,
    pub psi: Vec<Vec<&'static str>>,
}

pub fn def11_instances() -> Vec<Def11Instance> {
    let m = |rows: Vec<Vec<f64>>| SquareMatrix::from_rows(rows).expect("square");
    vec![
        Def11Instance { label: "k1l1-square", k: 1, l: 1, c: m(vec![vec![1.0]]), psi: vec![vec!["x1^2"]] },
        Def11Instance {
            label: "k1l2-neutral-harmonic",
            k: 1,
            l: 2,
            c: SquareMatrix::diagonal(&[1.0, -1.0]),
            psi: vec![vec!["x1^2 + x2^2"]],
        },
        Def11Instance {
            label: "k1l2-trig-harmonic",
            k: 1,
            l: 2,
            c: SquareMatrix::identity(2),
            psi: vec![vec!["exp(x1)*cos(x2)"]],
        },
        Def11Instance {
            label: "k2l1-trig",
            k: 2,
            l: 1,
            c: m(vec![vec![-1.0]]),
            psi: vec![vec!["sin(x2)", "x2^2"], vec!["x2^2", "cos(x2)"]],
        },
        Def11Instance {
            label: "k2l2-hyperbolic",
            k: 2,
            l: 2,
            c: m(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            psi: vec![vec!["x2*x3", "x2^2"], vec!["x2^2", "sin(x3)"]],
        },
    ]
}

impl Def11Instance {
    pub fn dim(&self) -> usize {
        2 * self.k + self.l
    }

    pub fn psi_exprs(&self) -> Vec<Vec<ScalarExpr>> {
        self.psi.iter().map(|row| row.iter().map(|s| e(s, self.dim())).collect()).collect()
    }

    pub fn chart(&self) -> MetricChart {
        build_def11(self.k, self.l, &self.c, &self.psi_exprs(), Params::new()).expect("valid instance")
    }

    /// `max_ij |Σ_ab C^{ab} ∂_a∂_b ψ_ij|` at `p`.
    pub fn harmonicity_residual(&self, p: &[f64]) -> f64 {
        let c_inv = invert(&self.c, 1e-12).expect("nondegenerate");
        let mut worst = 0.0f64;
        for row in self.psi_exprs() {
            for psi in row {
                let j = eval_jet_order(&psi, p, &Params::new(), 2).expect("ψ evaluates");
                let mut h = 0.0;
                for a in 0..self.l {
                    for b in 0..self.l {
                        h += c_inv[(a, b)] * j.d2(self.k + a, self.k + b);
                    }
                }
                worst = worst.max(h.abs());
            }
        }
        worst
    }
}

/// Profiles `φ` for the four-dimensional nilpotent family, written in `x1`.
pub const THM13_PROFILES: [&str; 4] = ["exp(x1)", "exp(2*x1)", "x1^2", "x1^3 + x1^2"];

/// Sampling box for the family: `y` kept in `[0.1, 1.5]` so `y³ + y²` has
/// `φ″ = 6y + 2` bounded away from zero.
pub const THM13_BOX: [(f64, f64); 4] = [(-1.0, 1.0), (0.1, 1.5), (-1.0, 1.0), (-1.0, 1.0)];

pub struct Thm14Instance {
    pub label: &'static str,
    pub built: Thm14Chart,
}

/// Closed pairs, the non-closed pair and rational-case charts.
pub fn thm14_instances() -> (Vec<Thm14Instance>, Thm14Instance, Vec<Thm14Instance>) {
    let mk = |label, p: &str, q: &str, s: &str| Thm14Instance {
        label,
        built: build_thm14(e(p, 4), e(q, 4), e(s, 4), Params::new()).expect("valid Walker data"),
    };
    let closed = vec![
        mk("P=x2,Q=x3", "x2", "x3", "0"),
        mk("P=Q=0,S=x2*x3^2", "0", "0", "x2*x3^2"),
        mk("P=x2^2,Q=2x2x3,S=sin(x3)", "x2^2", "2*x2*x3", "sin(x3)"),
    ];
    let open = mk("P=Q=x2", "x2", "x2", "0");
    let rational = RATIONAL_COEFFS
        .into_iter()
        .map(|(a, b, c, s)| Thm14Instance {
            label: "rational P=c/D,Q=b/D",
            built: make_thm14_case2(a, b, c, e(s, 4), Params::new()).expect("nonzero coefficients"),
        })
        .collect();
    (closed, open, rational)
}

/// `(a, b, c, S)` for the rational charts.
pub const RATIONAL_COEFFS: [(f64, f64, f64, &str); 3] = [(1.0, 0.0, 1.0, "0"), (1.0, 1.0, 1.0, "0"), (2.0, 1.0, -1.0, "x2*x3")];

/// Walker sampling box: `[-1, 1]⁴`, away from the rational singular loci
/// only by rejection.
pub const WALKER_BOX: [(f64, f64); 4] = [(-1.0, 1.0); 4];

pub const THM19_VALUES: [f64; 3] = [1.0, 2.0, -3.0];

/// A chart with its sample points.
pub struct CorpusChart {
    pub label: String,
    pub chart: MetricChart,
    pub points: Vec<Vec<f64>>,
}

/// Every chart of the suite, each with [`POINTS_PER_CHART`] admitted points.
pub fn chart_corpus(seed: u64) -> Result<Vec<CorpusChart>, String> {
    let mut out = Vec::new();
    let mut push = |label: String, chart: MetricChart, bounds: &[(f64, f64)], salt: u64| -> Result<(), String> {
        let points = sample_points(&chart, bounds, POINTS_PER_CHART, seed ^ salt).map_err(|e| format!("{label}: {e}"))?;
        out.push(CorpusChart { label, chart, points });
        Ok(())
    };
    for (i, inst) in def11_instances().into_iter().enumerate() {
        let bounds = vec![(-1.0, 1.0); inst.dim()];
        push(format!("def11/{}", inst.label), inst.chart(), &bounds, 100 + i as u64)?;
    }
    for (i, phi) in THM13_PROFILES.iter().enumerate() {
        let chart = build_thm13(e(phi, 4), Params::new()).map_err(|e| e.to_string())?;
        push(format!("thm13/{phi}"), chart, &THM13_BOX, 200 + i as u64)?;
    }
    let (closed, open, rational) = thm14_instances();
    for (i, inst) in closed.into_iter().chain(std::iter::once(open)).chain(rational).enumerate() {
        push(format!("thm14/{}", inst.label), inst.built.chart, &WALKER_BOX, 300 + i as u64)?;
    }
    for (i, s) in THM19_VALUES.iter().enumerate() {
        let chart = build_thm19(*s).map_err(|e| e.to_string())?;
        push(format!("thm19/s={s}"), chart, &WALKER_BOX, 400 + i as u64)?;
    }
    Ok(out)
}

fn run_criterion(id: u8, body: impl FnOnce(&mut Recorder)) -> CriterionResult {
    let (_, key, title) = CRITERIA[(id - 1) as usize];
    let start = Instant::now();
    let mut rec = Recorder::default();
    body(&mut rec);
    let passed = !rec.checks.is_empty() && rec.checks.iter().all(|c| c.passed);
    CriterionResult { id, key, title, passed, seconds: start.elapsed().as_secs_f64(), checks: rec.checks }
}

/// Split metrics: ρ annihilates every polarized Jacobi operator on both sides. Einstein exactly when ψ is harmonic.
pub fn criterion_thm12(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(1, |rec| {
        let start = Instant::now();
        for (i, inst) in def11_instances().into_iter().enumerate() {
            let chart = inst.chart();
            let bounds = vec![(-1.0, 1.0); inst.dim()];
            let points = match sample_points(&chart, &bounds, POINTS_PER_CHART, cfg.seed ^ (100 + i as u64)) {
                Ok(p) => p,
                Err(err) => return rec.error(inst.label, err),
            };
            let (mut products, mut square, mut einstein_ok) = (0.0f64, 0.0f64, true);
            let mut detail = String::new();
            for p in &points {
                let cd = match curvature(&chart, p) {
                    Ok(cd) => cd,
                    Err(err) => return rec.error(inst.label, err),
                };
                let scale = cd.scale();
                let m = cd.dim;
                for a in 0..m {
                    for b in a..m {
                        let j = jacobi_polarized(&cd, a, b);
                        products = products
                            .max((&cd.ricci_op * &j).max_abs() / scale)
                            .max((&j * &cd.ricci_op).max_abs() / scale);
                    }
                }
                square = square.max((&cd.ricci_op * &cd.ricci_op).max_abs() / (scale * scale));
                let harmonic = inst.harmonicity_residual(p) <= 1e-10;
                match check_einstein(&cd.ricci_op, &cfg.tol) {
                    Ok(entry) if entry.verdict == harmonic => {}
                    Ok(entry) => {
                        einstein_ok = false;
                        detail = format!("einstein {} but harmonic {} at {:?}", entry.verdict, harmonic, p);
                    }
                    Err(err) => {
                        einstein_ok = false;
                        detail = err.to_string();
                    }
                }
            }
            rec.at_most(format!("{}: max |ρJ|, |Jρ| / scale", inst.label), products, 1e-10);
            rec.at_most(format!("{}: |ρ²| / scale²", inst.label), square, 1e-10);
            rec.check(
                format!("{}: Einstein iff C^ab ∂a∂b ψ = 0", inst.label),
                einstein_ok,
                if einstein_ok { format!("{} points agree", points.len()) } else { detail },
            );
        }
        rec.at_most("runtime (s)", start.elapsed().as_secs_f64(), 5.0);
    })
}

/// Ranks of `ρ^k`, the non-Videv witness, `α` and the translation isometry.
pub fn criterion_thm13(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(2, |rec| {
        let params = Params::new();
        for (i, phi_text) in THM13_PROFILES.iter().enumerate() {
            let phi = e(phi_text, 4);
            let chart = match build_thm13(phi.clone(), params.clone()) {
                Ok(c) => c,
                Err(err) => return rec.error(*phi_text, err),
            };
            let points = match sample_points(&chart, &THM13_BOX, POINTS_PER_CHART, cfg.seed ^ (200 + i as u64)) {
                Ok(p) => p,
                Err(err) => return rec.error(*phi_text, err),
            };
            let mut observed_ranks = std::collections::BTreeSet::new();
            let (mut ranks_ok, mut gap_err, mut jv_ok, mut alpha_err) = (true, 0.0f64, true, 0.0f64);
            let mut jv_detail = String::new();
            for p in &points {
                let cd = match curvature(&chart, p) {
                    Ok(cd) => cd,
                    Err(err) => return rec.error(*phi_text, err),
                };
                let prof = spectral_profile(&cd.ricci_op, cfg.rank_tol);
                let ranks = prof.ranks[1..=4].to_vec();
                ranks_ok &= ranks == [3, 2, 1, 0];
                observed_ranks.insert(ranks);

                let jet = eval_jet_order(&phi, p, &params, 2).expect("φ evaluates");
                let d2 = jet.d2(1, 1);
                let j = jacobi_polarized(&cd, 0, 1);
                let lhs = (&cd.ricci_op * &j).column(1);
                let rhs = j.mul_vec(&cd.ricci_op.column(1));
                let mut expected = vec![0.0; 4];
                expected[3] = -0.5 * d2 * d2;
                let dev = lhs.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
                    + max_abs(&rhs);
                gap_err = gap_err.max(dev / (0.5 * d2 * d2 + 1.0));

                match model_from_curvature(&cd).map_err(CheckError::from).and_then(|m| check_jacobi_videv(&m, &cfg.tol)) {
                    Ok(entry) if !entry.verdict => {}
                    Ok(entry) => {
                        jv_ok = false;
                        jv_detail = format!("passes at {p:?} with residual {:.3e}", entry.residual);
                    }
                    Err(err) => {
                        jv_ok = false;
                        jv_detail = err.to_string();
                    }
                }

                match (normalized_basis_thm13(&phi, &params, p), alpha_invariant(&phi, &params, p[1])) {
                    (Ok(nb), Ok(alpha)) => {
                        alpha_err = alpha_err.max((nb.alpha - alpha).abs() / alpha.abs().max(1e-300));
                        alpha_err = alpha_err.max(nb.relation_residual);
                    }
                    (Err(err), _) | (_, Err(err)) => return rec.error(*phi_text, err),
                }
            }
            rec.check(
                format!("{phi_text}: ranks of ρ, ρ², ρ³, ρ⁴ = (3,2,1,0)"),
                ranks_ok,
                format!("observed {:?}", observed_ranks),
            );
            rec.at_most(format!("{phi_text}: ρJ(∂x,∂y)∂y + ½φ″²∂x̄ and J(∂x,∂y)ρ∂y (relative)"), gap_err, 1e-9);
            rec.check(
                format!("{phi_text}: Jacobi–Videv fails"),
                jv_ok,
                if jv_ok { format!("fails at all {} points", points.len()) } else { jv_detail },
            );
            rec.at_most(format!("{phi_text}: normalized-basis α vs φ′²/φ″² (relative)"), alpha_err, 1e-9);
        }

        let ys: Vec<f64> = (0..10).map(|i| -2.0 + 0.5 * i as f64).collect();
        for b in [1.0, 2.0, 0.5] {
            let phi = (ScalarExpr::constant(b) * ScalarExpr::coord(1)).exp();
            match alpha_constancy(&phi, &params, &ys, 1e-9) {
                Ok(c) => {
                    let err = (c.mean - 1.0 / (b * b)).abs() / (1.0 / (b * b));
                    rec.check(
                        format!("φ = e^({b}y): α constant and equal to 1/b²"),
                        c.constant && err <= 1e-9,
                        format!("mean {:.12} spread {:.3e}", c.mean, c.spread),
                    );
                }
                Err(err) => rec.error(format!("φ = e^({b}y) constancy"), err),
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x13);
        let chart = build_thm13(e("exp(x1)", 4), params.clone()).expect("valid chart");
        let pts = halton_points(&[(-1.0, 1.0); 4], 5, cfg.seed ^ 0x14);
        let shifts: Vec<[f64; 4]> = (0..5).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let (mut stated, mut corrected) = (0.0f64, 0.0f64);
        for a in &shifts {
            stated = stated.max(pullback_residual(&chart, &thm13_isometry_squared_scaling(1.0, *a), &pts).unwrap_or(f64::INFINITY));
            corrected = corrected.max(pullback_residual(&chart, &thm13_isometry(1.0, *a), &pts).unwrap_or(f64::INFINITY));
        }
        rec.at_most("translation with scalings e^(∓2a₂): pullback residual", stated, 1e-10);
        rec.at_most("translation with scalings e^(∓a₂): pullback residual", corrected, 1e-10);
        let origin = vec![vec![0.0; 4]];
        let transitive = shifts.iter().all(|a| {
            let image = thm13_isometry(1.0, *a).apply(&origin[0]);
            image.iter().zip(a).all(|(x, y)| (x - y).abs() <= 1e-15)
        });
        rec.check("isometries move the origin to every sampled point", transitive, "T(0) = a".to_string());
    })
}

/// Walker charts with `g34 = x0·P + x1·Q + S`.
pub fn criterion_thm14(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(3, |rec| {
        let (closed, open, rational) = thm14_instances();
        let models_at = |inst: &Thm14Instance, salt: u64| -> Result<Vec<(Vec<f64>, Model)>, String> {
            let pts = sample_points(&inst.built.chart, &WALKER_BOX, POINTS_PER_CHART, cfg.seed ^ salt)
                .map_err(|e| e.to_string())?;
            pts.into_iter()
                .map(|p| {
                    let cd = curvature(&inst.built.chart, &p)?;
                    let m = model_from_curvature(&cd).map_err(|e| e.to_string())?;
                    Ok((p, m))
                })
                .collect()
        };
        let mut nilpotent_nonzero = false;
        for (i, inst) in closed.iter().enumerate() {
            rec.check(
                format!("{}: closed 1-form", inst.label),
                inst.built.classification.closed,
                format!("residual {:.3e}", inst.built.classification.closed_residual),
            );
            let models = match models_at(inst, 300 + i as u64) {
                Ok(m) => m,
                Err(err) => return rec.error(inst.label, err),
            };
            let mut worst: Result<f64, String> = Ok(0.0);
            for (p, m) in &models {
                match check_jacobi_videv(m, &cfg.tol) {
                    Ok(entry) if entry.verdict => {
                        worst = worst.map(|w| w.max(entry.residual));
                    }
                    Ok(entry) => worst = Err(format!("fails at {p:?}: residual {:.3e}", entry.residual)),
                    Err(err) => worst = Err(err.to_string()),
                }
                let rho = m.ricci_operator();
                let prof = spectral_profile(&rho, cfg.rank_tol);
                if prof.is_nilpotent() && rho.max_abs() > 1e-6 && !inst.built.classification.rational_case {
                    nilpotent_nonzero = true;
                }
            }
            match worst {
                Ok(w) => rec.check(format!("{}: Jacobi–Videv at all points", inst.label), true, format!("max residual {w:.3e}")),
                Err(d) => rec.check(format!("{}: Jacobi–Videv at all points", inst.label), false, d),
            }
        }
        rec.check(
            "closed, non-rational example: ρ nilpotent and nonzero somewhere",
            nilpotent_nonzero,
            if nilpotent_nonzero { "found".to_string() } else { "ρ vanished or was not nilpotent".to_string() },
        );

        rec.check(
            format!("{}: not closed", open.label),
            !open.built.classification.closed,
            format!("residual {:.3e}", open.built.classification.closed_residual),
        );
        match models_at(&open, 310) {
            Ok(models) => {
                let mut least = f64::INFINITY;
                let mut detail = String::new();
                for (p, m) in &models {
                    match check_jacobi_videv(m, &cfg.tol) {
                        Ok(entry) => {
                            if entry.verdict {
                                detail = format!("passes at {p:?}");
                            }
                            least = least.min(entry.residual);
                        }
                        Err(err) => detail = err.to_string(),
                    }
                }
                rec.check(
                    format!("{}: Jacobi–Videv fails with residual ≥ 1e-4", open.label),
                    detail.is_empty() && least >= 1e-4,
                    if detail.is_empty() { format!("least residual {least:.3e}") } else { detail },
                );
            }
            Err(err) => rec.error(open.label, err),
        }

        for (i, inst) in rational.iter().enumerate() {
            let name = format!("rational case #{} {:?}", i + 1, RATIONAL_COEFFS[i]);
            let models = match models_at(inst, 320 + i as u64) {
                Ok(m) => m,
                Err(err) => return rec.error(name, err),
            };
            for (what, einstein) in [("Einstein", true), ("Jacobi–Videv", false)] {
                let mut failure = None;
                for (p, m) in &models {
                    let r = if einstein { check_einstein(&m.ricci_operator(), &cfg.tol) } else { check_jacobi_videv(m, &cfg.tol) };
                    match r {
                        Ok(entry) if entry.verdict => {}
                        Ok(entry) => {
                            failure.get_or_insert(format!("fails at {p:?}: residual {:.3e}", entry.residual));
                        }
                        Err(err) => {
                            failure.get_or_insert(err.to_string());
                        }
                    }
                }
                rec.check(
                    format!("{name}: {what} at all points"),
                    failure.is_none(),
                    failure.unwrap_or_else(|| format!("{} points", models.len())),
                );
            }
        }
    })
}

/// Random self-adjoint operator `g⁻¹S` with `S` symmetric.
fn random_self_adjoint(rng: &mut ChaCha8Rng, metric: &SquareMatrix) -> SquareMatrix {
    let n = metric.dim();
    let mut s = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..=1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    &invert(metric, 1e-12).expect("nondegenerate") * &s
}

/// Models for the equivalence sweep: chart models, doubled and random models.
pub fn model_corpus(cfg: &SuiteConfig) -> Result<Vec<(String, Model)>, String> {
    let mut out = Vec::new();
    for c in chart_corpus(cfg.seed)? {
        for (k, p) in c.points.iter().enumerate() {
            let cd = curvature(&c.chart, p)?;
            out.push((format!("{}#{k}", c.label), model_from_curvature(&cd).map_err(|e| e.to_string())?));
        }
    }
    for (n, c) in doubling_inputs() {
        let m0 = canonical_model(&SquareMatrix::identity(n), c).map_err(|e| e.to_string())?;
        out.push((format!("double/n={n},c={c}"), double_model(&m0).map_err(|e| e.to_string())?));
    }
    for k in 0..100u64 {
        let n = 3 + (k % 3) as usize;
        let neg = (k % (n as u64 + 1)) as usize;
        let m = random_model(cfg.seed.wrapping_add(k), n, neg).map_err(|e| e.to_string())?;
        out.push((format!("random/{k}"), m));
    }
    Ok(out)
}

fn doubling_inputs() -> Vec<(usize, f64)> {
    [2, 3, 4].into_iter().flat_map(|n| [1.0, 2.0, -1.0].into_iter().map(move |c| (n, c))).collect()
}

/// Condition (1) ⇔ skew–Videv ⇔ Jacobi–Videv, and Jacobi–Tsankov ⇔ mixed–Tsankov.
pub fn criterion_equivalences(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(4, |rec| {
        let models = match model_corpus(cfg) {
            Ok(m) => m,
            Err(err) => return rec.error("corpus", err),
        };
        let verdict = |r: Result<PropertyEntry, CheckError>| r.map(|e| e.verdict);
        let (mut videv_agree, mut tsankov_agree, mut indeterminate) = (0usize, 0usize, Vec::new());
        let mut disagreements = Vec::new();
        let (mut videv_true, mut tsankov_true) = (0usize, 0usize);
        for (label, m) in &models {
            let rho = m.ricci_operator();
            let triple = (
                verdict(check_condition_a(m, &rho, &cfg.tol)),
                verdict(check_skew_videv(m, &cfg.tol)),
                verdict(check_jacobi_videv(m, &cfg.tol)),
            );
            match triple {
                (Ok(a), Ok(b), Ok(c)) if a == b && b == c => {
                    videv_agree += 1;
                    videv_true += a as usize;
                }
                (Ok(a), Ok(b), Ok(c)) => disagreements.push(format!("{label}: ({a},{b},{c})")),
                (a, b, c) => indeterminate.push(format!("{label}: {:?}", [a.err(), b.err(), c.err()])),
            }
            match (verdict(check_jacobi_tsankov(m, &cfg.tol)), verdict(check_mixed_tsankov(m, &cfg.tol))) {
                (Ok(a), Ok(b)) if a == b => {
                    tsankov_agree += 1;
                    tsankov_true += a as usize;
                }
                (Ok(a), Ok(b)) => disagreements.push(format!("{label}: tsankov ({a},{b})")),
                (a, b) => indeterminate.push(format!("{label}: {:?}", [a.err(), b.err()])),
            }
        }
        let n = models.len();
        rec.check(
            "condition (1) with T = ρ, skew–Videv, Jacobi–Videv agree",
            videv_agree == n,
            format!("{videv_agree}/{n} agree ({videv_true} all true)"),
        );
        rec.check(
            "Jacobi–Tsankov and mixed–Tsankov agree",
            tsankov_agree == n,
            format!("{tsankov_agree}/{n} agree ({tsankov_true} both true)"),
        );

        // Arbitrary self-adjoint T: half generic, half in span{id, ρ}.
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x41);
        let (mut agree, mut holds) = (0usize, 0usize);
        for k in 0..100usize {
            let (label, m) = &models[(k * 37) % n];
            let rho = m.ricci_operator();
            let t = if k % 2 == 0 {
                random_self_adjoint(&mut rng, m.metric())
            } else {
                let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(0.5..2.0));
                SquareMatrix::identity(m.dim()).scale(a).add(&rho.scale(b))
            };
            match (
                verdict(check_condition_a(m, &t, &cfg.tol)),
                verdict(check_curvature_commutes(m, &t, &cfg.tol)),
                verdict(check_jacobi_commutes(m, &t, &cfg.tol)),
            ) {
                (Ok(a), Ok(b), Ok(c)) if a == b && b == c => {
                    agree += 1;
                    holds += a as usize;
                }
                (Ok(a), Ok(b), Ok(c)) => disagreements.push(format!("{label} T#{k}: ({a},{b},{c})")),
                (a, b, c) => indeterminate.push(format!("{label} T#{k}: {:?}", [a.err(), b.err(), c.err()])),
            }
        }
        rec.check(
            "arbitrary self-adjoint T: the three conditions agree",
            agree == 100,
            format!("{agree}/100 agree ({holds} hold)"),
        );
        rec.check(
            "no verdict in the indeterminate band",
            indeterminate.is_empty(),
            indeterminate.first().cloned().unwrap_or_else(|| format!("{} models", n)),
        );
        if let Some(d) = disagreements.first() {
            rec.check("first disagreement", false, d.clone());
        }
    })
}

/// Doubling of constant-curvature models.
pub fn criterion_thm18(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(5, |rec| {
        for (n, c) in doubling_inputs() {
            let name = format!("n={n}, c={c}");
            let m0 = match canonical_model(&SquareMatrix::identity(n), c) {
                Ok(m) => m,
                Err(err) => return rec.error(name, err),
            };
            let s = c * (n as f64 - 1.0);
            match einstein_constant(&m0) {
                Ok(s0) => rec.at_most(format!("{name}: Einstein constant = c(n−1)"), (s0 - s).abs(), 1e-12),
                Err(err) => rec.error(format!("{name}: Einstein constant"), err),
            }
            let m1 = match double_model(&m0) {
                Ok(m) => m,
                Err(err) => return rec.error(name, err),
            };
            rec.check(
                format!("{name}: signature (n,n)"),
                m1.signature() == (n, n),
                format!("{:?}", m1.signature()),
            );
            let form = m1.ricci_form();
            let mut mixed = 0.0f64;
            let mut pure = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 2.0 * s } else { 0.0 };
                    mixed = mixed.max((form[(i, n + j)] - want).abs());
                    pure = pure.max(form[(i, j)].abs()).max(form[(n + i, n + j)].abs());
                }
            }
            rec.at_most(format!("{name}: ρ₁(e_i⁺,e_j⁻) − 2sδ_ij"), mixed, 1e-10);
            rec.at_most(format!("{name}: ρ₁(e_i⁺,e_j⁺), ρ₁(e_i⁻,e_j⁻)"), pure, 1e-10);
            let rho = m1.ricci_operator();
            let sq = (&rho * &rho).add(&SquareMatrix::identity(2 * n).scale(4.0 * s * s)).max_abs();
            rec.at_most(format!("{name}: ‖ρ₁² + 4s² id‖ / (1 + 4s²)"), sq / (1.0 + 4.0 * s * s), 1e-9);
            rec.entry(format!("{name}: Jacobi–Videv"), check_jacobi_videv(&m1, &cfg.tol), true);
            rec.entry(format!("{name}: Jacobi–Tsankov"), check_jacobi_tsankov(&m1, &cfg.tol), true);
        }
    })
}

/// The locally symmetric Walker metric.
pub fn criterion_thm19(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(6, |rec| {
        for (i, &s) in THM19_VALUES.iter().enumerate() {
            let chart = match build_thm19(s) {
                Ok(c) => c,
                Err(err) => return rec.error(format!("s={s}"), err),
            };
            let points = match sample_points(&chart, &WALKER_BOX, POINTS_PER_CHART, cfg.seed ^ (400 + i as u64)) {
                Ok(p) => p,
                Err(err) => return rec.error(format!("s={s}"), err),
            };
            let k = s / 2.0;
            let (mut comp, mut nabla, mut action, mut square, mut cond) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
            let mut observed = [0.0; 4];
            let mut verdicts = Ok(());
            for p in &points {
                let cd = match curvature(&chart, p) {
                    Ok(cd) => cd,
                    Err(err) => return rec.error(format!("s={s}"), err),
                };
                observed = [cd.r(0, 2, 0, 3), cd.r(0, 2, 1, 2), cd.r(0, 3, 1, 3), cd.r(1, 2, 1, 3)];
                for (o, want) in observed.iter().zip([k, -k, k, -k]) {
                    comp = comp.max((o - want).abs());
                }
                nabla = nabla.max(cd.max_abs_nabla_r().unwrap_or(f64::INFINITY));
                let rho = &cd.ricci_op;
                let want: [(usize, usize, f64); 4] = [(0, 1, -s), (1, 0, s), (2, 3, s), (3, 2, -s)];
                for (col, row, v) in want {
                    let mut expected = vec![0.0; 4];
                    expected[row] = v;
                    let got = rho.column(col);
                    action = action.max(got.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                }
                square = square.max((rho * rho).add(&SquareMatrix::identity(4).scale(s * s)).max_abs());
                match model_from_curvature(&cd) {
                    Ok(m) => {
                        cond = cond.max(condition_a_residual(&m, rho).unwrap_or(f64::INFINITY));
                        for r in [check_jacobi_videv(&m, &cfg.tol), check_skew_videv(&m, &cfg.tol)] {
                            match r {
                                Ok(entry) if entry.verdict => {}
                                Ok(entry) => verdicts = Err(format!("fails at {p:?}: {:.3e}", entry.residual)),
                                Err(err) => verdicts = Err(err.to_string()),
                            }
                        }
                    }
                    Err(err) => verdicts = Err(err.to_string()),
                }
            }
            let scale = 1.0 + s.abs();
            rec.check(
                format!("s={s}: R_1314 = s/2, R_1323 = −s/2, R_1424 = s/2, R_2324 = −s/2"),
                comp <= 1e-10 * scale,
                format!("observed {:?}, max deviation {comp:.3e}", observed),
            );
            rec.at_most(format!("s={s}: max |∇R| / (1 + |s|)"), nabla / scale, 1e-9);
            rec.at_most(format!("s={s}: ρ∂1 = −s∂2, ρ∂2 = s∂1, ρ∂3 = s∂4, ρ∂4 = −s∂3"), action, 1e-10 * scale);
            rec.at_most(format!("s={s}: ‖ρ² + s² id‖"), square, 1e-9);
            rec.at_most(format!("s={s}: condition (1) residual with T = ρ"), cond, 1e-9);
            rec.check(
                format!("s={s}: Jacobi–Videv and skew–Videv"),
                verdicts.is_ok(),
                verdicts.err().unwrap_or_else(|| format!("{} points", points.len())),
            );
        }
    })
}

/// Engine identities over the chart corpus.
pub fn criterion_engine(cfg: &SuiteConfig) -> CriterionResult {
    run_criterion(7, |rec| {
        let corpus = match chart_corpus(cfg.seed) {
            Ok(c) => c,
            Err(err) => return rec.error("corpus", err),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x77);
        let mut worst: std::collections::BTreeMap<&'static str, (f64, f64, String)> = Default::default();
        let mut note = |name: &'static str, ratio: f64, tol: f64, label: &str| {
            let slot = worst.entry(name).or_insert((0.0, tol, String::new()));
            if ratio > slot.0 || ratio.is_nan() {
                *slot = (ratio, tol, label.to_string());
            }
        };
        let mut errors = Vec::new();
        for c in &corpus {
            for p in &c.points {
                let cd = match curvature(&c.chart, p) {
                    Ok(cd) => cd,
                    Err(err) => {
                        errors.push(format!("{}: {err}", c.label));
                        continue;
                    }
                };
                for chk in invariant_checks(&cd) {
                    note(chk.name, chk.residual / chk.scale, chk.tol, &c.label);
                }
                let scale = cd.scale();
                let m = cd.dim;
                let sym = validate(m, &cd.riemann, 1e-10);
                note("model_validation", sym.antisymmetry.max(sym.pair_symmetry).max(sym.first_bianchi) / sym.scale, 1e-10, &c.label);

                let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                let mut polar = SquareMatrix::zeros(m);
                for i in 0..m {
                    for j in 0..m {
                        polar = polar.add(&jacobi_polarized(&cd, i, j).scale(u[i] * v[j]));
                    }
                }
                let lhs = &(&jacobi_op(&cd, &uv) - &jacobi_op(&cd, &u)) - &jacobi_op(&cd, &v);
                note("polarization", (&lhs - &polar.scale(2.0)).max_abs() / scale, 1e-9, &c.label);

                let mut trace = 0.0f64;
                for i in 0..m {
                    for j in 0..m {
                        trace = trace.max((jacobi_polarized(&cd, i, j).trace() - cd.ricci_form[(i, j)]).abs());
                    }
                }
                note("trace_ricci_link", trace / scale, 1e-9, &c.label);

                match connection_discrepancy(&c.chart, p, FD_STEP) {
                    Ok(d) => note("finite_difference_connection", d, 1e-5, &c.label),
                    Err(err) => errors.push(format!("{}: oracle {err}", c.label)),
                }
                let ux = unit(m, 0);
                note("jacobi_kills_direction", max_abs(&jacobi_op(&cd, &ux).mul_vec(&ux)) / scale, 1e-12, &c.label);
            }
        }
        for (name, (ratio, tol, label)) in worst {
            rec.check(name, ratio <= tol, format!("worst {ratio:.3e} (tol {tol:.0e}) on {label}"));
        }
        rec.check("evaluation errors", errors.is_empty(), errors.first().cloned().unwrap_or_else(|| "none".into()));
        let sig_ok = corpus.iter().all(|c| {
            c.points.iter().all(|p| c.chart.metric_at(p).map(|g| signature(&g).0 + signature(&g).1 == c.chart.dim()).unwrap_or(false))
        });
        rec.check("metrics nondegenerate at all points", sig_ok, format!("{} charts", corpus.len()));
        let pe = spectral_profile(&SquareMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0]), cfg.rank_tol);
        rec.entry("pseudo-Einstein rejects four real eigenvalues", check_pseudo_einstein(&pe, &cfg.tol), false);
    })
}

pub type CriterionFn = fn(&SuiteConfig) -> CriterionResult;

pub fn criterion_fns() -> [CriterionFn; 7] {
    [
        criterion_thm12,
        criterion_thm13,
        criterion_thm14,
        criterion_equivalences,
        criterion_thm18,
        criterion_thm19,
        criterion_engine,
    ]
}

/// Run the criteria whose key contains `filter` (all when `None`).
pub fn run_suite(cfg: &SuiteConfig, filter: Option<&str>) -> SuiteReport {
    let start = Instant::now();
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .zip(criterion_fns())
        .filter(|((_, key, _), _)| filter.is_none_or(|f| key.contains(f)))
        .map(|(_, f)| f(cfg))
        .collect();
    let passed = !criteria.is_empty() && criteria.iter().all(|c| c.passed);
    SuiteReport { config: *cfg, criteria, passed, seconds: start.elapsed().as_secs_f64() }
}
