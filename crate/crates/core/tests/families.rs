use std::f64::consts::PI;

use curvlab::curvature::{
    curvature_at, curvature_at_with, curvature_operator, jacobi_op, jacobi_polarized, CurvatureOptions,
};
use curvlab::expr::{parse_expr, Params, ScalarExpr};
use curvlab::families::{
    build_def11, build_thm13, build_thm14, build_thm19, build_walker, make_thm14_case2, make_thm14_ricci_flat,
    pullback_residual, thm13_isometry, thm13_isometry_squared_scaling, AffineMap, FamilyConfig, FamilyError,
};
use curvlab::linalg::{invert, rank_with_reference, spectral_profile, SquareMatrix};
use curvlab::models::{model_at, validate};
use curvlab::sampling::halton_points;
use curvlab::videv::{
    alpha_invariant, check_condition_a, check_einstein, check_jacobi_videv, check_pseudo_einstein, check_skew_videv,
    condition_a_residual, normalized_basis_thm13, Tolerances,
};

fn e(text: &str, dim: usize) -> ScalarExpr {
    parse_expr(text, dim, &[]).unwrap()
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn assert_vec(got: &[f64], want: &[f64], tol: f64) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "{got:?} vs {want:?}");
    }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

// Split metrics. Coordinates (x1, y1, .., x̄1).

#[test]
fn split_metric_curvature_and_ricci() {
    let chart = build_def11(1, 2, &SquareMatrix::identity(2), &[vec![e("x1^2 + x2^2", 4)]], Params::new()).unwrap();
    let cd = curvature_at(&chart, &[0.4, -0.3, 0.8, 1.2]).unwrap();
    // R(∂x1,∂y1)∂y1 = ψ_11/11 ∂x̄1.
    assert_vec(&curvature_operator(&cd, 0, 1).column(1), &[0.0, 0.0, 0.0, 2.0], 1e-12);
    assert_vec(&cd.ricci_op.column(0), &[0.0, 0.0, 0.0, 4.0], 1e-12);
    assert!((&cd.ricci_op * &cd.ricci_op).max_abs() < 1e-12);
    assert!(cd.ricci_op.max_abs() > 1.0);
    assert!(!check_einstein(&cd.ricci_op, &tol()).unwrap().verdict);

    let harmonic = build_def11(1, 2, &SquareMatrix::identity(2), &[vec![e("x1^2 - x2^2", 4)]], Params::new()).unwrap();
    let cd = curvature_at(&harmonic, &[0.4, -0.3, 0.8, 1.2]).unwrap();
    assert!(cd.ricci_op.max_abs() < 1e-12);
    assert!(check_einstein(&cd.ricci_op, &tol()).unwrap().verdict);
}

#[test]
fn split_metric_jacobi_operators() {
    let chart = build_def11(1, 1, &SquareMatrix::identity(1), &[vec![e("x1^2", 3)]], Params::new()).unwrap();
    for p in halton_points(&[(-1.0, 1.0); 3], 5, 3) {
        let cd = curvature_at(&chart, &p).unwrap();
        let j = jacobi_polarized(&cd, 1, 1);
        assert_vec(&j.column(0), &[0.0, 0.0, 2.0], 1e-12);
        assert_vec(&j.column(1), &[0.0, 0.0, 0.0], 1e-12);
        assert!(curvature_operator(&cd, 1, 1).max_abs() == 0.0);
    }
}

#[test]
fn split_metric_range_and_kernel_inclusions() {
    let psi = vec![vec![e("sin(x2)*x3", 6), e("x2^2", 6)], vec![e("x2^2", 6), e("cos(x3) + x2*x3", 6)]];
    let c = SquareMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let chart = build_def11(2, 2, &c, &psi, Params::new()).unwrap();
    for p in halton_points(&[(-1.0, 1.0); 6], 5, 11) {
        let cd = curvature_at(&chart, &p).unwrap();
        let scale = cd.scale();
        let rank_rho = rank_with_reference(&cd.ricci_op, 1e-8, scale);
        assert!(rank_rho > 0);
        for i in 0..6 {
            for j in i..6 {
                let jac = jacobi_polarized(&cd, i, j);
                assert!((&cd.ricci_op * &jac).max_abs() <= 1e-10 * scale);
                assert!((&jac * &cd.ricci_op).max_abs() <= 1e-10 * scale);
                // Range J ⊆ ker ρ.
                assert!(rank_with_reference(&jac, 1e-8, scale) <= 6 - rank_rho);
            }
        }
    }
}

#[test]
fn periodic_profiles_give_identical_curvature_after_full_turns() {
    let psi = vec![vec![e("sin(x1)*cos(x2)", 4)]];
    let c = SquareMatrix::diagonal(&[1.0, -1.0]);
    let chart = build_def11(1, 2, &c, &psi, Params::new()).unwrap();
    for (k, p) in halton_points(&[(-1.0, 1.0); 4], 5, 5).into_iter().enumerate() {
        let mut q = p.clone();
        q[1] += 2.0 * PI * (k as f64 + 1.0);
        q[2] -= 2.0 * PI;
        let a = curvature_at(&chart, &p).unwrap();
        let b = curvature_at(&chart, &q).unwrap();
        let diff = a.riemann.iter().zip(&b.riemann).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-12 * a.scale(), "{diff:e}");
        assert!((&a.ricci_op - &b.ricci_op).max_abs() <= 1e-12 * a.scale());
    }
}

// The four-dimensional nilpotent family. Coordinates (x, y, z, x̄).

#[test]
fn nilpotent_family_tables_at_the_origin() {
    let chart = build_thm13(e("exp(x1)", 4), Params::new()).unwrap();
    let cd = curvature_at(&chart, &[0.0; 4]).unwrap();
    assert!((cd.gamma_first(0, 1, 2) - 1.0).abs() < 1e-14);
    assert!((cd.r(0, 1, 1, 0) - 1.0).abs() < 1e-14);
    assert!((cd.r(0, 1, 1, 2) + 1.0).abs() < 1e-14);
    // R(∂x,∂y)∂x = −φ′φ′∂y, so J(∂x)∂y = R(∂y,∂x)∂x = +φ′φ′∂y by antisymmetry.
    assert_vec(&curvature_operator(&cd, 0, 1).column(0), &[0.0, -1.0, 0.0, 0.0], 1e-14);
    assert_vec(&jacobi_op(&cd, &unit(4, 0)).column(1), &[0.0, 1.0, 0.0, 0.0], 1e-14);
    assert_vec(&curvature_operator(&cd, 0, 2).column(2), &[0.0, 0.0, 0.0, 1.0], 1e-14);

    let g = chart.metric_at(&[0.0; 4]).unwrap();
    let resid = (&(&g * &invert(&g, 1e-12).unwrap()) - &SquareMatrix::identity(4)).max_abs();
    assert!(resid <= 1e-10 * g.max_abs());
}

#[test]
fn nilpotent_family_ricci_profile() {
    // ρ has rank 2 with kernel spanned by ∂y and ∂x̄, so the rank sequence
    // of its powers is (4, 2, 1, 0, 0).
    for phi in ["exp(x1)", "exp(2*x1)", "x1^2", "x1^3 + x1^2"] {
        let chart = build_thm13(e(phi, 4), Params::new()).unwrap();
        for p in halton_points(&[(-1.0, 1.0), (0.1, 1.5), (-1.0, 1.0), (-1.0, 1.0)], 6, 2) {
            let cd = curvature_at(&chart, &p).unwrap();
            let prof = spectral_profile(&cd.ricci_op, 1e-8);
            assert_eq!(prof.ranks, vec![4, 2, 1, 0, 0], "{phi} at {p:?}");
            assert_eq!(prof.nilpotency_index, 3);
            assert!(cd.ricci_op.mul_vec(&unit(4, 1)).iter().all(|v| v.abs() < 1e-12));
            assert!(cd.ricci_op.mul_vec(&unit(4, 3)).iter().all(|v| v.abs() < 1e-12));
            assert!(check_pseudo_einstein(&prof, &tol()).unwrap().verdict);
        }
    }
}

#[test]
fn nilpotent_family_is_not_videv() {
    let chart = build_thm13(e("exp(x1)", 4), Params::new()).unwrap();
    let cd = curvature_at(&chart, &[0.0; 4]).unwrap();
    let j = jacobi_polarized(&cd, 0, 1);
    assert_vec(&(&cd.ricci_op * &j).column(1), &[0.0, 0.0, 0.0, -0.5], 1e-14);
    assert_vec(&j.mul_vec(&cd.ricci_op.column(1)), &[0.0; 4], 1e-14);
    let m = model_at(&chart, &[0.0; 4]).unwrap();
    let jv = check_jacobi_videv(&m, &tol()).unwrap();
    assert!(!jv.verdict && jv.residual >= 0.25, "{jv:?}");
    assert!(!check_skew_videv(&m, &tol()).unwrap().verdict);
    assert!(condition_a_residual(&m, &m.ricci_operator()).unwrap() > 1e-4);
}

#[test]
fn normalized_basis_and_alpha() {
    let ps = Params::new();
    let nb = normalized_basis_thm13(&e("exp(x1)", 4), &ps, &[0.0; 4]).unwrap();
    assert!((nb.epsilon1 - 1.0).abs() < 1e-14 && (nb.delta1 - 0.5).abs() < 1e-14);
    assert!((nb.alpha - 1.0).abs() < 1e-12 && nb.relation_residual < 1e-9);
    let nb = normalized_basis_thm13(&e("exp(2*x1)", 4), &ps, &[0.3, -0.8, 0.1, 0.6]).unwrap();
    assert!((nb.alpha - 0.25).abs() < 1e-12);
    let nb = normalized_basis_thm13(&e("x1^2", 4), &ps, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!((nb.alpha - 1.0).abs() < 1e-12);
    assert!((alpha_invariant(&e("exp(x1)", 4), &ps, 17.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(alpha_invariant(&e("x1", 4), &ps, 0.0).is_err());
}

#[test]
fn translations_of_the_exponential_chart() {
    let chart = build_thm13(e("exp(x1)", 4), Params::new()).unwrap();
    let pts = halton_points(&[(-1.0, 1.0); 4], 8, 1);
    let a = [1.0, 0.3, -2.0, 0.5];
    assert!(pullback_residual(&chart, &thm13_isometry(1.0, a), &pts).unwrap() <= 1e-10);
    // Scaling x and x̄ by e^(∓2a₂) leaves the cross term g(∂x,∂z) off by e^(−a₂).
    assert!(pullback_residual(&chart, &thm13_isometry_squared_scaling(1.0, a), &pts).unwrap() > 1e-4);
    assert_eq!(pullback_residual(&chart, &AffineMap::identity(4), &pts).unwrap(), 0.0);
    let shift = AffineMap { linear: SquareMatrix::identity(4), offset: vec![0.0, 0.3, 0.0, 0.0] };
    assert!(pullback_residual(&chart, &shift, &pts).unwrap() > 1e-4);
    let b2 = build_thm13(e("exp(2*x1)", 4), Params::new()).unwrap();
    assert!(pullback_residual(&b2, &thm13_isometry(2.0, a), &pts).unwrap() <= 1e-10);
}

// Walker charts. Coordinates (x1, x2, x3, x4) as indices 0..3.

#[test]
fn walker_examples() {
    let z = ScalarExpr::zero;
    let flat = build_walker(z(), z(), z(), Params::new()).unwrap();
    let cd = curvature_at(&flat, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert!(cd.riemann.iter().all(|&v| v == 0.0));

    let case1 = build_walker(z(), e("x0*x2 + x1*x3", 4), z(), Params::new()).unwrap();
    let m = model_at(&case1, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert!(check_jacobi_videv(&m, &tol()).unwrap().verdict);

    let s = 1.5;
    let by_hand = build_walker(
        e("1.5*x0*x1", 4),
        e("1.5*(x1^2 - x0^2)/2", 4),
        e("-1.5*x0*x1", 4),
        Params::new(),
    )
    .unwrap();
    let p = [0.3, -0.7, 0.2, 0.9];
    let a = curvature_at(&by_hand, &p).unwrap();
    let b = curvature_at(&build_thm19(s).unwrap(), &p).unwrap();
    assert!(a.riemann.iter().zip(&b.riemann).all(|(x, y)| (x - y).abs() < 1e-12));
}

#[test]
fn closed_and_open_pairs() {
    let p = [0.3, -0.2, 0.5, 0.7];
    let closed = build_thm14(e("x2", 4), e("x3", 4), ScalarExpr::zero(), Params::new()).unwrap();
    assert!(closed.classification.closed && !closed.classification.rational_case);
    assert!(check_jacobi_videv(&model_at(&closed.chart, &p).unwrap(), &tol()).unwrap().verdict);

    let open = build_thm14(e("x2", 4), e("x2", 4), ScalarExpr::zero(), Params::new()).unwrap();
    assert!(!open.classification.closed);
    let jv = check_jacobi_videv(&model_at(&open.chart, &p).unwrap(), &tol()).unwrap();
    assert!(!jv.verdict && jv.residual >= 1e-4);

    let trivial = build_thm14(ScalarExpr::zero(), ScalarExpr::zero(), e("sin(x2)*x3^3", 4), Params::new()).unwrap();
    assert!(trivial.classification.closed);
    assert!(check_jacobi_videv(&model_at(&trivial.chart, &p).unwrap(), &tol()).unwrap().verdict);

    assert!(matches!(
        build_thm14(e("x0", 4), ScalarExpr::zero(), ScalarExpr::zero(), Params::new()),
        Err(FamilyError::Dependency { index: 0, .. })
    ));
}

#[test]
fn rational_pairs() {
    assert!(matches!(
        make_thm14_case2(0.0, 0.0, 0.0, ScalarExpr::zero(), Params::new()),
        Err(FamilyError::ZeroCoefficients)
    ));
    let p = [0.3, -0.2, 0.5, 0.7];
    for (a, b, c) in [(1.0, 0.0, 1.0), (1.0, 1.0, 1.0)] {
        // P = c/D, Q = b/D: closed, hence Jacobi–Videv, with ρ nilpotent and nonzero.
        let t = make_thm14_case2(a, b, c, ScalarExpr::zero(), Params::new()).unwrap();
        assert!(t.classification.closed && t.classification.rational_case);
        let m = model_at(&t.chart, &p).unwrap();
        assert!(check_jacobi_videv(&m, &tol()).unwrap().verdict);
        assert!(!check_einstein(&m.ricci_operator(), &tol()).unwrap().verdict);
        assert!(spectral_profile(&m.ricci_operator(), 1e-8).is_nilpotent());
        // P = −2c/D, Q = −2b/D: Ricci flat.
        let t = make_thm14_ricci_flat(a, b, c, e("x2*x3", 4), Params::new()).unwrap();
        let m = model_at(&t.chart, &p).unwrap();
        assert!(check_einstein(&m.ricci_operator(), &tol()).unwrap().verdict);
        assert!(m.ricci_operator().max_abs() < 1e-12);
    }
}

#[test]
fn locally_symmetric_walker_metric() {
    let chart = build_thm19(1.0).unwrap();
    let p = [0.3, -0.7, 1.1, 0.4];
    let cd = curvature_at_with(&chart, &p, CurvatureOptions { nabla_r: true }).unwrap();
    let prof = spectral_profile(&cd.ricci_op, 1e-8);
    assert_eq!(prof.nilpotency_index, 0);
    assert_eq!(prof.eigenvalues.len(), 2);
    for c in &prof.eigenvalues {
        assert_eq!(c.multiplicity, 2);
        assert!(c.re.abs() < 1e-9 && (c.im.abs() - 1.0).abs() < 1e-9);
    }
    assert!(check_pseudo_einstein(&prof, &tol()).unwrap().verdict);
    assert!((&cd.ricci_op * &cd.ricci_op).add(&SquareMatrix::identity(4)).max_abs() < 1e-12);
    let m = model_at(&chart, &p).unwrap();
    assert!(check_condition_a(&m, &m.ricci_operator(), &tol()).unwrap().verdict);
    assert!(check_skew_videv(&m, &tol()).unwrap().verdict);
    assert!(cd.max_abs_nabla_r().unwrap() < 1e-9);
}

#[test]
fn chart_models_validate_and_keep_the_ricci_operator() {
    let charts = [
        (build_thm13(e("exp(x1)", 4), Params::new()).unwrap(), vec![0.1, 0.4, -0.3, 0.2]),
        (build_thm19(2.0).unwrap(), vec![0.5, -0.5, 0.25, 0.75]),
        (
            build_def11(1, 2, &SquareMatrix::identity(2), &[vec![e("x1^2 + x2^2", 4)]], Params::new()).unwrap(),
            vec![0.2, 0.3, -0.1, 0.9],
        ),
    ];
    for (chart, p) in charts {
        let cd = curvature_at(&chart, &p).unwrap();
        let m = model_at(&chart, &p).unwrap();
        assert!(validate(m.dim(), m.tensor(), 1e-10).is_valid());
        assert!((&m.ricci_operator() - &cd.ricci_op).max_abs() <= 1e-12 * cd.scale());
    }
}

#[test]
fn configs_for_every_family() {
    let docs = [
        r#"{"family":"def11","k":1,"l":2,"c":[[1,0],[0,-1]],"psi":[["x1^2 + x2^2"]]}"#,
        r#"{"family":"thm13","phi":"exp(b*x1)","params":{"b":2}}"#,
        r#"{"family":"walker","g34":"x0*x2"}"#,
        r#"{"family":"thm14","p":"x2","q":"x3"}"#,
        r#"{"family":"thm14case2","a":1,"b":0,"c":1}"#,
        r#"{"family":"thm19","s":-3,"points":[[0,0,0,0]]}"#,
    ];
    let names = ["def11", "thm13", "walker", "thm14", "thm14case2", "thm19"];
    for (doc, name) in docs.iter().zip(names) {
        let built = FamilyConfig::from_json(doc).unwrap().build().unwrap();
        assert_eq!(built.name, name);
        assert_eq!(built.thm14.is_some(), name.starts_with("thm14"));
    }
    assert!(FamilyConfig::from_json(r#"{"family":"nope"}"#).is_err());
    assert!(FamilyConfig::from_json(r#"{"family":"thm13","phi":"exp(q*x1)"}"#).unwrap().build().is_err());
}
