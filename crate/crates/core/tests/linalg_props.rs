use curvlab::linalg::{
    characteristic_polynomial, eigenvalues, invert, polynomial_roots, singular_values, spectral_profile, SquareMatrix,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = SquareMatrix> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| SquareMatrix::from_fn(n, |i, j| v[i * n + j]))
}

fn sized_matrix() -> impl Strategy<Value = SquareMatrix> {
    (1usize..=8).prop_flat_map(matrix)
}

/// `S·N·S⁻¹` with `N` strictly upper triangular: nilpotent, generic ranks.
fn conjugated_nilpotent() -> impl Strategy<Value = SquareMatrix> {
    (2usize..=6).prop_flat_map(|n| (matrix(n), matrix(n), 0..n)).prop_map(|(a, s, cut)| {
        let n = a.dim();
        let nil = SquareMatrix::from_fn(n, |i, j| if j > i && j - i > cut.min(n - 2) { a[(i, j)] } else { 0.0 });
        let s = s.add(&SquareMatrix::identity(n).scale(3.0));
        let s_inv = invert(&s, 1e-12).unwrap();
        &(&s * &nil) * &s_inv
    })
}

fn condition_number(a: &SquareMatrix) -> f64 {
    let s = singular_values(a);
    s[0] / s[s.len() - 1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ranks_never_increase(t in prop_oneof![sized_matrix(), conjugated_nilpotent()]) {
        let prof = spectral_profile(&t, 1e-8);
        prop_assert_eq!(prof.ranks.len(), t.dim() + 1);
        prop_assert!(prof.ranks.windows(2).all(|w| w[1] <= w[0]), "{:?}", prof.ranks);
        let total: usize = prof.eigenvalues.iter().map(|c| c.multiplicity).sum();
        prop_assert_eq!(total, t.dim());
    }

    #[test]
    fn nilpotent_operators_are_recognized(t in conjugated_nilpotent()) {
        let prof = spectral_profile(&t, 1e-8);
        prop_assert!(prof.is_nilpotent(), "{:?}", prof.ranks);
        prop_assert_eq!(prof.ranks[prof.nilpotency_index], 0);
    }

    #[test]
    fn invert_twice_is_identity(a in sized_matrix()) {
        prop_assume!(condition_number(&a) < 1e6);
        let inv = invert(&a, 1e-14).unwrap();
        let back = invert(&inv, 1e-14).unwrap();
        let rel = (&back - &a).max_abs() / a.max_abs();
        prop_assert!(rel <= 1e-8, "relative error {rel:e}");
        let resid = (&(&a * &inv) - &SquareMatrix::identity(a.dim())).max_abs();
        prop_assert!(resid <= 1e-10 * a.max_abs() * condition_number(&a).max(1.0), "A·A⁻¹ − I = {resid:e}");
    }

    /// `T = g⁻¹S` is self-adjoint for `g`; its spectrum is closed under conjugation.
    #[test]
    fn self_adjoint_spectra_pair_up(
        (s, neg) in (2usize..=6).prop_flat_map(|n| (matrix(n), 0..=n))
    ) {
        let n = s.dim();
        let sym = s.add(&s.transpose()).scale(0.5);
        let g = SquareMatrix::diagonal(&(0..n).map(|i| if i < neg { -1.0 } else { 1.0 }).collect::<Vec<_>>());
        let t = &invert(&g, 1e-12).unwrap() * &sym;
        let coeffs = characteristic_polynomial(&t);
        prop_assert!(coeffs.iter().all(|c| c.is_finite()));
        let vals = eigenvalues(&t);
        for v in &vals {
            let partner = vals.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner <= 1e-8 * (1.0 + v.norm()), "{v} has no conjugate");
        }
    }

    /// The characteristic-polynomial route agrees with the Schur route.
    #[test]
    fn polynomial_roots_agree_with_schur(t in (1usize..=4).prop_flat_map(matrix)) {
        let mut a = eigenvalues(&t);
        let mut b = polynomial_roots(&characteristic_polynomial(&t));
        let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1_000_000_000 + (z.im * 1e6).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for z in &a {
            let d = b.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            // Multiple roots of the polynomial are only accurate to about √ε.
            prop_assert!(d <= 1e-5 * (1.0 + z.norm()), "{z} vs {b:?}");
        }
    }
}

#[test]
fn zero_matrix_profile() {
    let prof = spectral_profile(&SquareMatrix::zeros(4), 1e-8);
    assert_eq!(prof.ranks, vec![4, 0, 0, 0, 0]);
    assert_eq!(prof.nilpotency_index, 1);
    assert_eq!(prof.eigenvalues.len(), 1);
    assert_eq!(prof.eigenvalues[0].multiplicity, 4);
}
