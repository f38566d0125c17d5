use gdtau::algebro::{branch_series, CharPoly, DEFAULT_BRANCH_TERMS};
use gdtau::gradedpoly::{GradedPoly, Monomial};
use gdtau::laurent::{inverse_transform, lm_mul, transform, LaurentMatrix};
use gdtau::linalg::{c, CMat};
use gdtau::report::fmt_f64;
use gdtau::symbols::{lambda_power, xi_inverse, xi_map};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn laurent(n: usize, lo: i64, hi: i64) -> impl Strategy<Value = LaurentMatrix> {
    let count = (hi - lo + 1) as usize * n * n;
    prop::collection::vec(complex(), count).prop_map(move |v| {
        let blocks = v
            .chunks(n * n)
            .map(|ch| CMat::from_row_slice(n, n, ch))
            .collect();
        LaurentMatrix::from_blocks(lo, blocks)
    })
}

/// Polynomials in t₁..t₄ of weight ≤ 8 from random exponent vectors.
fn graded(q: usize) -> impl Strategy<Value = GradedPoly> {
    prop::collection::vec((prop::collection::vec(0u32..3, 4), complex()), 1..8).prop_map(move |terms| {
        GradedPoly::from_terms(
            4,
            q,
            terms.into_iter().map(|(e, v)| (Monomial::from_exponents(&e), v)),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trip(lm in laurent(2, -3, 4)) {
        let back = transform(&inverse_transform(&lm, 32).unwrap(), -3, 4).unwrap();
        prop_assert!(back.sub(&lm).max_abs_in(-3, 4) < 1e-12);
    }

    #[test]
    fn convolution_matches_pointwise_product(a in laurent(2, -2, 2), b in laurent(2, -1, 3)) {
        let ab = lm_mul(&a, &b, -3, 5);
        let z = Complex64::from_polar(1.0, 0.7);
        let diff = ab.eval(z) - a.eval(z) * b.eval(z);
        prop_assert!(diff.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn ring_associativity_and_distributivity(a in graded(8), b in graded(8), cc in graded(8)) {
        prop_assert!(a.mul(&b).mul(&cc).max_diff(&a.mul(&b.mul(&cc))) < 1e-12);
        prop_assert!(a.mul(&b.add(&cc)).max_diff(&a.mul(&b).add(&a.mul(&cc))) < 1e-12);
    }

    #[test]
    fn graded_inverse(a in graded(8), a0 in complex()) {
        prop_assume!(a0.norm() > 0.2);
        let unit = a.sub(&GradedPoly::constant(4, 8, a.constant_term())).add(&GradedPoly::constant(4, 8, a0));
        let prod = unit.mul(&unit.invert().unwrap());
        prop_assert!(prod.max_diff(&GradedPoly::one(4, 8)) < 1e-10);
    }

    #[test]
    fn lambda_powers_compose(n in 1usize..5, a in -6i64..7, b in -6i64..7) {
        let lo = (a + b).div_euclid(n as i64) - 2;
        let hi = (a + b).div_euclid(n as i64) + 2;
        let prod = lm_mul(&lambda_power(n, a), &lambda_power(n, b), lo, hi);
        prop_assert!(prod.sub(&lambda_power(n, a + b)).max_abs_in(lo, hi) == 0.0);
    }

    #[test]
    fn xi_map_round_trip(n in 1usize..4, coeffs in prop::collection::vec(complex(), 12)) {
        let g = LaurentMatrix::scalar(-5, &coeffs);
        let f = xi_inverse(&g, n);
        let back = xi_map(&f);
        prop_assert!(back.sub(&g).max_abs_in(-5, 6) == 0.0);
    }

    #[test]
    fn branch_series_solves_random_elliptic_curves(
        roots in prop::collection::vec((0.0..0.5f64, 0.0..std::f64::consts::TAU), 3)
    ) {
        let a: Vec<Complex64> = roots.iter().map(|(r, th)| Complex64::from_polar(*r, *th)).collect();
        prop_assume!((0..3).all(|i| (i + 1..3).all(|j| (a[i] - a[j]).norm() > 1e-3)));
        let bs = branch_series(&CharPoly::covering(&a, 2).unwrap(), DEFAULT_BRANCH_TERMS, false).unwrap();
        prop_assert!(bs.residual(1.0, 64) < 1e-8);
    }

    #[test]
    fn csv_numbers_round_trip_exactly(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(back, x);
    }
}
