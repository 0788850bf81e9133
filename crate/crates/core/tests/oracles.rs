//! Library values against the independent oracles in `common`.

mod common;

use ptwell_core::airy::{ai, ai_prime, airy_derivative_zero, airy_eval, airy_function_zero};
use ptwell_core::level;

#[test]
fn fixed_point_series_reproduces_reference_digits() {
    assert_eq!(common::ai_at_one_fixed_point(), "0.135292416312881415524147423515");
}

#[test]
fn ai_at_one_against_fixed_point_series() {
    let reference: f64 = common::ai_at_one_fixed_point().parse().unwrap();
    let v = airy_eval(num_complex::Complex64::new(1.0, 0.0)).unwrap();
    assert!(
        (v.ai.re - reference).abs() <= 2e-16 * reference,
        "{} vs {reference}",
        v.ai.re
    );
    assert_eq!(v.ai.im, 0.0);
}

#[test]
fn series_oracle_agrees_with_library_on_small_arguments() {
    for i in -40..=40 {
        let x = 0.1 * i as f64;
        let (a, d) = common::ai_series(x);
        assert!((ai(x).unwrap() - a).abs() < 1e-12, "x={x}");
        assert!((ai_prime(x).unwrap() - d).abs() < 1e-12, "x={x}");
    }
}

#[test]
fn oracle_zeros_match_frozen_values() {
    let (l0, l1) = common::oracle_lambdas();
    assert!((l0 - 1.018_792_971_647_471).abs() < 1e-13, "{l0}");
    assert!((l1 - 2.338_107_410_459_767).abs() < 1e-13, "{l1}");
}

#[test]
fn library_zeros_match_oracle() {
    let (l0, l1) = common::oracle_lambdas();
    assert!((airy_derivative_zero(1).unwrap().location + l0).abs() < 1e-12);
    assert!((airy_function_zero(1).unwrap().location + l1).abs() < 1e-12);
    assert!((level(0).unwrap().lambda - l0).abs() < 1e-12);
    assert!((level(1).unwrap().lambda - l1).abs() < 1e-12);
    let a2 = common::bisect_newton(|x| common::ai_series(x).0, |x| common::ai_series(x).1, -4.5, -3.5);
    assert!((airy_function_zero(2).unwrap().location - a2).abs() < 1e-11);
    assert!((a2 + 4.087_949_444_130_970_6).abs() < 1e-11);
    let a2p = common::bisect_newton(|x| common::ai_series(x).1, |x| x * common::ai_series(x).0, -3.6, -2.9);
    assert!((airy_derivative_zero(2).unwrap().location - a2p).abs() < 1e-11);
    assert!((a2p + 3.248_197_582_179_836_5).abs() < 1e-11);
}
