use super::oracle::*;
use super::*;
use std::f64::consts::PI;

// Reference values from a 40-digit computation.
const IK: [(u32, f64, f64); 12] = [
    (0, 0.1, 2.4331404906127026847),
    (0, 10.0, 0.050063617118799483999),
    (1, 1.0, 0.34017335090486751908),
    (1, 2.0, 0.22247582632370963041),
    (1, 10.0, 0.049810655773542586242),
    (2, 0.1, 0.24958783738599994362),
    (2, 2.0, 0.17482738899669698085),
    (5, 2.0, 0.092666464143170548174),
    (10, 1.0, 0.049749429720551172742),
    (10, 10.0, 0.035338802709385551966),
    (20, 0.1, 0.024999686722725247586),
    (20, 10.0, 0.022357329593024497626),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn product_matches_reference() {
    for &(j, z, v) in &IK {
        assert!(rel(product_ik(j, z), v) < 2e-15, "j={j} z={z} {}", product_ik(j, z));
    }
}

#[test]
fn oracles_match_reference() {
    for &(j, z, v) in &IK {
        let s = series_product_dd(j, z);
        let n = nicholson_product(j, z, 1.0 / 64.0);
        let l = laplace_product(j, z, 0);
        assert!(rel(s, v) < 1e-14, "series j={j} z={z} {s}");
        assert!(rel(n, v) < 1e-12, "nicholson j={j} z={z} {n}");
        assert!(rel(l, v) < 1e-12, "laplace j={j} z={z} {l}");
    }
}

#[test]
fn single_bessel_values() {
    assert!(rel(bessel_k(0, 1.0).unwrap(), 0.42102443824070833334) < 1e-15);
    assert!(rel(bessel_i(0, 1.0).unwrap(), 1.2660658777520083356) < 1e-15);
    assert!(rel(bessel_k(3, 40.0).unwrap(), 9.3789037246453005474e-19) < 1e-13);
    assert!(rel(bessel_i(7, 50.0).unwrap(), 1.7890948802320343625e+20) < 1e-13);
    assert!(rel(bessel_j0(2.5), -0.048383776468197996327) < 1e-13);
    assert!(rel(bessel_jn(3, 40.0), -0.12614481550582080316) < 1e-12);
    assert!(rel(bessel_jn(-3, 40.0), 0.12614481550582080316) < 1e-12);
}

#[test]
fn derivatives_match_reference() {
    let d = product_ik_deriv(3, 1.0, 1).unwrap();
    assert!(rel(d, -0.016583109065969449121) < 1e-11, "{d}");
    let d = product_ik_deriv(2, 0.5, 2).unwrap();
    assert!(rel(d, -0.043783132722902256144) < 1e-11, "{d}");
    let d = product_ik_deriv(5, 2.0, 4).unwrap();
    assert!(rel(d, -0.0003156877072175507813) < 1e-10, "{d}");
}

#[test]
fn j0_routes_agree() {
    assert_eq!(bessel_j0(0.0), 1.0);
    let direct = super::quad::tanh_sinh(|t, _, _| (2.5 * t.sin()).cos(), 0.0, PI, 1.0 / 64.0) / PI;
    assert!((bessel_j0(2.5) - direct).abs() < 1e-12);
    assert!((bessel_j0_series(2.5) - bessel_j0(2.5)).abs() < 1e-12);
    for &x in &[0.3, 4.0, 17.5, 31.0, 80.0] {
        assert_eq!(bessel_j0(x), bessel_j0(-x));
        assert!(bessel_j0(x).abs() <= 1.0);
    }
}

#[test]
fn i_at_origin_and_brute_force() {
    assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    let b = bessel_i_bruteforce(0, 1.0, 60);
    assert!((bessel_i(0, 1.0).unwrap() - b).abs() < 1e-14);
    assert!(matches!(bessel_i(0, 800.0), Err(BesselError::Overflow { .. })));
    assert!(bessel_i(0, -1.0).is_err());
}

#[test]
fn k_small_argument_behaviour() {
    let z = 1e-6;
    let v = bessel_k(0, z).unwrap() + (0.5 * z).ln() * bessel_i(0, z).unwrap();
    assert!((v + EULER_GAMMA).abs() < 1e-6);
    for j in 1..8 {
        assert!(bessel_k(j, 0.1).unwrap() > bessel_k(j - 1, 0.1).unwrap());
    }
    assert!(bessel_k(0, 0.0).is_err());
    let q = oracle::k_integral(0, 1.0);
    assert!((bessel_k(0, 1.0).unwrap() - q).abs() < 1e-10);
}

#[test]
fn k_routes_meet_at_switch() {
    for &z in &[1.5, 2.0, 2.5] {
        let (s0, s1) = k01_integral_scaled(z);
        let e = (-z).exp();
        assert!(rel(s0 * e, bessel_k_dd(0, z).to_f64()) < 1e-14, "z={z}");
        assert!(rel(s1 * e, bessel_k_dd(1, z).to_f64()) < 1e-14, "z={z}");
    }
}

#[test]
fn product_small_lambda_limit() {
    for j in 1..=10 {
        assert!((product_ik(j, 1e-5) - 0.5 / j as f64).abs() < 1e-4);
    }
    assert!(product_ik(1, 50.0) < 0.02);
}

#[test]
fn derivative_rules() {
    assert!((product_ik_deriv(4, 1.3, 0).unwrap() - product_ik(4, 1.3)).abs() < 1e-12);
    let h = 1e-5;
    let fd = (product_ik(3, 1.0 + h) - product_ik(3, 1.0 - h)) / (2.0 * h);
    assert!((product_ik_deriv(3, 1.0, 1).unwrap() - fd).abs() < 1e-6);
    for j in 2..=20u32 {
        for &l in &[0.5, 1.0, 5.0] {
            let d = product_ik_deriv(j, l, 1).unwrap();
            assert!(d.abs() <= 0.5 / (j * j) as f64, "j={j} l={l}");
        }
    }
    match product_ik_deriv(1, 1.0, 2) {
        Err(BesselError::NoDerivativeBound { value, .. }) => {
            let v = product_ik_fd_reference(1, 1.0);
            assert!((value - v).abs() < 1e-5, "{value} {v}");
        }
        other => panic!("expected flagged value, got {other:?}"),
    }
    assert!(matches!(product_ik_deriv(5, 1.0, 7), Err(BesselError::OrderTooHigh(7))));
}

// Second derivative of I_1K_1 at 1 from a 40-digit computation.
fn product_ik_fd_reference(_j: u32, _l: f64) -> f64 {
    0.082972222976751337
}

#[test]
fn large_argument_expansion() {
    assert_eq!(product_ik_asym_lambda(3, 20.0, 0), 1.0 / 40.0);
    assert_eq!(alpha(1, 1), -1.5);
    let a = product_ik_asym_lambda(1, 20.0, 3);
    assert!(rel(a, product_ik(1, 20.0)) < 1e-8);
    // Above the crossover the production route is the converged expansion.
    let b = Bessel::default();
    let r = product_ik_ratio(2, 30.0);
    assert!(rel(b.product_ik(2, 30.0).unwrap(), r) < 1e-14);
}

#[test]
fn high_order_expansion() {
    assert_eq!(product_ik_asym_j(12, 1.0, 0), 1.0 / 24.0);
    let c = AsymptoticCoeffs::new(4, 6);
    assert_eq!(c.stirling[3][2], 3);
    for m in 1..=6 {
        assert_eq!(c.stirling[m][1], 1);
        assert_eq!(c.stirling[m][0], 0);
    }
    assert_eq!(c.alpha[1][1], -1.5);
    let a = product_ik_asym_j(50, 1.0, 4);
    assert!(rel(a, product_ik(50, 1.0)) < 1e-8);
}

#[test]
fn policy_validation() {
    assert!(BesselPolicy::default().validate().is_ok());
    let bad = BesselPolicy { series_terms: 10, ..Default::default() };
    assert!(Bessel::new(bad).is_err());
    let bad = BesselPolicy { small_x_cutoff: 1.5, ..Default::default() };
    assert!(bad.validate().is_err());
}

#[test]
fn psi_values() {
    assert_eq!(psi(1), -EULER_GAMMA);
    assert!((psi(3) - (1.5 - EULER_GAMMA)).abs() < 1e-15);
}

#[test]
fn kernel_f_identities() {
    let x = 2.0;
    assert!((kernel_f_series(x) - kernel_f_direct(x).unwrap()).abs() < 1e-12);
    for &x in &[0.1, 1.0, 3.0] {
        let h = 1e-5;
        let lhs = ((x + h) * (x + h) * kernel_f(x + h).unwrap()
            - (x - h) * (x - h) * kernel_f(x - h).unwrap())
            / (2.0 * h);
        assert!((lhs - 2.0 * x * bessel_k(0, x).unwrap()).abs() < 1e-6, "x={x}");
    }
    // Near zero f + log(x/2) tends to (1 - 2γ)/2, so f/(-log(x/2)) → 1.
    let x = 1e-4;
    let f = kernel_f(x).unwrap();
    assert!((f + (0.5 * x).ln() - (0.5 - EULER_GAMMA)).abs() < 1e-6);
    assert!((f / -(0.5 * x).ln() - 1.0).abs() < 1e-2);
    assert!(kernel_f(0.0).is_err());
}

#[test]
fn kernel_g_identities() {
    for &x in &[0.2, 1.0, 4.0] {
        let h = 1e-4;
        let p = |y: f64| y.powi(4) * kernel_g(y).unwrap();
        let lhs = (p(x + h) - p(x - h)) / (2.0 * h);
        let rhs = 2.0 * x - 2.0 * x * x * bessel_k(1, x).unwrap();
        assert!((lhs - rhs).abs() < 1e-6, "x={x}");
    }
    let x = 1e-4;
    let x2k2 = x * x * (bessel_k(0, x).unwrap() + 2.0 / x * bessel_k(1, x).unwrap());
    assert!((x2k2 - 2.0).abs() < 1e-6);
    let b = Bessel::default();
    let (p, q) = kernel_g_series_parts(1.0);
    assert!(((0.5f64).ln() * p + q - b.kernel_g(1.0).unwrap()).abs() < 1e-10);
    let cut = b.policy.small_x_cutoff;
    let (p, q) = kernel_g_series_parts(cut);
    assert!(((0.5 * cut).ln() * p + q - kernel_g_direct(cut).unwrap()).abs() < 1e-10);
    let (p, q) = b.kernel_g_parts(3.0).unwrap();
    assert!(((1.5f64).ln() * p + q - kernel_g_direct(3.0).unwrap()).abs() < 1e-15);
}
