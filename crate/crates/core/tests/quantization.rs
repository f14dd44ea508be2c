mod common;

use bergtrace::geometry::Point;
use bergtrace::quantization::{c1_closed, c1_split, c_l, c_l_symbol, d_alpha_beta, poisson_bracket};
use bergtrace::symbols::MultiIndex;
use bergtrace::Error;
use common::{random_point, random_unitary, rational_symbol, rng, sym, to_f64};
use num_complex::Complex;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn c1_word_route_equals_closed_form(f in rational_symbol(2, 2, 3), g in rational_symbol(2, 2, 3)) {
        prop_assert_eq!(c_l_symbol(&f, &g, 1).unwrap(), c1_closed(&f, &g).unwrap());
    }

    #[test]
    fn bracket_is_antisymmetric(f in rational_symbol(2, 2, 3), g in rational_symbol(2, 2, 3)) {
        let a = poisson_bracket(&f, &g).unwrap();
        let b = poisson_bracket(&g, &f).unwrap();
        prop_assert!((&a + &b).is_zero());
    }

    #[test]
    fn d_is_hermitian(seed in 0u64..5000, a0 in 0u32..3, a1 in 0u32..3, b0 in 0u32..3, b1 in 0u32..3) {
        let mut r = rng(seed);
        let z = random_point(&mut r, 2, 0.9);
        let a = MultiIndex::new(vec![a0, a1]);
        let b = MultiIndex::new(vec![b0, b1]);
        if a.degree() == b.degree() && a.degree() <= 4 {
            let x: Complex<f64> = d_alpha_beta(&z, &a, &b).unwrap();
            let y: Complex<f64> = d_alpha_beta(&z, &b, &a).unwrap();
            prop_assert!((x - y.conj()).norm() < 1e-12);
        }
    }
}

#[test]
fn frame_independence() {
    let mut r = rng(21);
    let f = sym(2, "z1^2*conj(z2) + 2*z2 - conj(z1)");
    let g = sym(2, "conj(z1)*z2 + i*conj(z2)^2 + z1");
    for l in 1..=2 {
        for _ in 0..10 {
            let u = random_unitary(&mut r, 2);
            let fu = f.linear_substitution(&u).unwrap();
            let gu = g.linear_substitution(&u).unwrap();
            let x = random_point(&mut r, 2, 0.9);
            let ux: Vec<Complex<f64>> = u.iter().map(|row| row.iter().zip(x.coords()).map(|(p, q)| p * q).sum()).collect();
            let a: Complex<f64> = c_l(&fu, &gu, l, &x).unwrap();
            let b: Complex<f64> = c_l(&f, &g, l, &Point::new(ux).unwrap()).unwrap();
            assert!((a - b).norm() <= 1e-9, "l={l}: {a} vs {b}");
        }
    }
}

#[test]
fn numeric_and_symbolic_c2_agree() {
    let mut r = rng(22);
    let f = sym(1, "z1 + conj(z1)");
    let g = sym(1, "z1*conj(z1)");
    let s2 = c_l_symbol(&f, &g, 2).unwrap();
    for _ in 0..20 {
        let z = random_point(&mut r, 1, 0.9);
        let a: Complex<f64> = c_l(&f, &g, 2, &z).unwrap();
        assert!((a - s2.eval(z.coords())).norm() < 1e-10);
    }
}

#[test]
fn normal_and_tangential_parts_add_up() {
    let mut r = rng(23);
    let f = common::qsym(2, "z1*z2 + conj(z1)");
    let g = common::qsym(2, "conj(z2)^2 + z1*conj(z1)");
    let (cn, ct) = c1_split(&f, &g).unwrap();
    let c1 = to_f64(&c1_closed(&f, &g).unwrap());
    for _ in 0..50 {
        let z = random_point(&mut r, 2, 0.95);
        let sum: Complex<f64> = cn.eval(z.coords()).unwrap() + ct.eval(z.coords()).unwrap();
        assert!((sum - c1.eval(z.coords())).norm() < 1e-12);
    }
    // at the origin the split uses the direction average
    let o = Point::<f64>::origin(2);
    let sum: Complex<f64> = cn.eval(o.coords()).unwrap() + ct.eval(o.coords()).unwrap();
    assert!((sum - c1.eval(o.coords())).norm() < 1e-12);
}

#[test]
fn c0_is_the_product() {
    let f = common::qsym(2, "z1 + conj(z2)");
    let g = common::qsym(2, "z2*conj(z1)");
    assert_eq!(c_l_symbol(&f, &g, 0).unwrap(), &f * &g);
}

#[test]
fn dimension_mismatch_is_reported() {
    let f = sym(1, "z1");
    let g = sym(2, "z1");
    assert!(matches!(c1_closed(&f, &g), Err(Error::DimensionMismatch { .. })));
}
