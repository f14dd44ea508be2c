mod common;

use bergtrace::forms::{
    ball_moment, cc_limit_integral, commutator_limit_integral, disk_semicommutator_rhs, disk_term2_quadrature,
    hankel_limit_integral, helton_howe_integral, mixed_wedge_integral, weighted_poly_integral, QuadratureSpec,
};
use bergtrace::quantization::c1_closed;
use bergtrace::symbols::MultiIndex;
use bergtrace::{PolySymbol, Rational, WeightParam};
use common::{random_point, rational_symbol, rng, sym};
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

type C = Complex<f64>;

#[test]
fn ball_moments_against_monte_carlo() {
    let mut r = rng(31);
    let samples = 1_000_000;
    let pts: Vec<_> = (0..samples).map(|_| random_point(&mut r, 2, 1.0)).collect();
    let vol = PI * PI / 2.0;
    for _ in 0..20 {
        let a = MultiIndex::new(vec![r.gen_range(0..3), r.gen_range(0..3)]);
        let s: f64 = r.gen_range(-0.5..3.0);
        let (mut sum, mut sq) = (0.0, 0.0);
        for p in &pts {
            let v = a.pow(p.coords()).norm_sqr() * (1.0 - p.norm_sq()).powf(s) * vol;
            sum += v;
            sq += v * v;
        }
        let mean = sum / samples as f64;
        let se = ((sq / samples as f64 - mean * mean) / samples as f64).sqrt();
        let exact = ball_moment(2, &a, &a, s).unwrap();
        assert!((mean - exact).abs() <= 3.0 * se + 1e-12, "α={a:?} s={s}: {mean} ± {se} vs {exact}");
    }
}

#[test]
fn moment_examples() {
    let z = MultiIndex::zero(1);
    assert!((ball_moment(1, &z, &z, 0.0).unwrap() - PI).abs() < 1e-13);
    assert_eq!(ball_moment(1, &MultiIndex::new(vec![1]), &z, 0.0).unwrap(), 0.0);
    let u: C = weighted_poly_integral(&sym(1, "z1*conj(z1)"), 0.0).unwrap();
    assert!((u.re - PI / 2.0).abs() < 1e-13);
    assert!(weighted_poly_integral::<f64, f64>(&sym(1, "1"), -1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weighted_integral_is_linear(a in rational_symbol(2, 2, 4), b in rational_symbol(2, 2, 4), s in -0.5f64..4.0) {
        let sum: C = weighted_poly_integral(&(&a + &b), s).unwrap();
        let parts: C = weighted_poly_integral::<Rational, f64>(&a, s).unwrap() + weighted_poly_integral::<Rational, f64>(&b, s).unwrap();
        prop_assert!((sum - parts).norm() <= 1e-12 * (1.0 + sum.norm()));
    }

    #[test]
    fn helton_howe_integral_alternates(
        a in rational_symbol(2, 2, 2), b in rational_symbol(2, 2, 2),
        c in rational_symbol(2, 2, 2), d in rational_symbol(2, 2, 2),
    ) {
        let base = vec![a.clone(), b.clone(), c.clone(), d.clone()];
        let v: C = helton_howe_integral(&base).unwrap();
        for (i, j) in [(0, 1), (1, 2), (0, 3)] {
            let mut sw = base.clone();
            sw.swap(i, j);
            let u: C = helton_howe_integral(&sw).unwrap();
            prop_assert_eq!(u, -v);
        }
        let rep: C = helton_howe_integral(&[a.clone(), b, a, d]).unwrap();
        prop_assert_eq!(rep, C::new(0.0, 0.0));
    }

    #[test]
    fn stokes_reduction_in_the_disk(f in rational_symbol(1, 3, 4), g in rational_symbol(1, 3, 4)) {
        let (f, g): (PolySymbol<f64>, PolySymbol<f64>) = (f.convert(), g.convert());
        let area: C = helton_howe_integral(&[f.clone(), g.clone()]).unwrap();
        // (1/2πi)∮ f dg, dg = (∂g ζ - ∂̄g ζ̄) i dθ on ζ = e^{iθ}
        let m = 64;
        let mut acc = C::new(0.0, 0.0);
        for k in 0..m {
            let z = C::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
            let dg = (g.d_holo(0).eval(&[z]) * z - g.d_anti(0).eval(&[z]) * z.conj()) * C::new(0.0, 1.0);
            acc += f.eval(&[z]) * dg;
        }
        let boundary = acc * (2.0 * PI / m as f64) / C::new(0.0, 2.0 * PI);
        prop_assert!((area - boundary).norm() <= 1e-8, "{} vs {}", area, boundary);
    }
}

#[test]
fn mixed_wedge_examples() {
    let v: C = mixed_wedge_integral(&[sym(1, "z1")], &[sym(1, "conj(z1)")]).unwrap();
    assert!((v + 1.0).norm() < 1e-14);
    let v: C = mixed_wedge_integral(&[sym(1, "z1^2")], &[sym(1, "conj(z1)")]).unwrap();
    assert_eq!(v, C::new(0.0, 0.0));
    let v: C = mixed_wedge_integral(&[sym(2, "z1*conj(z2)"), sym(2, "z2")], &[sym(2, "z1"), sym(2, "conj(z2)")]).unwrap();
    assert_eq!(v, C::new(0.0, 0.0));
    assert!(mixed_wedge_integral::<f64, f64>(&[sym(1, "z1")], &[]).is_err());
}

#[test]
fn disk_rhs_for_coordinate_symbols() {
    let spec = QuadratureSpec::new(16, vec![32], true, 1e-10).unwrap();
    let r = disk_semicommutator_rhs(&sym(1, "z1"), &sym(1, "conj(z1)"), &WeightParam::new(0.0).unwrap(), &spec).unwrap();
    assert!((r.term1 + 1.0).norm() < 1e-14);
    assert_eq!(r.term2, C::new(0.0, 0.0));
}

#[test]
fn disk_term2_routes_agree() {
    let spec = QuadratureSpec::new(16, vec![48], true, 1e-4).unwrap();
    let f = sym(1, "z1*conj(z1)");
    for t in [0.0] {
        let w = WeightParam::new(t).unwrap();
        let series = disk_semicommutator_rhs(&f, &f, &w, &spec).unwrap().term2;
        let (quad, _) = disk_term2_quadrature(&f, &f, &w, &spec).unwrap();
        assert!((series - quad).norm() < 1e-4 * series.norm(), "t={t}: {series} vs {quad}");
    }
}

#[test]
fn disk_term2_is_symmetric() {
    let spec = QuadratureSpec::new(16, vec![32], true, 1e-3).unwrap();
    let w = WeightParam::new(0.5f64).unwrap();
    let f = sym(1, "z1^2*conj(z1)^2");
    let g = sym(1, "z1*conj(z1)^2 + z1^2*conj(z1)^2");
    let a = disk_semicommutator_rhs(&f, &g, &w, &spec).unwrap().term2;
    let b = disk_semicommutator_rhs(&g, &f, &w, &spec).unwrap().term2;
    assert!((a - b).norm() < 1e-4 * a.norm().max(1e-3f64), "{a} vs {b}");
}

#[test]
fn disk_term2_is_continuous_at_the_hardy_end() {
    let spec = QuadratureSpec::new(16, vec![32], true, 1e-10).unwrap();
    let f = sym(1, "z1*conj(z1)");
    let at = disk_semicommutator_rhs(&f, &f, &WeightParam::new(-1.0).unwrap(), &spec).unwrap().term2;
    let near = disk_semicommutator_rhs(&f, &f, &WeightParam::new(-1.0 + 1e-6).unwrap(), &spec).unwrap().term2;
    assert!((at - near).norm() < 1e-4 * at.norm(), "{at} vs {near}");
}

#[test]
fn limit_integral_routes() {
    let z = sym(1, "z1");
    let zb = sym(1, "conj(z1)");
    let cc: C = cc_limit_integral(&[z.clone(), z.clone()], &[zb.clone(), zb.clone()], 2).unwrap();
    let hk: f64 = hankel_limit_integral(&zb, 2).unwrap();
    assert!((cc.re - hk).abs() < 1e-14);
    // any vanishing C_1 factor kills the integral
    let c0: C = cc_limit_integral(&[sym(1, "2"), z.clone()], &[zb.clone(), zb.clone()], 2).unwrap();
    assert_eq!(c0, C::new(0.0, 0.0));
    assert!(cc_limit_integral::<f64, f64>(&[z.clone()], &[zb.clone()], 1).is_err());
    assert_eq!(hankel_limit_integral::<f64, f64>(&z, 2).unwrap(), 0.0);
}

#[test]
fn hankel_limit_matches_cc_limit_in_two_dimensions() {
    // ‖H_g‖^{2p}: H_g^*H_g = -σ(ḡ, g)
    let g = sym(2, "conj(z1) + z1*conj(z2)^2");
    let gb = g.conj();
    for p in 3..=4usize {
        let hk: f64 = hankel_limit_integral(&g, p).unwrap();
        let cc: C = cc_limit_integral(&vec![gb.clone(); p], &vec![g.clone(); p], p).unwrap();
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        assert!((sign * cc.re - hk).abs() < 1e-12 * hk.abs().max(1.0), "p={p}: {cc} vs {hk}");
        assert!(hk > 0.0);
    }
}

#[test]
fn commutator_limit_by_expansion() {
    let fs = [sym(1, "z1 + conj(z1)^2"), sym(1, "z1*conj(z1)")];
    let gs = [sym(1, "conj(z1)"), sym(1, "z1^2")];
    let direct: C = commutator_limit_integral(&fs, &gs, 2).unwrap();
    // {f,g} = i(C1(f,g) - C1(g,f)); expand the product into four C_1 products
    let mut expanded = C::new(0.0, 0.0);
    for (a, sa) in [((0, false), 1.0), ((0, true), -1.0)] {
        for (b, sb) in [((1, false), 1.0), ((1, true), -1.0)] {
            let pick = |(j, swap): (usize, bool)| if swap { (gs[j].clone(), fs[j].clone()) } else { (fs[j].clone(), gs[j].clone()) };
            let (f1, g1) = pick(a);
            let (f2, g2) = pick(b);
            let v: C = cc_limit_integral(&[f1, f2], &[g1, g2], 2).unwrap();
            expanded += v * (sa * sb);
        }
    }
    // (-i)^p i^p = 1 and n = 1
    assert!((direct - expanded).norm() < 1e-12, "{direct} vs {expanded}");
}

#[test]
fn hankel_integrand_is_nonnegative() {
    let g = sym(1, "conj(z1)");
    let c1 = c1_closed(&g.conj(), &g).unwrap();
    for k in 0..50 {
        for j in 0..16 {
            let z = C::from_polar(k as f64 / 50.0, j as f64);
            assert!(-c1.eval(&[z]).re >= -1e-15);
        }
    }
}
