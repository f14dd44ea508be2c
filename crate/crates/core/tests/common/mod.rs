#![allow(dead_code)]

use bergtrace::symbols::{MultiIndex, PolySymbol};
use bergtrace::{Point, Rational};
use num_complex::Complex;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym(n: usize, s: &str) -> PolySymbol<f64> {
    PolySymbol::parse(n, s).unwrap()
}

pub fn qsym(n: usize, s: &str) -> PolySymbol<Rational> {
    PolySymbol::parse(n, s).unwrap()
}

/// Uniform point of the ball scaled into radius `max_r`.
pub fn random_point(r: &mut impl Rng, n: usize, max_r: f64) -> Point<f64> {
    loop {
        let c: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let ns: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        if ns < 1.0 {
            return Point::new(c.into_iter().map(|x| x * max_r).collect()).unwrap();
        }
    }
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> Vec<Vec<Complex<f64>>> {
    // Gram-Schmidt on a random complex matrix
    let mut rows: Vec<Vec<Complex<f64>>> = Vec::new();
    while rows.len() < n {
        let mut v: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        for u in &rows {
            let p: Complex<f64> = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for k in 0..n {
                v[k] -= p * u[k];
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    rows
}

/// Random rational symbol with small degree and small coefficients.
pub fn rational_symbol(n: usize, max_deg: u32, terms: usize) -> impl Strategy<Value = PolySymbol<Rational>> {
    let term = (
        proptest::collection::vec(0..=max_deg, n),
        proptest::collection::vec(0..=max_deg, n),
        -4i64..=4,
        -4i64..=4,
        1i64..=3,
    );
    proptest::collection::vec(term, 1..=terms).prop_map(move |ts| {
        PolySymbol::from_terms(
            n,
            ts.into_iter().map(|(g, i, re, im, den)| {
                (
                    MultiIndex::new(g),
                    MultiIndex::new(i),
                    Complex::new(Rational::new(re.into(), den.into()), Rational::new(im.into(), den.into())),
                )
            }),
        )
        .unwrap()
    })
}

pub fn to_f64(q: &PolySymbol<Rational>) -> PolySymbol<f64> {
    q.convert()
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap()
}
