//! Quick invariant checks run by `bergtrace selftest`.

use std::sync::Arc;

use bergtrace::geometry::{d_metric, MobiusMap};
use bergtrace::operators::{build_basis, semi_commutator, toeplitz, Assembly};
use bergtrace::traces::antisym_trace;
use bergtrace::{Point, PolySymbol, Symbol, WeightParam};
use num_complex::Complex;

use crate::CliError;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// SplitMix64, enough for reproducible sample points.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn point(&mut self, n: usize, radius: f64) -> Point<f64> {
        loop {
            let c: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(2.0 * self.next() - 1.0, 2.0 * self.next() - 1.0)).collect();
            let r: f64 = c.iter().map(|x| x.norm_sqr()).sum();
            if r < 1.0 {
                return Point::new(c.into_iter().map(|x| x * radius).collect()).expect("inside the ball");
            }
        }
    }
}

fn sym(n: usize, s: &str) -> Symbol {
    PolySymbol::parse(n, s).expect("literal symbol")
}

pub fn run(seed: u64) -> Result<Vec<Check>, CliError> {
    let mut rng = Mix(seed);
    let mut checks = Vec::new();

    let (mut inv, mut tri) = (0.0f64, true);
    for k in 0..1000 {
        let n = 1 + k % 3;
        let (a, x, y) = (rng.point(n, 0.95), rng.point(n, 0.95), rng.point(n, 0.95));
        let m = MobiusMap::new(a.clone())?;
        let back = m.apply(&m.apply(&x)?)?;
        inv = inv.max(back.coords().iter().zip(x.coords()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max));
        tri &= d_metric(&a, &y) <= d_metric(&a, &x) + d_metric(&x, &y) + 1e-11;
    }
    checks.push(Check { name: "mobius-involution", pass: inv <= 1e-11, detail: format!("max deviation {inv:.1e}") });
    checks.push(Check { name: "triangle-inequality", pass: tri, detail: "1000 samples".into() });

    let basis = Arc::new(build_basis(2, WeightParam::new(0.5)?, 8));
    let a = toeplitz(&sym(2, "z1 + conj(z2)*z1"), &basis)?;
    let b = toeplitz(&sym(2, "conj(z1)^2 - z2"), &basis)?;
    let tr: Complex<f64> = (a.entries() * b.entries() - b.entries() * a.entries()).diagonal().iter().sum();
    checks.push(Check { name: "finite-commutator-trace", pass: tr.norm() <= 1e-12, detail: format!("{:.1e}", tr.norm()) });

    let (f, g) = (sym(2, "z1^2*conj(z2)"), sym(2, "conj(z1) + z2"));
    let w = WeightParam::new(1.0)?;
    let base = semi_commutator(&f, &g, &w, Assembly::new(8))?;
    let padded = semi_commutator(&f, &g, &w, Assembly { extra_padding: 4, ..Assembly::new(8) })?;
    let drift = (base.core() - padded.core()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    checks.push(Check { name: "padding-stability", pass: drift <= 1e-13, detail: format!("{drift:.1e}") });

    let fs = [sym(1, "z1"), sym(1, "conj(z1)")];
    let mut worst = 0.0f64;
    for t in [-1.0, 0.0, 1.0] {
        let v = antisym_trace(&fs, &WeightParam::new(t)?, 40)?.limit();
        worst = worst.max((v + 1.0).norm());
    }
    checks.push(Check { name: "helton-howe-disk", pass: worst <= 1e-6, detail: format!("max |Tr + 1| = {worst:.1e}") });
    Ok(checks)
}
