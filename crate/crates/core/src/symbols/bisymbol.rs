//! Two-point symbols in (z, z̄, w, w̄), used for the D_{i,j} operator words.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use super::{Coeff, MultiIndex, PolySymbol};
use crate::scalar::{convert, Float, Real};

type Key = (MultiIndex, MultiIndex, MultiIndex, MultiIndex);

/// Σ c z^{γ_z} z̄^{ι_z} w^{γ_w} w̄^{ι_w}.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSymbol<R: Real> {
    n: usize,
    terms: BTreeMap<Key, Coeff<R>>,
}

impl<R: Real> BiSymbol<R> {
    pub fn zero(n: usize) -> Self {
        BiSymbol { n, terms: BTreeMap::new() }
    }

    fn add_term(&mut self, k: Key, c: Coeff<R>) {
        if c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&k) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(k, v);
        }
    }

    /// f(z) g(w).
    pub fn product(f: &PolySymbol<R>, g: &PolySymbol<R>) -> Self {
        assert_eq!(f.dim(), g.dim());
        let mut s = Self::zero(f.dim());
        for (g1, i1, c1) in f.terms() {
            for (g2, i2, c2) in g.terms() {
                s.add_term((g1.clone(), i1.clone(), g2.clone(), i2.clone()), c1.clone() * c2.clone());
            }
        }
        s
    }

    /// ⟨z, w⟩ = Σ z_i w̄_i.
    pub fn inner(n: usize) -> Self {
        let mut s = Self::zero(n);
        let z0 = MultiIndex::zero(n);
        for i in 0..n {
            let e = MultiIndex::unit(n, i);
            s.add_term((e.clone(), z0.clone(), z0.clone(), e), Coeff::new(R::one(), R::zero()));
        }
        s
    }

    pub fn one(n: usize) -> Self {
        let z0 = MultiIndex::zero(n);
        let mut s = Self::zero(n);
        s.add_term((z0.clone(), z0.clone(), z0.clone(), z0), Coeff::new(R::one(), R::zero()));
        s
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (k, c) in &o.terms {
            s.add_term(k.clone(), c.clone());
        }
        s
    }

    pub fn scale(&self, c: &Coeff<R>) -> Self {
        let mut s = Self::zero(self.n);
        for (k, v) in &self.terms {
            s.add_term(k.clone(), v.clone() * c.clone());
        }
        s
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut s = Self::zero(self.n);
        for ((a1, b1, c1, d1), v1) in &self.terms {
            for ((a2, b2, c2, d2), v2) in &o.terms {
                s.add_term((a1.add(a2), b1.add(b2), c1.add(c2), d1.add(d2)), v1.clone() * v2.clone());
            }
        }
        s
    }

    /// ∂/∂z_i.
    pub fn d_z(&self, i: usize) -> Self {
        let mut s = Self::zero(self.n);
        for ((gz, iz, gw, iw), v) in &self.terms {
            let k = gz.entries()[i];
            if k > 0 {
                let c = v.clone() * Coeff::new(R::from_int(k as i64), R::zero());
                s.add_term((gz.shifted(i, -1).unwrap(), iz.clone(), gw.clone(), iw.clone()), c);
            }
        }
        s
    }

    /// ∂/∂w̄_j.
    pub fn d_wbar(&self, j: usize) -> Self {
        let mut s = Self::zero(self.n);
        for ((gz, iz, gw, iw), v) in &self.terms {
            let k = iw.entries()[j];
            if k > 0 {
                let c = v.clone() * Coeff::new(R::from_int(k as i64), R::zero());
                s.add_term((gz.clone(), iz.clone(), gw.clone(), iw.shifted(j, -1).unwrap()), c);
            }
        }
        s
    }

    /// D_{i,j} = (1 - ⟨z,w⟩)² ∂_{z_i} ∂̄_{w_j}.
    pub fn apply_d(&self, i: usize, j: usize) -> Self {
        let one = Self::one(self.n);
        let k = one.add(&Self::inner(self.n).scale(&Coeff::new(-R::one(), R::zero())));
        let k2 = k.mul(&k);
        k2.mul(&self.d_z(i).d_wbar(j))
    }

    /// Substitutes w = z.
    pub fn restrict_diagonal(&self) -> PolySymbol<R> {
        let mut s = PolySymbol::zero(self.n);
        for ((gz, iz, gw, iw), v) in &self.terms {
            s.add_term(gz.add(gw), iz.add(iw), v.clone());
        }
        s
    }

    pub fn eval<F: Float>(&self, z: &[Complex<F>], w: &[Complex<F>]) -> Complex<F> {
        let zb: Vec<_> = z.iter().map(|v| v.conj()).collect();
        let wb: Vec<_> = w.iter().map(|v| v.conj()).collect();
        let mut acc = Complex::new(F::zero(), F::zero());
        for ((gz, iz, gw, iw), c) in &self.terms {
            let cf = Complex::new(convert::<R, F>(&c.re), convert::<R, F>(&c.im));
            acc = acc + cf * gz.pow(z) * iz.pow(&zb) * gw.pow(w) * iw.pow(&wb);
        }
        acc
    }
}

/// bi_eval(a, z, w).
pub fn bi_eval<R: Real, F: Float>(a: &BiSymbol<R>, z: &[Complex<F>], w: &[Complex<F>]) -> Complex<F> {
    a.eval(z, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = PolySymbol<BigRational>;

    #[test]
    fn restriction_examples() {
        let f = Q::parse(2, "z1^2 + 3*conj(z2)").unwrap();
        assert_eq!(BiSymbol::product(&f, &Q::one(2)).restrict_diagonal(), f);
        let p = BiSymbol::product(&Q::parse(1, "z1").unwrap(), &Q::parse(1, "conj(z1)").unwrap());
        assert_eq!(p.restrict_diagonal(), Q::parse(1, "z1*conj(z1)").unwrap());
        // (z - w)(z̄ - w̄) vanishes on the diagonal
        let z = BiSymbol::product(&Q::parse(1, "z1").unwrap(), &Q::one(1));
        let w = BiSymbol::product(&Q::one(1), &Q::parse(1, "z1").unwrap());
        let zb = BiSymbol::product(&Q::parse(1, "conj(z1)").unwrap(), &Q::one(1));
        let wb = BiSymbol::product(&Q::one(1), &Q::parse(1, "conj(z1)").unwrap());
        let m1 = Coeff::new(BigRational::from_int(-1), BigRational::from_int(0));
        let e = z.add(&w.scale(&m1)).mul(&zb.add(&wb.scale(&m1)));
        assert!(e.restrict_diagonal().is_zero());
    }

    #[test]
    fn d_operator_on_simple_product() {
        // D_{11}[z w̄] = (1 - z w̄)^2
        let p = BiSymbol::product(&Q::parse(1, "z1").unwrap(), &Q::parse(1, "conj(z1)").unwrap());
        let d = p.apply_d(0, 0).restrict_diagonal();
        assert_eq!(d, Q::defect_power(1, 2));
    }
}
