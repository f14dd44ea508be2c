//! Polynomial symbols in z and z̄ with exact coefficient arithmetic.

mod bisymbol;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::scalar::{convert, Float, Real};

pub use bisymbol::{bi_eval, BiSymbol};

/// Multi-index α ∈ N_0^n. Ordering is graded: by degree, then lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    degree: u32,
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        let degree = entries.iter().sum();
        MultiIndex { degree, entries }
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex { degree: 0, entries: vec![0; n] }
    }

    /// e_i (0-based axis).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex { degree: 1, entries: e }
    }

    /// e_{i_1,…,i_k} = e_{i_1} + … + e_{i_k} (0-based axes).
    pub fn from_axes(n: usize, axes: &[usize]) -> Self {
        let mut e = vec![0; n];
        for &i in axes {
            e[i] += 1;
        }
        MultiIndex::new(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.degree == 0
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex {
            degree: self.degree + o.degree,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn checked_sub(&self, o: &MultiIndex) -> Option<MultiIndex> {
        let mut e = Vec::with_capacity(self.entries.len());
        for (a, b) in self.entries.iter().zip(&o.entries) {
            e.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex { degree: self.degree - o.degree, entries: e })
    }

    /// Copy with entry `i` changed by `delta`; `None` if it would go negative.
    pub fn shifted(&self, i: usize, delta: i32) -> Option<MultiIndex> {
        let v = self.entries[i] as i64 + delta as i64;
        if v < 0 {
            return None;
        }
        let mut e = self.entries.clone();
        e[i] = v as u32;
        Some(MultiIndex { degree: (self.degree as i64 + delta as i64) as u32, entries: e })
    }

    /// α! = Π α_i!.
    pub fn factorial<R: Real>(&self) -> R {
        let mut acc = R::one();
        for &a in &self.entries {
            for k in 2..=a as i64 {
                acc = acc * R::from_int(k);
            }
        }
        acc
    }

    /// All multi-indices of dimension n and total degree d, in ascending order.
    pub fn of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == n {
                cur.push(left);
                out.push(MultiIndex::new(cur.clone()));
                cur.pop();
                return;
            }
            for a in 0..=left {
                cur.push(a);
                rec(n, left - a, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// z^α evaluated at z.
    pub fn pow<F: Float>(&self, z: &[Complex<F>]) -> Complex<F> {
        let mut acc = Complex::new(F::one(), F::zero());
        for (zi, &a) in z.iter().zip(&self.entries) {
            if a > 0 {
                acc = acc * zi.powu(a);
            }
        }
        acc
    }
}

/// Number of multi-indices of dimension n and degree ≤ d, i.e. C(d+n, n).
pub fn count_up_to(n: usize, d: usize) -> usize {
    let mut c: u128 = 1;
    for i in 1..=n as u128 {
        c = c * (d as u128 + i) / i;
    }
    c.min(usize::MAX as u128) as usize
}

pub type Coeff<R> = Complex<R>;

/// Finite sum Σ c_{γ,ι} z^γ z̄^ι. No zero coefficients are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySymbol<R: Real> {
    n: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), Coeff<R>>,
}

impl<R: Real> PolySymbol<R> {
    pub fn zero(n: usize) -> Self {
        PolySymbol { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Coeff<R>) -> Self {
        Self::monomial(n, MultiIndex::zero(n), MultiIndex::zero(n), c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Coeff::one())
    }

    pub fn real(n: usize, c: R) -> Self {
        Self::constant(n, Complex::new(c, R::zero()))
    }

    pub fn monomial(n: usize, gamma: MultiIndex, iota: MultiIndex, c: Coeff<R>) -> Self {
        assert_eq!(gamma.dim(), n);
        assert_eq!(iota.dim(), n);
        let mut s = Self::zero(n);
        if !c.is_zero() {
            s.terms.insert((gamma, iota), c);
        }
        s
    }

    /// The coordinate z_i (0-based axis).
    pub fn z(n: usize, i: usize) -> Self {
        Self::monomial(n, MultiIndex::unit(n, i), MultiIndex::zero(n), Coeff::one())
    }

    /// The conjugate coordinate z̄_i (0-based axis).
    pub fn zbar(n: usize, i: usize) -> Self {
        Self::monomial(n, MultiIndex::zero(n), MultiIndex::unit(n, i), Coeff::one())
    }

    /// |z|² = Σ z_i z̄_i.
    pub fn norm_sq(n: usize) -> Self {
        let mut s = Self::zero(n);
        for i in 0..n {
            s.add_term(MultiIndex::unit(n, i), MultiIndex::unit(n, i), Coeff::one());
        }
        s
    }

    /// (1 - |z|²)^m by binomial expansion.
    pub fn defect_power(n: usize, m: u32) -> Self {
        let base = &Self::one(n) - &Self::norm_sq(n);
        let mut acc = Self::one(n);
        for _ in 0..m {
            acc = &acc * &base;
        }
        acc
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, MultiIndex, Coeff<R>)>) -> Result<Self> {
        let mut s = Self::zero(n);
        for (g, i, c) in terms {
            if g.dim() != n || i.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.dim().max(i.dim()) });
            }
            s.add_term(g, i, c);
        }
        Ok(s)
    }

    pub(crate) fn add_term(&mut self, gamma: MultiIndex, iota: MultiIndex, c: Coeff<R>) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((gamma, iota)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let v = o.get().clone() + c;
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
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

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, &Coeff<R>)> {
        self.terms.iter().map(|((g, i), c)| (g, i, c))
    }

    pub fn coeff(&self, gamma: &MultiIndex, iota: &MultiIndex) -> Coeff<R> {
        self.terms.get(&(gamma.clone(), iota.clone())).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Maximal holomorphic degree d_h = max |γ|.
    pub fn d_h(&self) -> u32 {
        self.terms.keys().map(|(g, _)| g.degree()).max().unwrap_or(0)
    }

    /// Maximal anti-holomorphic degree d_a = max |ι|.
    pub fn d_a(&self) -> u32 {
        self.terms.keys().map(|(_, i)| i.degree()).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|(g, i)| g.degree() + i.degree()).max().unwrap_or(0)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|(_, i)| i.is_zero())
    }

    pub fn scale(&self, c: &Coeff<R>) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, i), v) in &self.terms {
            s.add_term(g.clone(), i.clone(), v.clone() * c.clone());
        }
        s
    }

    pub fn scale_real(&self, c: R) -> Self {
        self.scale(&Complex::new(c, R::zero()))
    }

    /// Complex conjugate symbol: swaps (γ, ι) and conjugates coefficients.
    pub fn conj(&self) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, i), v) in &self.terms {
            s.add_term(i.clone(), g.clone(), v.conj());
        }
        s
    }

    /// ∂/∂z_i (0-based axis).
    pub fn d_holo(&self, i: usize) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, io), v) in &self.terms {
            let k = g.entries()[i];
            if k > 0 {
                let c = v.clone() * Complex::new(R::from_int(k as i64), R::zero());
                s.add_term(g.shifted(i, -1).unwrap(), io.clone(), c);
            }
        }
        s
    }

    /// ∂/∂z̄_i (0-based axis).
    pub fn d_anti(&self, i: usize) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, io), v) in &self.terms {
            let k = io.entries()[i];
            if k > 0 {
                let c = v.clone() * Complex::new(R::from_int(k as i64), R::zero());
                s.add_term(g.clone(), io.shifted(i, -1).unwrap(), c);
            }
        }
        s
    }

    /// R a = Σ z_i ∂_i a (multiplies each term by |γ|).
    pub fn radial_r(&self) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, i), v) in &self.terms {
            s.add_term(g.clone(), i.clone(), v.clone() * Complex::new(R::from_int(g.degree() as i64), R::zero()));
        }
        s
    }

    /// R̄ a = Σ z̄_i ∂̄_i a (multiplies each term by |ι|).
    pub fn radial_rbar(&self) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, i), v) in &self.terms {
            s.add_term(g.clone(), i.clone(), v.clone() * Complex::new(R::from_int(i.degree() as i64), R::zero()));
        }
        s
    }

    /// Δa = 4 ∂∂̄ a on the disk.
    pub fn laplacian_disk(&self) -> Result<Self> {
        if self.n != 1 {
            return domain("the disk Laplacian needs n = 1");
        }
        Ok(self.d_holo(0).d_anti(0).scale_real(R::from_int(4)))
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.n != o.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: o.n });
        }
        let mut s = Self::zero(self.n);
        for ((g1, i1), c1) in &self.terms {
            for ((g2, i2), c2) in &o.terms {
                s.add_term(g1.add(g2), i1.add(i2), c1.clone() * c2.clone());
            }
        }
        Ok(s)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Exact quotient by (1 - |z|²). The candidate quotient is the truncated
    /// geometric series p Σ_k |z|^{2k}; divisibility is confirmed by multiplying back.
    pub fn div_defect(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let deg = self.total_degree();
        if deg < 2 {
            return Err(Error::NotDivisible);
        }
        let max_q = deg - 2;
        let r2 = Self::norm_sq(self.n);
        let mut q = Self::zero(self.n);
        let mut cur = self.clone();
        while !cur.is_zero() {
            let kept: Vec<_> = cur
                .terms
                .iter()
                .filter(|((g, i), _)| g.degree() + i.degree() <= max_q)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if kept.is_empty() {
                break;
            }
            let mut part = Self::zero(self.n);
            for ((g, i), v) in kept {
                part.add_term(g, i, v);
            }
            q = &q + &part;
            cur = &part * &r2;
        }
        let back = &q * &Self::defect_power(self.n, 1);
        let diff = &back - self;
        let scale = self.terms.values().map(|c| c.re.magnitude() + c.im.magnitude()).fold(R::zero(), |a, b| {
            if b > a {
                b
            } else {
                a
            }
        });
        for c in diff.terms.values() {
            if !(c.re.negligible(&scale) && c.im.negligible(&scale)) {
                return Err(Error::NotDivisible);
            }
        }
        Ok(q)
    }

    pub fn div_defect_power(&self, m: u32) -> Result<Self> {
        let mut q = self.clone();
        for _ in 0..m {
            q = q.div_defect()?;
        }
        Ok(q)
    }

    /// Drops coefficients whose real and imaginary parts are negligible
    /// relative to `scale` (no-op for exact coefficients unless exactly zero).
    pub fn cleaned(&self, scale: &R) -> Self {
        let mut s = Self::zero(self.n);
        for ((g, i), c) in &self.terms {
            if !(c.re.negligible(scale) && c.im.negligible(scale)) {
                s.add_term(g.clone(), i.clone(), c.clone());
            }
        }
        s
    }

    pub fn eval<F: Float>(&self, z: &[Complex<F>]) -> Complex<F> {
        assert_eq!(z.len(), self.n, "point dimension");
        let zb: Vec<Complex<F>> = z.iter().map(|v| v.conj()).collect();
        let mut acc = Complex::new(F::zero(), F::zero());
        for ((g, i), c) in &self.terms {
            let cf = Complex::new(convert::<R, F>(&c.re), convert::<R, F>(&c.im));
            acc = acc + cf * g.pow(z) * i.pow(&zb);
        }
        acc
    }

    /// Coefficient conversion to another scalar type.
    pub fn convert<S: Real>(&self) -> PolySymbol<S> {
        let mut s = PolySymbol::zero(self.n);
        for ((g, i), c) in &self.terms {
            s.add_term(g.clone(), i.clone(), Complex::new(convert(&c.re), convert(&c.im)));
        }
        s
    }

    /// The symbol x ↦ a(Ux): each z_i becomes Σ_k U_ik z_k and z̄_i its conjugate.
    pub fn linear_substitution(&self, u: &[Vec<Coeff<R>>]) -> Result<Self> {
        let n = self.n;
        if u.len() != n || u.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: u.len() });
        }
        let rows: Vec<Self> = (0..n)
            .map(|i| {
                let mut r = Self::zero(n);
                for k in 0..n {
                    r.add_term(MultiIndex::unit(n, k), MultiIndex::zero(n), u[i][k].clone());
                }
                r
            })
            .collect();
        let rows_bar: Vec<Self> = rows.iter().map(|r| r.conj()).collect();
        let mut out = Self::zero(n);
        for ((g, i), c) in &self.terms {
            let mut term = Self::constant(n, c.clone());
            for (ax, &e) in g.entries().iter().enumerate() {
                term = &term * &rows[ax].pow(e);
            }
            for (ax, &e) in i.entries().iter().enumerate() {
                term = &term * &rows_bar[ax].pow(e);
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Parses the text grammar (see `parse` module) in dimension n.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        parse::parse_symbol(n, text)
    }

    pub fn to_literal(&self) -> String {
        self.to_string()
    }
}

/// Coefficient-wise convolution product.
pub fn sym_mul<R: Real>(a: &PolySymbol<R>, b: &PolySymbol<R>) -> Result<PolySymbol<R>> {
    a.try_mul(b)
}

pub fn sym_conj<R: Real>(a: &PolySymbol<R>) -> PolySymbol<R> {
    a.conj()
}

fn binop<R: Real>(a: &PolySymbol<R>, b: &PolySymbol<R>, sign: bool) -> PolySymbol<R> {
    assert_eq!(a.n, b.n, "symbol dimension mismatch");
    let mut s = a.clone();
    for ((g, i), c) in &b.terms {
        s.add_term(g.clone(), i.clone(), if sign { c.clone() } else { -c.clone() });
    }
    s
}

impl<R: Real> Add for &PolySymbol<R> {
    type Output = PolySymbol<R>;
    fn add(self, o: Self) -> PolySymbol<R> {
        binop(self, o, true)
    }
}

impl<R: Real> Sub for &PolySymbol<R> {
    type Output = PolySymbol<R>;
    fn sub(self, o: Self) -> PolySymbol<R> {
        binop(self, o, false)
    }
}

/// Panics on dimension mismatch; use [`sym_mul`] for a checked product.
impl<R: Real> Mul for &PolySymbol<R> {
    type Output = PolySymbol<R>;
    fn mul(self, o: Self) -> PolySymbol<R> {
        self.try_mul(o).expect("symbol dimension mismatch")
    }
}

impl<R: Real> Neg for &PolySymbol<R> {
    type Output = PolySymbol<R>;
    fn neg(self) -> PolySymbol<R> {
        self.scale_real(-R::one())
    }
}

fn coeff_literal<R: Real>(c: &Coeff<R>) -> String {
    if c.im.is_zero() {
        return c.re.to_literal();
    }
    let im_abs_lit = if c.im < R::zero() { (-c.im.clone()).to_literal() } else { c.im.to_literal() };
    let sign = if c.im < R::zero() { "-" } else { "+" };
    if c.re.is_zero() {
        if c.im < R::zero() {
            format!("-{im_abs_lit}i")
        } else {
            format!("{im_abs_lit}i")
        }
    } else {
        format!("{}{sign}{im_abs_lit}i", c.re.to_literal())
    }
}

impl<R: Real> fmt::Display for PolySymbol<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((g, i), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors = Vec::new();
            for (k, &e) in g.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("z{}", k + 1)),
                    _ => factors.push(format!("z{}^{}", k + 1, e)),
                }
            }
            for (k, &e) in i.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("conj(z{})", k + 1)),
                    _ => factors.push(format!("conj(z{})^{}", k + 1, e)),
                }
            }
            let unit = c.is_one();
            if factors.is_empty() {
                write!(f, "({})", coeff_literal(c))?;
            } else if unit {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "({})*{}", coeff_literal(c), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = PolySymbol<BigRational>;

    fn q(n: usize, s: &str) -> Q {
        Q::parse(n, s).unwrap()
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(MultiIndex::of_degree(2, 2).len(), 3);
        assert_eq!(MultiIndex::of_degree(3, 2).len(), 6);
        assert_eq!(count_up_to(2, 18), 190);
        let v = MultiIndex::of_degree(2, 2);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn basic_algebra() {
        let a = q(1, "(z1 + conj(z1))^2");
        assert_eq!(a, q(1, "z1^2 + 2*z1*z1~ + conj(z1)^2"));
        assert_eq!(q(1, "z1").conj(), q(1, "conj(z1)"));
        assert_eq!(q(1, "i*z1*conj(z1)^2").conj(), q(1, "-i*z1^2*conj(z1)"));
        assert_eq!(q(1, "z1^2").d_holo(0), q(1, "2*z1"));
        assert!(q(1, "z1").d_anti(0).is_zero());
        assert_eq!(q(1, "z1*conj(z1)").d_holo(0), q(1, "conj(z1)"));
        assert_eq!(q(2, "defect(1)").radial_r(), q(2, "-z1*conj(z1) - z2*conj(z2)"));
        assert!(q(1, "z1").radial_rbar().is_zero());
    }

    #[test]
    fn laplacian_and_defect() {
        assert_eq!(q(1, "z1*conj(z1)").laplacian_disk().unwrap(), q(1, "4"));
        assert!(q(1, "z1^2").laplacian_disk().unwrap().is_zero());
        assert_eq!(q(1, "(z1*conj(z1))^2").laplacian_disk().unwrap(), q(1, "16*z1*conj(z1)"));
        assert!(q(2, "z1").laplacian_disk().is_err());
        assert_eq!(Q::defect_power(1, 1), q(1, "1 - z1*conj(z1)"));
        let r2 = q(2, "z1*z1~ + z2*z2~");
        assert_eq!(Q::defect_power(2, 2), &(&Q::one(2) - &r2.scale_real(BigRational::from_int(2))) + &(&r2 * &r2));
        assert_eq!(Q::defect_power(3, 0), Q::one(3));
    }

    #[test]
    fn exact_defect_division() {
        let p = &q(2, "z1^2*conj(z2) + 3 - i*z2") * &Q::defect_power(2, 3);
        assert_eq!(p.div_defect_power(3).unwrap(), q(2, "z1^2*conj(z2) + 3 - i*z2"));
        assert_eq!(q(1, "z1").div_defect(), Err(Error::NotDivisible));
        assert_eq!(q(1, "1 - z1*z1~ + z1").div_defect(), Err(Error::NotDivisible));
    }

    #[test]
    fn display_round_trip() {
        for s in ["0", "3/4 - 2/7i*z1*conj(z2)^3", "(1+i)*z2^4 + defect(2)", "-i", "5/2i*z1"] {
            let a = q(2, s);
            assert_eq!(Q::parse(2, &a.to_string()).unwrap(), a, "{s} -> {a}");
        }
        let f = PolySymbol::<f64>::parse(1, "0.1*z1 - 1e-17i*conj(z1)^2 + 1/3").unwrap();
        assert_eq!(PolySymbol::<f64>::parse(1, &f.to_string()).unwrap(), f);
    }

    #[test]
    fn evaluation() {
        let a = PolySymbol::<f64>::parse(2, "z1*conj(z2)").unwrap();
        let z = [Complex::new(0.3, 0.1), Complex::new(-0.2, 0.4)];
        let v = a.eval(&z);
        let w = z[0] * z[1].conj();
        assert!((v - w).norm() < 1e-16);
        assert_eq!(PolySymbol::<f64>::one(2).eval(&z), Complex::new(1.0, 0.0));
    }
}
