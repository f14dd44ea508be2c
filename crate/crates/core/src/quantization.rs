//! Bilinear differential operators C_l(f,g) of the Toeplitz product
//! expansion, sphere moments d_{α,β}(z), the normal/tangential split of C_1
//! and the Poisson bracket.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{domain, Error, Result};
use crate::geometry::{a_matrix, Point};
use crate::scalar::{Float, Real};
use crate::symbols::{BiSymbol, Coeff, MultiIndex, PolySymbol};

pub const MAX_WORD_LEN: usize = 4;

/// ∫_{S_n} ζ^α ζ̄^β dσ/σ_{2n-1} = δ_{αβ} (n-1)! α!/(n-1+|α|)!.
pub fn sphere_moment<R: Real>(n: usize, alpha: &MultiIndex, beta: &MultiIndex) -> R {
    if alpha != beta {
        return R::zero();
    }
    let mut acc: R = alpha.factorial();
    for j in 0..alpha.degree() as i64 {
        acc = acc / R::from_int(n as i64 + j);
    }
    acc
}

type HoloPoly<F> = BTreeMap<MultiIndex, Complex<F>>;

/// Π_i (A ζ)_i^{α_i} as a polynomial in ζ.
fn pushforward_power<F: Float>(a: &nalgebra::DMatrix<Complex<F>>, alpha: &MultiIndex) -> HoloPoly<F> {
    let n = alpha.dim();
    let mut poly: HoloPoly<F> = BTreeMap::new();
    poly.insert(MultiIndex::zero(n), Complex::one());
    for (i, &e) in alpha.entries().iter().enumerate() {
        for _ in 0..e {
            let mut next: HoloPoly<F> = BTreeMap::new();
            for (m, c) in &poly {
                for k in 0..n {
                    let v = a[(i, k)];
                    if v.is_zero() {
                        continue;
                    }
                    let key = m.shifted(k, 1).expect("increment");
                    let e = next.entry(key).or_insert_with(Complex::zero);
                    *e = *e + c * v;
                }
            }
            poly = next;
        }
    }
    poly
}

/// d_{α,β}(z) = ∫_{S_n} (A_zζ)^α conj(A_zζ)^β dσ/σ_{2n-1}, by expanding both
/// powers in ζ and integrating termwise.
pub fn d_alpha_beta<F: Float>(z: &Point<F>, alpha: &MultiIndex, beta: &MultiIndex) -> Result<Complex<F>> {
    let n = z.dim();
    if alpha.dim() != n || beta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.dim().max(beta.dim()) });
    }
    if alpha.degree() != beta.degree() {
        return Ok(Complex::zero());
    }
    let a = a_matrix(z)?;
    let p = pushforward_power(&a, alpha);
    let q = pushforward_power(&a, beta);
    let mut acc = Complex::zero();
    for (m, c) in &p {
        if let Some(d) = q.get(m) {
            acc = acc + c * d.conj() * sphere_moment::<F>(n, m, m);
        }
    }
    Ok(acc)
}

/// The entry (i,j) of A_z A_z^* = (1-|z|²)(I - z z^*) as a symbol.
fn aa_star_entry<R: Real>(n: usize, i: usize, j: usize) -> PolySymbol<R> {
    let mut m = PolySymbol::monomial(n, MultiIndex::unit(n, i), MultiIndex::unit(n, j), -Coeff::<R>::one());
    if i == j {
        m = &m + &PolySymbol::one(n);
    }
    &m * &PolySymbol::defect_power(n, 1)
}

fn axes_of(alpha: &MultiIndex) -> Vec<usize> {
    alpha.entries().iter().enumerate().flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize)).collect()
}

fn permutations(l: usize) -> Vec<Vec<usize>> {
    if l == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(l - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, l - 1);
            out.push(q);
        }
    }
    out
}

/// d_{α,β} as a polynomial symbol: for |α| = |β| = l the Gaussian pairing
/// gives (n-1)!/(n-1+l)! Σ_π Π_r (A_zA_z^*)_{i_r, j_π(r)}.
pub fn d_symbol<R: Real>(alpha: &MultiIndex, beta: &MultiIndex) -> PolySymbol<R> {
    let n = alpha.dim();
    if alpha.degree() != beta.degree() {
        return PolySymbol::zero(n);
    }
    let is = axes_of(alpha);
    let js = axes_of(beta);
    let l = is.len();
    let mut sum = PolySymbol::zero(n);
    for p in permutations(l) {
        let mut term = PolySymbol::one(n);
        for r in 0..l {
            term = &term * &aa_star_entry(n, is[r], js[p[r]]);
        }
        sum = &sum + &term;
    }
    let mut scale = R::one();
    for j in 0..l as i64 {
        scale = scale / R::from_int(n as i64 + j);
    }
    sum.scale_real(scale)
}

/// A word D_{i_l,j_l} ⋯ D_{i_1,j_1}; pairs are listed in application order
/// and use 0-based axes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DOperatorWord {
    pairs: Vec<(usize, usize)>,
}

impl DOperatorWord {
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.len() > MAX_WORD_LEN {
            return Err(Error::Unsupported(format!("D-words longer than {MAX_WORD_LEN}")));
        }
        if pairs.iter().any(|&(i, j)| i >= n || j >= n) {
            return domain(format!("D-word index out of range for n = {n}"));
        }
        Ok(DOperatorWord { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn apply<R: Real>(&self, a: &BiSymbol<R>) -> BiSymbol<R> {
        self.pairs.iter().fold(a.clone(), |acc, &(i, j)| acc.apply_d(i, j))
    }

    /// e_{i_1,…,i_l}
    pub fn alpha(&self, n: usize) -> MultiIndex {
        MultiIndex::from_axes(n, &self.pairs.iter().map(|p| p.0).collect::<Vec<_>>())
    }

    /// e_{j_1,…,j_l}
    pub fn beta(&self, n: usize) -> MultiIndex {
        MultiIndex::from_axes(n, &self.pairs.iter().map(|p| p.1).collect::<Vec<_>>())
    }
}

/// Σ over all n^{2l} words of the diagonal restriction of the word applied to
/// f(z)g(w), grouped by (e_{i…}, e_{j…}) since d depends only on those.
fn word_groups<R: Real>(
    f: &PolySymbol<R>,
    g: &PolySymbol<R>,
    l: usize,
) -> Result<BTreeMap<(MultiIndex, MultiIndex), PolySymbol<R>>> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    if l > MAX_WORD_LEN {
        return Err(Error::Unsupported(format!("C_l for l = {l} > {MAX_WORD_LEN}")));
    }
    let n = f.dim();
    let mut groups = BTreeMap::new();
    let mut stack = vec![(BiSymbol::product(f, g), MultiIndex::zero(n), MultiIndex::zero(n), 0usize)];
    while let Some((sym, a, b, depth)) = stack.pop() {
        if sym.is_zero() {
            continue;
        }
        if depth == l {
            let entry = groups.entry((a, b)).or_insert_with(|| PolySymbol::zero(n));
            *entry = &*entry + &sym.restrict_diagonal();
            continue;
        }
        for i in 0..n {
            let di = sym.d_z(i);
            if di.is_zero() {
                continue;
            }
            for j in 0..n {
                let next = di.d_wbar(j);
                if next.is_zero() {
                    continue;
                }
                let next = next.mul(&kernel_sq(n));
                stack.push((next, a.shifted(i, 1).unwrap(), b.shifted(j, 1).unwrap(), depth + 1));
            }
        }
    }
    Ok(groups)
}

/// (1 - ⟨z,w⟩)².
fn kernel_sq<R: Real>(n: usize) -> BiSymbol<R> {
    let k = BiSymbol::one(n).add(&BiSymbol::inner(n).scale(&-Coeff::<R>::one()));
    k.mul(&k)
}

fn sign<R: Real>(l: usize) -> R {
    if l % 2 == 0 {
        R::one()
    } else {
        -R::one()
    }
}

/// C_l(f,g)(z) through the D-word expansion with d_{α,β}(z) integrated
/// numerically from A_z.
pub fn c_l<R: Real, F: Float>(f: &PolySymbol<R>, g: &PolySymbol<R>, l: usize, z: &Point<F>) -> Result<Complex<F>> {
    if z.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: z.dim() });
    }
    let groups = word_groups(f, g, l)?;
    let mut acc = Complex::zero();
    let mut cache: HashMap<(MultiIndex, MultiIndex), Complex<F>> = HashMap::new();
    for ((a, b), sym) in &groups {
        let d = match cache.get(&(a.clone(), b.clone())) {
            Some(v) => *v,
            None => {
                let v = d_alpha_beta(z, a, b)?;
                cache.insert((a.clone(), b.clone()), v);
                v
            }
        };
        acc = acc + d * sym.eval(z.coords());
    }
    let defect = F::one() - z.norm_sq();
    Ok(acc * (sign::<F>(l) / defect.powi(2 * l as i32)))
}

/// C_l(f,g) as an exact symbol, with d_{α,β} from the pairing formula. The
/// (1-|z|²)^{-2l} prefactor is removed by exact division; `NotDivisible`
/// means the value is not a polynomial.
pub fn c_l_symbol<R: Real>(f: &PolySymbol<R>, g: &PolySymbol<R>, l: usize) -> Result<PolySymbol<R>> {
    let groups = word_groups(f, g, l)?;
    let n = f.dim();
    let mut num = PolySymbol::zero(n);
    for ((a, b), sym) in &groups {
        num = &num + &(&d_symbol::<R>(a, b) * sym);
    }
    Ok(num.div_defect_power(2 * l as u32)?.scale_real(sign(l)))
}

/// C_1(f,g) = -(1/n)(1-|z|²)[Σ_i ∂_i f ∂̄_i g - Rf·R̄g].
pub fn c1_closed<R: Real>(f: &PolySymbol<R>, g: &PolySymbol<R>) -> Result<PolySymbol<R>> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    let n = f.dim();
    let mut bracket = PolySymbol::zero(n);
    for i in 0..n {
        bracket = &bracket + &(&f.d_holo(i) * &g.d_anti(i));
    }
    bracket = &bracket - &(&f.radial_r() * &g.radial_rbar());
    Ok((&PolySymbol::defect_power(n, 1) * &bracket).scale_real(-R::one() / R::from_int(n as i64)))
}

/// A symbol optionally divided by |z|².
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSymbol<R: Real> {
    pub numerator: PolySymbol<R>,
    pub over_norm_sq: bool,
}

impl<R: Real> SplitSymbol<R> {
    /// At z = 0 a |z|^{-2} term has no limit in general; the value returned
    /// there is the average over directions, Σ_i c_{e_i,e_i}/n of the
    /// numerator's quadratic part.
    pub fn eval<F: Float>(&self, z: &[Complex<F>]) -> Result<Complex<F>> {
        let num = self.numerator.eval(z);
        if !self.over_norm_sq {
            return Ok(num);
        }
        let r2 = z.iter().fold(F::zero(), |a, c| a + c.norm_sqr());
        if r2 > F::zero() {
            return Ok(num / r2);
        }
        let n = self.numerator.dim();
        let mut avg = Complex::zero();
        for (g, i, c) in self.numerator.terms() {
            let deg = g.degree() + i.degree();
            if deg < 2 {
                return domain("numerator does not vanish to second order at 0");
            }
            if deg == 2 && g == i {
                avg = avg + Complex::new(crate::scalar::convert::<R, F>(&c.re), crate::scalar::convert::<R, F>(&c.im));
            }
        }
        Ok(avg / F::cu(n))
    }
}

/// Normal and tangential parts of C_1:
/// C_N = -(1/n)(1-|z|²)² Rf R̄g / |z|²,
/// C_T = -(1/n)(1-|z|²)[|z|² Σ ∂_if ∂̄_ig - Rf R̄g] / |z|².
pub fn c1_split<R: Real>(f: &PolySymbol<R>, g: &PolySymbol<R>) -> Result<(SplitSymbol<R>, SplitSymbol<R>)> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    let n = f.dim();
    let scale = -R::one() / R::from_int(n as i64);
    let rr = &f.radial_r() * &g.radial_rbar();
    let cn = (&PolySymbol::defect_power(n, 2) * &rr).scale_real(scale.clone());
    let mut sum = PolySymbol::zero(n);
    for i in 0..n {
        sum = &sum + &(&f.d_holo(i) * &g.d_anti(i));
    }
    let inner = &(&PolySymbol::norm_sq(n) * &sum) - &rr;
    let ct = (&PolySymbol::defect_power(n, 1) * &inner).scale_real(scale);
    Ok((SplitSymbol { numerator: cn, over_norm_sq: true }, SplitSymbol { numerator: ct, over_norm_sq: true }))
}

/// {f,g} := i n (C_1(f,g) - C_1(g,f)).
pub fn poisson_bracket<R: Real>(f: &PolySymbol<R>, g: &PolySymbol<R>) -> Result<PolySymbol<R>> {
    let n = f.dim();
    let diff = &c1_closed(f, g)? - &c1_closed(g, f)?;
    Ok(diff.scale(&Complex::new(R::zero(), R::from_int(n as i64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = PolySymbol<BigRational>;

    fn q(n: usize, s: &str) -> Q {
        Q::parse(n, s).unwrap()
    }

    fn pt(c: &[(f64, f64)]) -> Point<f64> {
        Point::new(c.iter().map(|&(a, b)| Complex::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn sphere_moments() {
        let z0 = MultiIndex::zero(3);
        assert_eq!(sphere_moment::<f64>(3, &z0, &z0), 1.0);
        let e1 = MultiIndex::unit(2, 0);
        assert_eq!(sphere_moment::<f64>(2, &e1, &e1), 0.5);
        assert_eq!(sphere_moment::<f64>(2, &e1, &MultiIndex::unit(2, 1)), 0.0);
    }

    #[test]
    fn d_on_first_axis() {
        let n = 3;
        let z = pt(&[(0.4, -0.3), (0.0, 0.0), (0.0, 0.0)]);
        let r2 = z.norm_sq();
        for a in MultiIndex::of_degree(n, 2).iter().chain(MultiIndex::of_degree(n, 3).iter()) {
            let d = d_alpha_beta(&z, a, a).unwrap();
            let fact: f64 = a.factorial();
            let mut want = (1.0 - r2).powi((a.entries()[0] + a.degree()) as i32) * fact;
            for j in 0..a.degree() {
                want /= (n as u32 - 1 + j + 1) as f64;
            }
            assert!((d - Complex::new(want, 0.0)).norm() < 1e-14, "{a:?}");
        }
        let d0 = d_alpha_beta(&Point::<f64>::origin(2), &MultiIndex::new(vec![1, 1]), &MultiIndex::new(vec![1, 1])).unwrap();
        assert!((d0.re - sphere_moment::<f64>(2, &MultiIndex::new(vec![1, 1]), &MultiIndex::new(vec![1, 1]))).abs() < 1e-15);
    }

    #[test]
    fn d_symbol_matches_integration() {
        let z = pt(&[(0.3, 0.1), (-0.2, 0.35)]);
        for (a, b) in [
            (MultiIndex::new(vec![1, 0]), MultiIndex::new(vec![0, 1])),
            (MultiIndex::new(vec![2, 1]), MultiIndex::new(vec![1, 2])),
            (MultiIndex::new(vec![1, 1]), MultiIndex::new(vec![1, 1])),
        ] {
            let sym = d_symbol::<f64>(&a, &b).eval(z.coords());
            let num = d_alpha_beta(&z, &a, &b).unwrap();
            assert!((sym - num).norm() < 1e-14);
            // Hermitian symmetry
            let swapped = d_alpha_beta(&z, &b, &a).unwrap();
            assert!((swapped - num.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn c0_and_c1_examples() {
        let z = pt(&[(0.3, -0.4)]);
        let (f, g) = (q(1, "z1"), q(1, "conj(z1)"));
        let c0 = c_l(&f, &g, 0, &z).unwrap();
        assert!((c0 - (&f * &g).eval(z.coords())).norm() < 1e-15);
        let want = -(1.0 - z.norm_sq()).powi(2);
        assert!((c_l(&f, &g, 1, &z).unwrap() - Complex::new(want, 0.0)).norm() < 1e-14);
        assert_eq!(c1_closed(&f, &g).unwrap(), Q::defect_power(1, 2).scale_real(BigRational::from_int(-1)));
        let (f2, g2) = (q(2, "z1"), q(2, "conj(z2)"));
        let want2 = (&Q::defect_power(2, 1) * &q(2, "z1*conj(z2)")).scale_real(BigRational::ratio(1, 2));
        assert_eq!(c1_closed(&f2, &g2).unwrap(), want2);
        assert!(c1_closed(&q(2, "3"), &g2).unwrap().is_zero());
    }

    #[test]
    fn c1_symbol_matches_closed_form() {
        let f = q(2, "z1^2 + 2*z2*conj(z1) + (1+i)");
        let g = q(2, "conj(z2)*z1 + conj(z1)^2 - 3/2*z2");
        assert_eq!(c_l_symbol(&f, &g, 1).unwrap(), c1_closed(&f, &g).unwrap());
    }

    #[test]
    fn split_examples() {
        let (cn, ct) = c1_split(&q(1, "z1"), &q(1, "conj(z1)")).unwrap();
        let z = [Complex::new(0.5, 0.2)];
        let want = -(1.0 - 0.29f64).powi(2);
        assert!((cn.eval(&z).unwrap().re - want).abs() < 1e-14);
        assert!(ct.eval(&z).unwrap().norm() < 1e-15);
        let (_, ct) = c1_split(&Q::defect_power(2, 1), &q(2, "conj(z1)")).unwrap();
        assert!(ct.numerator.is_zero());
    }

    #[test]
    fn bracket_examples() {
        let (f, g) = (q(1, "z1"), q(1, "conj(z1)"));
        let b = poisson_bracket(&f, &g).unwrap();
        let want = Q::defect_power(1, 2).scale(&Complex::new(BigRational::from_int(0), BigRational::from_int(-1)));
        assert_eq!(b, want);
        assert!(poisson_bracket(&f, &f).unwrap().is_zero());
    }
}
