//! Exact matrix entries of products of Toeplitz operators, computed by
//! pushing single monomials through the factors. No truncation is involved:
//! a Toeplitz operator with polynomial symbol maps z^μ to a finite
//! combination of monomials, so ⟨T_{f_1}⋯T_{f_k} z^α, z^α⟩/‖z^α‖² is a
//! finite sum. Diagonal entries do not depend on normalizing the basis.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special_fn::WeightParam;
use crate::symbols::{Coeff, MultiIndex, PolySymbol};

pub type SparseVec<R> = BTreeMap<MultiIndex, Coeff<R>>;

/// Linear combinations of products of Toeplitz operators.
#[derive(Debug, Clone)]
pub enum OpExpr<R: Real> {
    Identity,
    Toeplitz(PolySymbol<R>),
    /// Factors listed left to right; the rightmost acts first.
    Product(Vec<OpExpr<R>>),
    Sum(Vec<(Coeff<R>, OpExpr<R>)>),
}

impl<R: Real> OpExpr<R> {
    pub fn toeplitz(f: &PolySymbol<R>) -> Self {
        OpExpr::Toeplitz(f.clone())
    }

    pub fn product(factors: Vec<OpExpr<R>>) -> Self {
        OpExpr::Product(factors)
    }

    pub fn difference(a: OpExpr<R>, b: OpExpr<R>) -> Self {
        OpExpr::Sum(vec![(Coeff::new(R::one(), R::zero()), a), (Coeff::new(-R::one(), R::zero()), b)])
    }

    /// AB - BA.
    pub fn commutator(a: OpExpr<R>, b: OpExpr<R>) -> Self {
        Self::difference(OpExpr::Product(vec![a.clone(), b.clone()]), OpExpr::Product(vec![b, a]))
    }

    /// σ(f,g) = T_f T_g - T_{fg}.
    pub fn semi_commutator(f: &PolySymbol<R>, g: &PolySymbol<R>) -> Result<Self> {
        let fg = f.try_mul(g)?;
        Ok(Self::difference(
            OpExpr::Product(vec![Self::toeplitz(f), Self::toeplitz(g)]),
            Self::toeplitz(&fg),
        ))
    }

    pub fn scaled(self, c: Coeff<R>) -> Self {
        OpExpr::Sum(vec![(c, self)])
    }

    /// Largest holomorphic degree the operator can add to a monomial.
    pub fn raise(&self) -> u32 {
        match self {
            OpExpr::Identity => 0,
            OpExpr::Toeplitz(f) => f.d_h(),
            OpExpr::Product(fs) => fs.iter().map(|f| f.raise()).sum(),
            OpExpr::Sum(ts) => ts.iter().map(|(_, e)| e.raise()).max().unwrap_or(0),
        }
    }
}

/// ‖z^a‖²/‖z^ν‖² for ν ≤ a componentwise.
pub fn norm_ratio<R: Real>(n: usize, t: &WeightParam<R>, a: &MultiIndex, nu: &MultiIndex) -> R {
    let base = R::from_int(n as i64) + t.t().clone();
    let mut acc = R::one();
    for (&ai, &vi) in a.entries().iter().zip(nu.entries()) {
        for k in vi + 1..=ai {
            acc = acc * R::from_int(k as i64);
        }
    }
    for j in nu.degree() + 1..=a.degree() {
        acc = acc / (base.clone() + R::from_int(j as i64));
    }
    acc
}

/// Applies operator expressions to sparse vectors in the (unnormalized)
/// monomial basis of L²_{a,t}(B_n).
#[derive(Debug, Clone)]
pub struct DiagEngine<R: Real> {
    n: usize,
    t: WeightParam<R>,
}

fn axpy<R: Real>(acc: &mut SparseVec<R>, c: &Coeff<R>, v: &SparseVec<R>) {
    for (k, x) in v {
        let add = c.clone() * x.clone();
        match acc.get_mut(k) {
            Some(y) => {
                *y = y.clone() + add;
            }
            None => {
                acc.insert(k.clone(), add);
            }
        }
    }
}

impl<R: Real> DiagEngine<R> {
    pub fn new(n: usize, t: WeightParam<R>) -> Self {
        DiagEngine { n, t }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> &WeightParam<R> {
        &self.t
    }

    fn apply_toeplitz(&self, f: &PolySymbol<R>, v: &SparseVec<R>) -> SparseVec<R> {
        let mut out = SparseVec::new();
        for (mu, x) in v {
            for (g, i, c) in f.terms() {
                let a = mu.add(g);
                let Some(nu) = a.checked_sub(i) else {
                    continue;
                };
                let r = norm_ratio(self.n, &self.t, &a, &nu);
                let add = c.clone() * x.clone() * Coeff::new(r, R::zero());
                match out.get_mut(&nu) {
                    Some(y) => *y = y.clone() + add,
                    None => {
                        out.insert(nu, add);
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn apply(&self, e: &OpExpr<R>, v: &SparseVec<R>) -> SparseVec<R> {
        match e {
            OpExpr::Identity => v.clone(),
            OpExpr::Toeplitz(f) => self.apply_toeplitz(f, v),
            OpExpr::Product(fs) => {
                let mut cur = v.clone();
                for f in fs.iter().rev() {
                    if cur.is_empty() {
                        break;
                    }
                    cur = self.apply(f, &cur);
                }
                cur
            }
            OpExpr::Sum(ts) => {
                let mut acc = SparseVec::new();
                for (c, x) in ts {
                    axpy(&mut acc, c, &self.apply(x, v));
                }
                acc.retain(|_, c| !c.is_zero());
                acc
            }
        }
    }

    /// ⟨X e_α, e_α⟩ for the orthonormal basis vector e_α.
    pub fn diagonal(&self, e: &OpExpr<R>, alpha: &MultiIndex) -> Result<Coeff<R>> {
        if alpha.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: alpha.dim() });
        }
        let mut v = SparseVec::new();
        v.insert(alpha.clone(), Coeff::new(R::one(), R::zero()));
        Ok(self.apply(e, &v).remove(alpha).unwrap_or_else(Coeff::zero))
    }

    /// ⟨X e_α, e_β⟩ in the orthonormal basis.
    pub fn entry<F: crate::scalar::Float>(&self, e: &OpExpr<R>, beta: &MultiIndex, alpha: &MultiIndex) -> num_complex::Complex<F> {
        let mut v = SparseVec::new();
        v.insert(alpha.clone(), Coeff::new(R::one(), R::zero()));
        let out = self.apply(e, &v);
        let Some(c) = out.get(beta) else {
            return num_complex::Complex::new(F::zero(), F::zero());
        };
        let na: F = crate::scalar::convert(&crate::special_fn::monomial_norm_sq(self.n, &self.t, alpha));
        let nb: F = crate::scalar::convert(&crate::special_fn::monomial_norm_sq(self.n, &self.t, beta));
        let cf = num_complex::Complex::new(crate::scalar::convert::<R, F>(&c.re), crate::scalar::convert::<R, F>(&c.im));
        cf * (nb / na).sqrt()
    }

    /// Sum of diagonal entries over |α| = d, for d = 0..=max_degree. Entries
    /// are evaluated in parallel and added in graded order.
    pub fn shell_sums(&self, e: &OpExpr<R>, max_degree: usize) -> Result<Vec<Coeff<R>>> {
        let mut out = Vec::with_capacity(max_degree + 1);
        for d in 0..=max_degree {
            let idx = MultiIndex::of_degree(self.n, d as u32);
            let vals: Vec<Coeff<R>> = idx.par_iter().map(|a| self.diagonal(e, a)).collect::<Result<_>>()?;
            out.push(vals.into_iter().fold(Coeff::zero(), |a, b| a + b));
        }
        Ok(out)
    }
}
