//! Dense truncations of Toeplitz and Hankel-type operators in the
//! orthonormalized monomial basis e_α = z^α/‖z^α‖.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quantization::{c1_closed, c_l_symbol};
use crate::scalar::{convert, Float, Real};
use crate::special_fn::{c_coeff, monomial_norm_sq, WeightParam};
use crate::symbols::{count_up_to, MultiIndex, PolySymbol};

/// Default cap on the dimension of an assembled matrix.
pub const DEFAULT_BUDGET: usize = 20_000;

/// Monomials z^α with |α| ≤ N in graded order, with their squared norms.
#[derive(Debug, Clone)]
pub struct BasisTruncation<R: Real> {
    n: usize,
    t: WeightParam<R>,
    degree: usize,
    indices: Vec<MultiIndex>,
    norms_sq: Vec<R>,
    offsets: Vec<usize>,
    position: HashMap<MultiIndex, usize>,
}

impl<R: Real> BasisTruncation<R> {
    pub fn build(n: usize, t: WeightParam<R>, degree: usize) -> Self {
        let mut indices = Vec::with_capacity(count_up_to(n, degree));
        let mut offsets = Vec::with_capacity(degree + 2);
        for d in 0..=degree {
            offsets.push(indices.len());
            indices.extend(MultiIndex::of_degree(n, d as u32));
        }
        offsets.push(indices.len());
        let norms_sq = indices.iter().map(|a| monomial_norm_sq(n, &t, a)).collect();
        let position = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        BasisTruncation { n, t, degree, indices, norms_sq, offsets, position }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn weight(&self) -> &WeightParam<R> {
        &self.t
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn norms_sq(&self) -> &[R] {
        &self.norms_sq
    }

    /// Positions of the degree-d shell.
    pub fn shell(&self, d: usize) -> std::ops::Range<usize> {
        self.offsets[d]..self.offsets[d + 1]
    }

    /// Number of basis elements of degree ≤ d.
    pub fn prefix_len(&self, d: usize) -> usize {
        self.offsets[d.min(self.degree) + 1]
    }

    pub fn position(&self, a: &MultiIndex) -> Option<usize> {
        self.position.get(a).copied()
    }
}

pub fn build_basis<R: Real>(n: usize, t: WeightParam<R>, degree: usize) -> BasisTruncation<R> {
    BasisTruncation::build(n, t, degree)
}

/// Dense matrix on a truncated basis. Rows and columns of degree at most
/// `core_degree` carry the entries of the infinite matrix.
#[derive(Debug, Clone)]
pub struct OperatorMatrix<F: Float> {
    basis: Arc<BasisTruncation<F>>,
    entries: DMatrix<Complex<F>>,
    core_degree: usize,
}

impl<F: Float> OperatorMatrix<F> {
    pub fn new(basis: Arc<BasisTruncation<F>>, entries: DMatrix<Complex<F>>, core_degree: usize) -> Result<Self> {
        let m = basis.len();
        if entries.nrows() != m || entries.ncols() != m {
            return Err(Error::DimensionMismatch { expected: m, found: entries.nrows() });
        }
        if core_degree > basis.degree() {
            return crate::error::domain("core degree exceeds the basis degree");
        }
        Ok(OperatorMatrix { basis, entries, core_degree })
    }

    pub fn basis(&self) -> &BasisTruncation<F> {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<Complex<F>> {
        &self.entries
    }

    pub fn exact_core_degree(&self) -> usize {
        self.core_degree
    }

    pub fn core_len(&self) -> usize {
        self.basis.prefix_len(self.core_degree)
    }

    pub fn core(&self) -> DMatrix<Complex<F>> {
        let m = self.core_len();
        self.entries.view((0, 0), (m, m)).into_owned()
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { basis: self.basis.clone(), entries: self.entries.transpose().map(|c| c.conj()), core_degree: self.core_degree }
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.entries.shape() != o.entries.shape() {
            return Err(Error::DimensionMismatch { expected: self.entries.nrows(), found: o.entries.nrows() });
        }
        Ok(())
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(OperatorMatrix {
            basis: self.basis.clone(),
            entries: &self.entries - &o.entries,
            core_degree: self.core_degree.min(o.core_degree),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(OperatorMatrix {
            basis: self.basis.clone(),
            entries: &self.entries + &o.entries,
            core_degree: self.core_degree.min(o.core_degree),
        })
    }

    pub fn scale(&self, c: Complex<F>) -> Self {
        OperatorMatrix { basis: self.basis.clone(), entries: self.entries.map(|x| x * c), core_degree: self.core_degree }
    }

    /// Matrix product; the core shrinks to the smaller of the two.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(OperatorMatrix {
            basis: self.basis.clone(),
            entries: &self.entries * &o.entries,
            core_degree: self.core_degree.min(o.core_degree),
        })
    }

    pub fn with_core_degree(mut self, d: usize) -> Self {
        self.core_degree = d.min(self.basis.degree());
        self
    }

    /// Trace of the core block.
    pub fn core_trace(&self) -> Complex<F> {
        let m = self.core_len();
        (0..m).fold(Complex::new(F::zero(), F::zero()), |a, i| a + self.entries[(i, i)])
    }

    /// Writes `row,col,re,im` lines for the nonzero entries.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for j in 0..self.entries.ncols() {
            for i in 0..self.entries.nrows() {
                let v = self.entries[(i, j)];
                if v.re != F::zero() || v.im != F::zero() {
                    writeln!(w, "{i},{j},{:e},{:e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Matrix of T_f: entry (β, α) is c ‖z^{α+γ}‖²/(‖z^α‖‖z^β‖) for each term
/// c z^γ z̄^ι with β = α + γ - ι.
pub fn toeplitz<F: Float, R: Real>(f: &PolySymbol<R>, basis: &Arc<BasisTruncation<F>>) -> Result<OperatorMatrix<F>> {
    if f.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: f.dim() });
    }
    let m = basis.len();
    let n = basis.dim();
    let mut entries = DMatrix::from_element(m, m, Complex::new(F::zero(), F::zero()));
    let terms: Vec<(MultiIndex, MultiIndex, Complex<F>)> = f
        .terms()
        .map(|(g, i, c)| (g.clone(), i.clone(), Complex::new(convert::<R, F>(&c.re), convert::<R, F>(&c.im))))
        .collect();
    for (col, alpha) in basis.indices().iter().enumerate() {
        for (g, i, c) in &terms {
            let a = alpha.add(g);
            let Some(beta) = a.checked_sub(i) else {
                continue;
            };
            let Some(row) = basis.position(&beta) else {
                continue;
            };
            let na = monomial_norm_sq(n, basis.weight(), &a);
            let v = na / (basis.norms_sq()[col] * basis.norms_sq()[row]).sqrt();
            entries[(row, col)] += *c * v;
        }
    }
    OperatorMatrix::new(basis.clone(), entries, basis.degree())
}

/// Fails with [`Error::Budget`] when the basis up to `degree` has more than `cap` elements.
pub fn budget_check(n: usize, degree: usize, cap: usize) -> Result<()> {
    let size = count_up_to(n, degree);
    if size > cap {
        return Err(Error::Budget { size, cap });
    }
    Ok(())
}

/// Settings shared by the padded constructions.
#[derive(Debug, Clone, Copy)]
pub struct Assembly {
    pub core_degree: usize,
    /// Additional padding beyond the exactness rule (for stability checks).
    pub extra_padding: usize,
    pub budget: usize,
}

impl Assembly {
    pub fn new(core_degree: usize) -> Self {
        Assembly { core_degree, extra_padding: 0, budget: DEFAULT_BUDGET }
    }
}

/// T_{f_1}⋯T_{f_k} on a basis padded by Σ_j d_h(f_j); the core block of
/// degree `core_degree` is exact.
pub fn compose_exact<F: Float, R: Real>(
    fs: &[PolySymbol<R>],
    t: &WeightParam<F>,
    asm: Assembly,
) -> Result<OperatorMatrix<F>> {
    let first = fs.first().ok_or_else(|| Error::Domain("compose_exact needs at least one factor".into()))?;
    let n = first.dim();
    let pad: usize = fs.iter().map(|f| f.d_h() as usize).sum::<usize>() + asm.extra_padding;
    let degree = asm.core_degree + pad;
    budget_check(n, degree, asm.budget)?;
    let basis = Arc::new(BasisTruncation::build(n, t.clone(), degree));
    let mut acc = toeplitz(first, &basis)?;
    for f in &fs[1..] {
        acc = acc.mul(&toeplitz(f, &basis)?)?;
    }
    Ok(acc.with_core_degree(asm.core_degree))
}

/// σ_t(f,g) = T_fT_g - T_{fg}, core-marked.
pub fn semi_commutator<F: Float, R: Real>(
    f: &PolySymbol<R>,
    g: &PolySymbol<R>,
    t: &WeightParam<F>,
    asm: Assembly,
) -> Result<OperatorMatrix<F>> {
    let prod = compose_exact(&[f.clone(), g.clone()], t, asm)?;
    let fg = f.try_mul(g)?;
    let tfg = toeplitz(&fg, &prod.basis)?;
    Ok(prod.sub(&tfg)?.with_core_degree(asm.core_degree))
}

/// H_g^* H_g = -σ_t(ḡ, g).
pub fn hankel_gram<F: Float, R: Real>(g: &PolySymbol<R>, t: &WeightParam<F>, asm: Assembly) -> Result<OperatorMatrix<F>> {
    let s = semi_commutator(&g.conj(), g, t, asm)?;
    Ok(s.scale(Complex::new(-F::one(), F::zero())))
}

fn singular_values<F: Float>(m: &DMatrix<Complex<F>>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let m64 = m.map(|c| Complex::new(c.re.approx_f64(), c.im.approx_f64()));
    let svd = nalgebra::linalg::SVD::try_new(m64, false, false, f64::EPSILON, 0)
        .ok_or_else(|| Error::Linalg("SVD did not converge".into()))?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Schatten p-norm of the core block.
pub fn schatten_norm<F: Float>(m: &OperatorMatrix<F>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return crate::error::domain(format!("Schatten exponent must be >= 1, got {p}"));
    }
    let sv = singular_values(&m.core())?;
    if p.is_infinite() {
        return Ok(sv.iter().copied().fold(0.0, f64::max));
    }
    Ok(sv.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Largest singular value of the core block (a lower bound for the full operator).
pub fn operator_norm<F: Float>(m: &OperatorMatrix<F>) -> Result<f64> {
    schatten_norm(m, f64::INFINITY)
}

/// T_fT_g - Σ_{l≤k} c_{l,t} T_{C_l(f,g)} on the padded basis. C_1 is the
/// closed form; higher C_l use the exact D-word symbol, which must be a
/// polynomial.
pub fn quantization_residual<F: Float, R: Real>(
    f: &PolySymbol<R>,
    g: &PolySymbol<R>,
    k: usize,
    t: &WeightParam<F>,
    asm: Assembly,
) -> Result<OperatorMatrix<F>> {
    if k > crate::special_fn::MAX_PHI_DEPTH {
        return Err(Error::Unsupported(format!("expansion order {k}")));
    }
    let mut acc = compose_exact(&[f.clone(), g.clone()], t, asm)?;
    let basis = acc.basis.clone();
    for l in 0..=k {
        let sym = match l {
            0 => f.try_mul(g)?,
            1 => c1_closed(f, g)?,
            _ => c_l_symbol(f, g, l).map_err(|e| match e {
                Error::NotDivisible => Error::Unsupported(format!("C_{l}(f,g) is not a polynomial symbol")),
                other => other,
            })?,
        };
        let c: F = c_coeff(f.dim(), l, *t.t())?;
        acc = acc.sub(&toeplitz(&sym, &basis)?.scale(Complex::new(c, F::zero())))?;
    }
    Ok(acc.with_core_degree(asm.core_degree))
}
