//! Traces of trace-class combinations of Toeplitz products: exact diagonals
//! summed shell by shell (|α| = d), then extrapolated in the degree cap.

use num_complex::Complex;

use crate::diag::{DiagEngine, OpExpr};
use crate::error::{domain, Error, Result};
use crate::extrapolate::{power_law_fit, power_law_tail, richardson, Extrapolation};
use crate::forms::QuadratureSpec;
use crate::operators::OperatorMatrix;
use crate::quad::GaussRule;
use crate::scalar::{Float, Real};
use crate::special_fn::{ln_gamma, WeightParam};
use crate::symbols::{Coeff, PolySymbol};

/// Highest Neville degree tried by the extrapolation.
pub const MAX_EXTRAPOLATION_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStatus {
    /// The last shells vanish; the raw sum is the limit.
    Exact,
    /// Polynomial extrapolation in 1/(N + shift).
    Extrapolated,
    /// Raw sum plus a verified power-law tail.
    PowerLaw,
    /// Extrapolation not trusted; raw sum with the last-increment bound.
    RawOnly,
    /// Shells do not decay faster than 1/d.
    NoConvergence,
}

/// Shell sums s_0..s_N of a real diagonal and their limit.
#[derive(Debug, Clone)]
pub struct ShellSeries<F> {
    pub shells: Vec<F>,
    pub cumulative: Vec<F>,
    pub raw: F,
    pub extrapolated: F,
    /// Bound on |raw - limit|; never below the last increment.
    pub error_estimate: F,
    /// Estimated error of `extrapolated`.
    pub extrapolation_error: F,
    /// Exponent q of the fitted tail c d^{-q}, when the shells allow a fit.
    pub tail_exponent: Option<F>,
    /// Shell range of the tail fit.
    pub window: (usize, usize),
    pub status: SeriesStatus,
}

impl<F: Float> ShellSeries<F> {
    /// `shift` is the offset c in the expansion variable 1/(N + c); n + t + 1
    /// is natural for Bergman shells.
    pub fn from_shells(shells: Vec<F>, shift: F) -> Self {
        let mut cumulative = Vec::with_capacity(shells.len());
        let mut acc = F::zero();
        for s in &shells {
            acc = acc + *s;
            cumulative.push(acc);
        }
        let big_n = shells.len().saturating_sub(1);
        let raw = acc;
        let last_inc = shells.last().map_or(F::zero(), |s| s.abs());
        let w = (big_n / 4).max(4).min(big_n);
        let window = (big_n + 1 - w.max(1).min(big_n + 1), big_n);
        let mut series = ShellSeries {
            shells,
            cumulative,
            raw,
            extrapolated: raw,
            error_estimate: last_inc,
            extrapolation_error: last_inc,
            tail_exponent: None,
            window,
            status: SeriesStatus::RawOnly,
        };
        if big_n < 4 {
            return series;
        }
        let tail_window = &series.shells[window.0..=window.1];
        if tail_window.iter().all(|s| *s == F::zero()) {
            series.status = SeriesStatus::Exact;
            series.extrapolation_error = F::zero();
            return series;
        }
        let fit = power_law_fit(&series.shells, window.0.max(1), window.1);
        if let Some((_, q)) = fit {
            series.tail_exponent = Some(q);
            // Shells still steepening are pre-asymptotic, not divergent.
            let early = power_law_fit(&series.shells, (window.0 / 2).max(1), window.0.max(2));
            let steepening = early.is_some_and(|(_, q0)| q > q0 + F::c(0.1));
            if !(q > F::one()) && !steepening {
                series.status = SeriesStatus::NoConvergence;
                series.error_estimate = F::infinity();
                series.extrapolation_error = F::infinity();
                return series;
            }
        }
        let rich = richardson(&series.cumulative, shift, MAX_EXTRAPOLATION_DEGREE);
        let noise = F::epsilon() * F::c(64.0) * F::cu(big_n + 1) * series.max_partial_sum();
        if let Some(Extrapolation { value, error, .. }) = rich {
            let error = error.max(noise);
            if error < last_inc || error <= noise {
                series.extrapolated = value;
                series.extrapolation_error = error;
                series.error_estimate = last_inc.max((value - raw).abs() + error);
                series.status = SeriesStatus::Extrapolated;
                return series;
            }
        }
        if let Some((tail, err)) = series.verified_power_tail() {
            series.extrapolated = raw + tail;
            series.extrapolation_error = err;
            series.error_estimate = last_inc.max(tail.abs() + err);
            series.status = SeriesStatus::PowerLaw;
        }
        series
    }

    fn max_partial_sum(&self) -> F {
        self.cumulative.iter().fold(F::zero(), |a, c| a.max(c.abs()))
    }

    /// Tail c ζ(q, N+1) from the window fit, accepted when a fit on
    /// [N/2, 3N/4] predicts the shells in (3N/4, N] to within 10% of the tail.
    fn verified_power_tail(&self) -> Option<(F, F)> {
        let big_n = self.shells.len() - 1;
        let (c, q) = power_law_fit(&self.shells, self.window.0.max(1), self.window.1)?;
        if !(q > F::one()) {
            return None;
        }
        let tail = power_law_tail(c, q, big_n);
        let (c2, q2) = power_law_fit(&self.shells, (big_n / 2).max(1), 3 * big_n / 4)?;
        let from = 3 * big_n / 4 + 1;
        let predicted = (from..=big_n).fold(F::zero(), |a, d| a + c2 * F::cu(d).powf(-q2));
        let actual = (from..=big_n).fold(F::zero(), |a, d| a + self.shells[d]);
        let miss = (predicted - actual).abs();
        if miss > F::c(0.1) * tail.abs() {
            return None;
        }
        // A drifting exponent means the tail is not yet a clean power law;
        // the spread between the two fits enters the error.
        let spread = (power_law_tail(c2, q2, big_n) - tail).abs();
        let err = miss.max(spread);
        if err > F::c(0.5) * tail.abs() {
            return None;
        }
        Some((tail, err))
    }

    pub fn degree(&self) -> usize {
        self.shells.len().saturating_sub(1)
    }

    pub fn converged(&self) -> bool {
        !matches!(self.status, SeriesStatus::NoConvergence)
    }
}

/// Real and imaginary shell series of a complex trace.
#[derive(Debug, Clone)]
pub struct TraceSeries<F> {
    pub re: ShellSeries<F>,
    pub im: ShellSeries<F>,
}

impl<F: Float> TraceSeries<F> {
    pub fn from_shells(shells: &[Complex<F>], shift: F) -> Self {
        TraceSeries {
            re: ShellSeries::from_shells(shells.iter().map(|c| c.re).collect(), shift),
            im: ShellSeries::from_shells(shells.iter().map(|c| c.im).collect(), shift),
        }
    }

    pub fn raw(&self) -> Complex<F> {
        Complex::new(self.re.raw, self.im.raw)
    }

    pub fn limit(&self) -> Complex<F> {
        Complex::new(self.re.extrapolated, self.im.extrapolated)
    }

    pub fn error(&self) -> F {
        self.re.extrapolation_error + self.im.extrapolation_error
    }

    pub fn converged(&self) -> bool {
        self.re.converged() && self.im.converged()
    }

    /// The same series cut at degree `m`.
    pub fn truncated(&self, m: usize, shift: F) -> Self {
        let m = m.min(self.re.degree());
        TraceSeries {
            re: ShellSeries::from_shells(self.re.shells[..=m].to_vec(), shift),
            im: ShellSeries::from_shells(self.im.shells[..=m].to_vec(), shift),
        }
    }

    /// |limit(N) - limit(3N/4)|, a check on the extrapolation that uses
    /// no further shells.
    pub fn stability(&self, shift: F) -> F {
        let n = self.re.degree();
        (self.limit() - self.truncated(3 * n / 4, shift).limit()).norm()
    }
}

/// Doubles the degree cap from `start` until the limit is stable to `tol`
/// or `max_degree` is reached; returns the last series and its stability.
pub fn expr_trace_adaptive<F: Float>(
    e: &OpExpr<F>,
    n: usize,
    t: &WeightParam<F>,
    start: usize,
    tol: F,
    max_degree: usize,
) -> Result<(TraceSeries<F>, F)> {
    let shift = shift_of(n, t);
    let mut deg = start.max(8).min(max_degree);
    loop {
        let series = expr_trace(e, n, t, deg)?;
        let stab = series.stability(shift);
        if stab <= tol || deg >= max_degree {
            return Ok((series, stab));
        }
        deg = (2 * deg).min(max_degree);
    }
}

pub fn shift_of<F: Float>(n: usize, t: &WeightParam<F>) -> F {
    F::cu(n + 1) + *t.t()
}

/// Per-degree sums of the core diagonal.
pub fn shell_of_matrix_sum<F: Float>(m: &OperatorMatrix<F>) -> Vec<Complex<F>> {
    let b = m.basis();
    (0..=m.exact_core_degree())
        .map(|d| b.shell(d).fold(Complex::new(F::zero(), F::zero()), |a, i| a + m.entries()[(i, i)]))
        .collect()
}

/// Shell series of the core diagonal of a matrix.
pub fn shell_trace<F: Float>(m: &OperatorMatrix<F>) -> TraceSeries<F> {
    let b = m.basis();
    TraceSeries::from_shells(&shell_of_matrix_sum(m), shift_of(b.dim(), b.weight()))
}

/// Trace of an operator expression from its exact diagonal up to `max_degree`.
pub fn expr_trace<F: Float>(e: &OpExpr<F>, n: usize, t: &WeightParam<F>, max_degree: usize) -> Result<TraceSeries<F>> {
    let eng = DiagEngine::new(n, t.clone());
    let shells = eng.shell_sums(e, max_degree)?;
    Ok(TraceSeries::from_shells(&shells, shift_of(n, t)))
}

fn common_dim<R: Real>(fs: &[PolySymbol<R>]) -> Result<usize> {
    let n = fs.first().ok_or_else(|| Error::Domain("no symbols given".into()))?.dim();
    if let Some(f) = fs.iter().find(|f| f.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: f.dim() });
    }
    Ok(n)
}

fn inversions_after(rest: &[usize], x: usize) -> usize {
    rest.iter().filter(|&&y| y > x).count()
}

/// [X_1, …, X_{2m}] = Σ_τ sgn(τ) X_{τ1}⋯X_{τ2m}, written as 2^{-m} Σ_τ sgn(τ)
/// Π_k [X_{τ(2k-1)}, X_{τ(2k)}] and factored on the rightmost pair so that
/// each partial product is applied once per prefix.
pub fn antisym_expr<R: Real>(xs: &[OpExpr<R>]) -> Result<OpExpr<R>> {
    if xs.len() % 2 == 1 {
        return domain("the antisymmetric sum needs an even number of operators");
    }
    let m = xs.len();
    let mut pairs = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            pairs[i][j] = Some(OpExpr::commutator(xs[i].clone(), xs[j].clone()));
        }
    }
    fn build<R: Real>(set: &[usize], pairs: &[Vec<Option<OpExpr<R>>>]) -> OpExpr<R> {
        if set.is_empty() {
            return OpExpr::Identity;
        }
        let mut terms = Vec::new();
        for a in 0..set.len() {
            for b in a + 1..set.len() {
                let (i, j) = (set[a], set[b]);
                let rest: Vec<usize> = set.iter().copied().filter(|&x| x != i && x != j).collect();
                let inv = inversions_after(&rest, i) + inversions_after(&rest, j);
                let sign = if inv % 2 == 0 { R::one() } else { -R::one() };
                let inner = build(&rest, pairs);
                let pair = pairs[i][j].clone().expect("ordered pair");
                let prod = match inner {
                    OpExpr::Identity => pair,
                    other => OpExpr::Product(vec![other, pair]),
                };
                terms.push((Coeff::new(sign, R::zero()), prod));
            }
        }
        OpExpr::Sum(terms)
    }
    let set: Vec<usize> = (0..m).collect();
    Ok(build(&set, &pairs))
}

/// Tr [T_{f_1}, …, T_{f_{2n}}].
pub fn antisym_trace<R: Real, F: Float>(fs: &[PolySymbol<R>], t: &WeightParam<F>, max_degree: usize) -> Result<TraceSeries<F>> {
    let n = common_dim(fs)?;
    if fs.len() != 2 * n {
        return domain(format!("antisymmetric trace in dimension {n} needs {} symbols, got {}", 2 * n, fs.len()));
    }
    let xs: Vec<OpExpr<F>> = fs.iter().map(|f| OpExpr::toeplitz(&f.convert::<F>())).collect();
    expr_trace(&antisym_expr(&xs)?, n, t, max_degree)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

pub(crate) fn permutations_with_sign(m: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..m).collect();
    fn heap(k: usize, p: &mut Vec<usize>, sign: i64, out: &mut Vec<(Vec<usize>, i64)>) -> i64 {
        // returns the sign after the permutations generated below
        if k <= 1 {
            out.push((p.clone(), sign));
            return sign;
        }
        let mut s = heap(k - 1, p, sign, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                p.swap(i, k - 1);
            } else {
                p.swap(0, k - 1);
            }
            s = heap(k - 1, p, -s, out);
        }
        s
    }
    heap(m, &mut p, 1, &mut out);
    out
}

/// Odd: Σ_τ sgn(τ) σ(f_{τ1}, g_1)⋯σ(f_{τn}, g_n);
/// even: Σ_τ sgn(τ) σ(f_1, g_{τ1})⋯σ(f_n, g_{τn}).
pub fn partial_antisym_expr<R: Real>(fs: &[PolySymbol<R>], gs: &[PolySymbol<R>], parity: Parity) -> Result<OpExpr<R>> {
    if fs.len() != gs.len() || fs.is_empty() {
        return domain("partial antisymmetrization needs two nonempty lists of equal length");
    }
    let m = fs.len();
    let mut terms = Vec::new();
    for (perm, sign) in permutations_with_sign(m) {
        let factors = (0..m)
            .map(|k| match parity {
                Parity::Odd => OpExpr::semi_commutator(&fs[perm[k]], &gs[k]),
                Parity::Even => OpExpr::semi_commutator(&fs[k], &gs[perm[k]]),
            })
            .collect::<Result<Vec<_>>>()?;
        terms.push((Coeff::new(R::from_int(sign), R::zero()), OpExpr::Product(factors)));
    }
    Ok(OpExpr::Sum(terms))
}

pub fn partial_antisym_trace<R: Real, F: Float>(
    fs: &[PolySymbol<R>],
    gs: &[PolySymbol<R>],
    parity: Parity,
    t: &WeightParam<F>,
    max_degree: usize,
) -> Result<TraceSeries<F>> {
    let n = common_dim(fs)?;
    common_dim(gs)?;
    let fs: Vec<PolySymbol<F>> = fs.iter().map(|f| f.convert()).collect();
    let gs: Vec<PolySymbol<F>> = gs.iter().map(|f| f.convert()).collect();
    expr_trace(&partial_antisym_expr(&fs, &gs, parity)?, n, t, max_degree)
}

/// Product σ(h_0,h_1)σ(h_2,h_3)⋯ of consecutive semi-commutators.
pub fn sigma_chain<R: Real>(hs: &[PolySymbol<R>]) -> Result<OpExpr<R>> {
    if hs.len() % 2 == 1 || hs.is_empty() {
        return domain("a semi-commutator chain needs a nonempty even list");
    }
    let factors = hs.chunks(2).map(|c| OpExpr::semi_commutator(&c[0], &c[1])).collect::<Result<Vec<_>>>()?;
    Ok(OpExpr::Product(factors))
}

#[derive(Debug, Clone)]
pub struct ConnesChern<F> {
    pub value: Complex<F>,
    pub error: F,
    /// Tr σ(f_0,f_1)⋯σ(f_{2p-2},f_{2p-1})
    pub first: TraceSeries<F>,
    /// Tr σ(f_1,f_2)⋯σ(f_{2p-1},f_0)
    pub second: TraceSeries<F>,
}

/// τ_t(f_0, …, f_{2p-1}) as the difference of the two chain traces.
pub fn connes_chern<R: Real, F: Float>(
    fs: &[PolySymbol<R>],
    p: usize,
    t: &WeightParam<F>,
    max_degree: usize,
) -> Result<ConnesChern<F>> {
    let n = common_dim(fs)?;
    if fs.len() != 2 * p || p == 0 {
        return domain(format!("Connes-Chern character of order p = {p} needs {} symbols", 2 * p));
    }
    let fs: Vec<PolySymbol<F>> = fs.iter().map(|f| f.convert()).collect();
    let mut rotated = fs[1..].to_vec();
    rotated.push(fs[0].clone());
    let first = expr_trace(&sigma_chain(&fs)?, n, t, max_degree)?;
    let second = expr_trace(&sigma_chain(&rotated)?, n, t, max_degree)?;
    Ok(ConnesChern { value: first.limit() - second.limit(), error: first.error() + second.error(), first, second })
}

/// ∫ ⟨T K_z, K_z⟩ dλ_t(z) for the core block of `m`, with coordinates
/// s_1 = u_1, s_k = (1-u_1)⋯(1-u_{k-1}) u_k for |z_k|² and Gauss-Jacobi rules in
/// each u_k against its weight (1-u_k)^{t+n-k}; angles use the trapezoid rule.
pub fn berezin_trace<F: Float>(m: &OperatorMatrix<F>, spec: &QuadratureSpec) -> Result<Complex<F>> {
    let b = m.basis();
    let n = b.dim();
    let t = *b.weight().t();
    if !(t > -F::one()) {
        return domain("the Berezin integral needs t > -1");
    }
    if spec.angular_orders.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: spec.angular_orders.len() });
    }
    let core = m.core();
    let len = m.core_len();
    let idx = &b.indices()[..len];
    let inv_norm: Vec<F> = b.norms_sq()[..len].iter().map(|v| F::one() / v.sqrt()).collect();
    let tf = t.approx_f64();
    let rules: Vec<_> = (0..n).map(|k| GaussRule::jacobi(spec.radial_order, tf + (n - 1 - k) as f64, 0.0)).collect();
    // Gauss-Jacobi rules live on [-1,1] with weight (1-x)^a; u = (1+x)/2.
    let weight_norm = (0..n).fold(F::zero(), |acc, k| acc + F::c(tf + (n - 1 - k) as f64 + 1.0) * F::c(2f64.ln()));
    // dλ_t = Γ(n+t+1)/(π^n Γ(t+1)) (1-|z|²)^t dm, dm = Π_k ½ ds_k dθ_k.
    let ln_c = ln_gamma(F::cu(n + 1) + t)? - ln_gamma(t + F::one())? - F::cu(n) * F::PI().ln();
    let prefactor = (ln_c - weight_norm).exp() / F::c(2f64.powi(n as i32));
    let mut total = Complex::new(F::zero(), F::zero());
    let mut radial = vec![0usize; n];
    loop {
        // radial node → s-coordinates and weight
        let mut s = vec![F::zero(); n];
        let mut rem = F::one();
        let mut w = F::one();
        for k in 0..n {
            let x = F::c(rules[k].nodes[radial[k]]);
            let u = (F::one() + x) / F::c(2.0);
            s[k] = rem * u;
            w = w * F::c(rules[k].weights[radial[k]]);
            rem = rem * (F::one() - u);
        }
        let r: Vec<F> = s.iter().map(|v| v.sqrt()).collect();
        let mut ang = vec![0usize; n];
        loop {
            let mut wa = F::one();
            let z: Vec<Complex<F>> = (0..n)
                .map(|k| {
                    let mk = spec.angular_orders[k];
                    wa = wa * F::c(2.0) * F::PI() / F::cu(mk);
                    let th = F::c(2.0) * F::PI() * F::cu(ang[k]) / F::cu(mk);
                    Complex::from_polar(r[k], th)
                })
                .collect();
            let e: Vec<Complex<F>> = idx.iter().zip(&inv_norm).map(|(a, s)| a.pow(&z) * *s).collect();
            let mut dens = Complex::new(F::zero(), F::zero());
            for (j, ej) in e.iter().enumerate() {
                let cj = ej.conj();
                for (i, ei) in e.iter().enumerate() {
                    let v = core[(i, j)];
                    if v.re != F::zero() || v.im != F::zero() {
                        dens = dens + v * cj * *ei;
                    }
                }
            }
            total = total + dens * (w * wa);
            if !advance(&mut ang, &spec.angular_orders) {
                break;
            }
        }
        if !advance(&mut radial, &vec![spec.radial_order; n]) {
            break;
        }
    }
    Ok(total * prefactor)
}

fn advance(counter: &mut [usize], limits: &[usize]) -> bool {
    for k in 0..counter.len() {
        counter[k] += 1;
        if counter[k] < limits[k] {
            return true;
        }
        counter[k] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_signs() {
        let perms = permutations_with_sign(4);
        assert_eq!(perms.len(), 24);
        for (p, s) in &perms {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            assert_eq!(*s, if inv % 2 == 0 { 1 } else { -1 }, "{p:?}");
        }
    }

    #[test]
    fn zero_series_is_exact() {
        let s = ShellSeries::from_shells(vec![0.0f64; 30], 2.0);
        assert_eq!(s.status, SeriesStatus::Exact);
        assert_eq!(s.extrapolated, 0.0);
    }

    #[test]
    fn telescoping_shells() {
        let shells: Vec<f64> = (0..41).map(|k| -1.0 / ((k as f64 + 1.0) * (k as f64 + 2.0))).collect();
        let s = ShellSeries::from_shells(shells, 2.0);
        assert_eq!(s.status, SeriesStatus::Extrapolated);
        assert!((s.extrapolated + 1.0).abs() < 1e-12);
        assert!(s.error_estimate >= s.shells[40].abs());
    }

    #[test]
    fn cubic_shells_against_zeta_tail() {
        let shells: Vec<f64> = (0..81).map(|d| (d as f64 + 1.0).powi(-3)).collect();
        let s = ShellSeries::from_shells(shells, 1.0);
        let zeta3 = 1.2020569031595942f64;
        assert!((s.extrapolated - zeta3).abs() < 1e-9, "{:?}", s.extrapolated - zeta3);
        assert!((s.tail_exponent.unwrap() - 3.0).abs() < 0.2);
    }

    #[test]
    fn harmonic_shells_do_not_converge() {
        let shells: Vec<f64> = (0..80).map(|d| 1.0 / (d as f64 + 1.0)).collect();
        let s = ShellSeries::from_shells(shells, 1.0);
        assert_eq!(s.status, SeriesStatus::NoConvergence);
    }
}
