//! Right-hand sides: exact weighted moments on B_n, top-degree wedge
//! integrals, the disk ρ_t double integral and the large-t limit integrals.
//!
//! Orientation: dz∧dz̄ = -2i dm on C, so dz_1∧dz̄_1∧…∧dz_n∧dz̄_n = (-2i)^n dm.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::quantization::{c_l_symbol, poisson_bracket};
use crate::scalar::{convert, Float, Real};
use crate::special_fn::{ln_gamma, rho, WeightParam};
use crate::symbols::{MultiIndex, PolySymbol};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes per radial rule (or per radial panel).
    pub radial_order: usize,
    /// Trapezoid points per complex axis.
    pub angular_orders: Vec<usize>,
    /// Use the Möbius substitution ζ = φ_z(w) in double integrals.
    pub mobius: bool,
    pub tolerance: f64,
}

impl QuadratureSpec {
    pub fn new(radial_order: usize, angular_orders: Vec<usize>, mobius: bool, tolerance: f64) -> Result<Self> {
        if radial_order < 4 || angular_orders.iter().any(|&m| m < 4) {
            return domain("quadrature orders must be at least 4");
        }
        if !(tolerance > 0.0) {
            return domain("quadrature tolerance must be positive");
        }
        Ok(QuadratureSpec { radial_order, angular_orders, mobius, tolerance })
    }

    /// Rule exact for polynomial integrands of bidegree ≤ `degree` in (z, z̄).
    pub fn exact_for_degree(n: usize, degree: usize) -> Self {
        QuadratureSpec {
            radial_order: degree / 2 + 2,
            angular_orders: vec![2 * degree + 2; n],
            mobius: true,
            tolerance: 1e-10,
        }
    }
}

/// ∫_{B_n} z^α z̄^β (1-|z|²)^s dm = δ_{αβ} π^n Γ(s+1) α! / Γ(n+|α|+s+1).
pub fn ball_moment<F: Float>(n: usize, alpha: &MultiIndex, beta: &MultiIndex, s: F) -> Result<F> {
    if !(s > -F::one()) {
        return domain(format!("ball moment needs s > -1, got {s}"));
    }
    if alpha.dim() != n || beta.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.dim().max(beta.dim()) });
    }
    if alpha != beta {
        return Ok(F::zero());
    }
    let ln_fact = alpha.entries().iter().try_fold(F::zero(), |acc, &a| Ok::<F, Error>(acc + ln_gamma(F::cu(a as usize + 1))?))?;
    let ln_v = F::cu(n) * F::PI().ln() + ln_gamma(s + F::one())? + ln_fact
        - ln_gamma(F::cu(n + alpha.degree() as usize) + s + F::one())?;
    Ok(ln_v.exp())
}

/// ∫_{B_n} u (1-|z|²)^s dm, termwise.
pub fn weighted_poly_integral<R: Real, F: Float>(u: &PolySymbol<R>, s: F) -> Result<Complex<F>> {
    if !(s > -F::one()) {
        return domain(format!("weighted integral needs s > -1, got {s}"));
    }
    let n = u.dim();
    let mut acc = Complex::new(F::zero(), F::zero());
    for (g, i, c) in u.terms() {
        if g == i {
            let m = ball_moment(n, g, i, s)?;
            acc = acc + Complex::new(convert::<R, F>(&c.re), convert::<R, F>(&c.im)) * m;
        }
    }
    Ok(acc)
}

/// A one-form Σ a_i dz_i + Σ b_i dz̄_i with polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm<R: Real> {
    pub dz: Vec<PolySymbol<R>>,
    pub dzbar: Vec<PolySymbol<R>>,
}

impl<R: Real> OneForm<R> {
    /// df = ∂f + ∂̄f
    pub fn d(f: &PolySymbol<R>) -> Self {
        let n = f.dim();
        OneForm { dz: (0..n).map(|i| f.d_holo(i)).collect(), dzbar: (0..n).map(|i| f.d_anti(i)).collect() }
    }

    pub fn holo(f: &PolySymbol<R>) -> Self {
        let n = f.dim();
        OneForm { dz: (0..n).map(|i| f.d_holo(i)).collect(), dzbar: vec![PolySymbol::zero(n); n] }
    }

    pub fn anti(f: &PolySymbol<R>) -> Self {
        let n = f.dim();
        OneForm { dz: vec![PolySymbol::zero(n); n], dzbar: (0..n).map(|i| f.d_anti(i)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dz.len()
    }

    /// Coefficient on the slot 2i (dz_i) or 2i+1 (dz̄_i).
    fn slot(&self, k: usize) -> &PolySymbol<R> {
        if k % 2 == 0 {
            &self.dz[k / 2]
        } else {
            &self.dzbar[k / 2]
        }
    }
}

/// Coefficient of ω_1∧…∧ω_{2n} on dz_1∧dz̄_1∧…∧dz_n∧dz̄_n.
pub fn top_coefficient<R: Real>(forms: &[OneForm<R>]) -> Result<PolySymbol<R>> {
    let n = forms.first().map_or(0, |f| f.dim());
    if n == 0 || forms.len() != 2 * n {
        return domain(format!("a top-degree form on B_n needs 2n one-forms, got {}", forms.len()));
    }
    if let Some(f) = forms.iter().find(|f| f.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: f.dim() });
    }
    // Leibniz expansion, skipping zero coefficients.
    fn rec<R: Real>(
        forms: &[OneForm<R>],
        row: usize,
        used: &mut Vec<bool>,
        inv: usize,
        acc: PolySymbol<R>,
        out: &mut PolySymbol<R>,
    ) {
        if row == forms.len() {
            *out = if inv % 2 == 0 { &*out + &acc } else { &*out - &acc };
            return;
        }
        for col in 0..used.len() {
            if used[col] || forms[row].slot(col).is_zero() {
                continue;
            }
            let extra = used[col + 1..].iter().filter(|u| **u).count();
            used[col] = true;
            let next = &acc * forms[row].slot(col);
            rec(forms, row + 1, used, inv + extra, next, out);
            used[col] = false;
        }
    }
    let mut out = PolySymbol::zero(n);
    let mut used = vec![false; 2 * n];
    rec(forms, 0, &mut used, 0, PolySymbol::one(n), &mut out);
    Ok(out)
}

/// ∫_{B_n} ω_1∧…∧ω_{2n}.
pub fn top_form_integral<R: Real, F: Float>(forms: &[OneForm<R>]) -> Result<Complex<F>> {
    let coeff = top_coefficient(forms)?;
    let n = coeff.dim();
    let orient = Complex::new(F::zero(), -F::c(2.0)).powu(n as u32);
    Ok(weighted_poly_integral(&coeff, F::zero())? * orient)
}

/// n!/(2πi)^n ∫ df_1∧…∧df_{2n}.
pub fn helton_howe_integral<R: Real, F: Float>(fs: &[PolySymbol<R>]) -> Result<Complex<F>> {
    let n = fs.first().map_or(0, |f| f.dim());
    if n == 0 || fs.len() != 2 * n {
        return domain(format!("Helton-Howe integral in dimension {n} needs {} symbols, got {}", 2 * n, fs.len()));
    }
    let forms: Vec<_> = fs.iter().map(OneForm::d).collect();
    let fact = (1..=n).fold(F::one(), |a, k| a * F::cu(k));
    Ok(top_form_integral::<R, F>(&forms)? * fact / two_pi_i::<F>().powu(n as u32))
}

fn two_pi_i<F: Float>() -> Complex<F> {
    Complex::new(F::zero(), F::c(2.0) * F::PI())
}

/// 1/(2πi)^n ∫ ∂f_1∧∂̄g_1∧…∧∂f_n∧∂̄g_n.
pub fn mixed_wedge_integral<R: Real, F: Float>(fs: &[PolySymbol<R>], gs: &[PolySymbol<R>]) -> Result<Complex<F>> {
    if fs.len() != gs.len() {
        return domain("mixed wedge integral needs equally many f's and g's");
    }
    let n = fs.len();
    let forms: Vec<_> = fs.iter().zip(gs).flat_map(|(f, g)| [OneForm::holo(f), OneForm::anti(g)]).collect();
    Ok(top_form_integral::<R, F>(&forms)? / two_pi_i::<F>().powu(n as u32))
}

/// (1/4π²) ∫_{B_2} ∂f_1∧∂f_2∧conj(∂f_1∧∂f_2), the lower bound for the
/// product of S⁴ norms of the Hankel operators with symbols f̄_1, f̄_2.
pub fn hankel_s4_bound<R: Real, F: Float>(f1: &PolySymbol<R>, f2: &PolySymbol<R>) -> Result<F> {
    if f1.dim() != 2 || f2.dim() != 2 {
        return domain("the S4 bound is stated on B_2");
    }
    let forms = [OneForm::holo(f1), OneForm::holo(f2), OneForm::anti(&f1.conj()), OneForm::anti(&f2.conj())];
    let v = top_form_integral::<R, F>(&forms)?;
    Ok(v.re / (F::c(4.0) * F::PI() * F::PI()))
}

/// The two pieces of the disk semi-commutator formula:
/// term1 = (1/2πi)∫ ∂f∧∂̄g and term2 = ∬ ρ_t(|φ_z(w)|²) Δf(z) Δg(w) dm dm.
#[derive(Debug, Clone, Copy)]
pub struct DiskRhs<F> {
    pub term1: Complex<F>,
    pub term2: Complex<F>,
    /// Quadrature error estimate for term2.
    pub term2_error: F,
}

impl<F: Float> DiskRhs<F> {
    pub fn total(&self) -> Complex<F> {
        self.term1 + self.term2
    }
}

/// Evaluates term2 after the substitution w = φ_z(ζ), dm(w) = (1-|z|²)²/|1-z̄ζ|⁴ dm(ζ).
///
/// When one Laplacian is constant the z-integral is done in closed form:
/// with Δf = Σ a_{pq} z^p z̄^q and Δg ≡ c only the p = q terms survive and
/// term2 = c Σ_p a_pp π ∫_0^1 ρ_t(s) J_p(s) ds,
/// J_p(s) = 2π Σ_j (j+1)² s^j / ((p+j+1)(p+j+2)(p+j+3)).
/// Otherwise a rotation-reduced tensor rule from `spec` is used.
pub fn disk_semicommutator_rhs<R: Real, F: Float>(
    f: &PolySymbol<R>,
    g: &PolySymbol<R>,
    t: &WeightParam<F>,
    spec: &QuadratureSpec,
) -> Result<DiskRhs<F>> {
    if f.dim() != 1 || g.dim() != 1 {
        return domain("the disk semi-commutator formula needs n = 1");
    }
    let term1 = mixed_wedge_integral::<R, F>(std::slice::from_ref(f), std::slice::from_ref(g))?;
    let lf = f.laplacian_disk()?;
    let lg = g.laplacian_disk()?;
    let zero = Complex::new(F::zero(), F::zero());
    if lf.is_zero() || lg.is_zero() {
        return Ok(DiskRhs { term1, term2: zero, term2_error: F::zero() });
    }
    let tt = *t.t();
    let opts = QuadOptions { rel_tol: spec.tolerance.min(1e-8), abs_tol: 1e-300, max_panels: 4000 };
    // ρ is symmetric under z ↔ w, so either Laplacian may play the constant.
    let (other, c) = if lg.total_degree() == 0 {
        (lf, lg.coeff(&MultiIndex::zero(1), &MultiIndex::zero(1)))
    } else if lf.total_degree() == 0 {
        (lg, lf.coeff(&MultiIndex::zero(1), &MultiIndex::zero(1)))
    } else {
        return disk_term2_tensor(&lf, &lg, tt, spec).map(|(v, e)| DiskRhs { term1, term2: v, term2_error: e });
    };
    let c = Complex::new(convert::<R, F>(&c.re), convert::<R, F>(&c.im));
    let mut term2 = zero;
    let mut err = F::zero();
    for (gm, io, a) in other.terms() {
        if gm != io {
            continue;
        }
        let p = gm.entries()[0] as usize;
        let r = integrate(|s: F| rho(tt, s).map_or(F::nan(), |v| v * j_p(p, s)), F::zero(), F::one(), &opts)?;
        if !r.value.is_finite() {
            return Err(Error::Quadrature { achieved: f64::INFINITY });
        }
        let a = Complex::new(convert::<R, F>(&a.re), convert::<R, F>(&a.im));
        term2 = term2 + a * c * (r.value * F::PI());
        err = err + r.error * F::PI() * (a * c).norm();
    }
    Ok(DiskRhs { term1, term2, term2_error: err })
}

/// J_p(s) = 2π Σ_j (j+1)² s^j / ((j+a)(j+a+1)(j+a+2)), a = p+1.
pub fn j_p<F: Float>(p: usize, s: F) -> F {
    let two_pi = F::c(2.0) * F::PI();
    let a = p + 1;
    if s < F::c(0.9) {
        let mut acc = F::zero();
        let mut sj = F::one();
        for j in 0.. {
            let jf = F::cu(j);
            let term = (jf + F::one()).powi(2) * sj / ((jf + F::cu(a)) * (jf + F::cu(a + 1)) * (jf + F::cu(a + 2)));
            acc = acc + term;
            if term < F::epsilon() * F::c(1e-2) * acc {
                break;
            }
            sj = sj * s;
        }
        return two_pi * acc;
    }
    // partial fractions against L(s, c) = Σ_j s^j/(j+c)
    let af = F::cu(a);
    let ca = (F::one() - af).powi(2) / F::c(2.0);
    let cb = -af * af;
    let cc = (af + F::one()).powi(2) / F::c(2.0);
    two_pi * (ca * lerch(s, a) + cb * lerch(s, a + 1) + cc * lerch(s, a + 2))
}

/// Σ_{j≥0} s^j/(j+c) = s^{-c}(-ln(1-s) - Σ_{m<c} s^m/m) for integer c ≥ 1.
fn lerch<F: Float>(s: F, c: usize) -> F {
    let mut partial = F::zero();
    let mut sm = F::one();
    for m in 1..c {
        sm = sm * s;
        partial = partial + sm / F::cu(m);
    }
    (-(-s).ln_1p() - partial) / s.powi(c as i32)
}

/// term2 by the rotation-reduced tensor rule regardless of the Laplacians;
/// an independent route for cross-checks.
pub fn disk_term2_quadrature<R: Real, F: Float>(
    f: &PolySymbol<R>,
    g: &PolySymbol<R>,
    t: &WeightParam<F>,
    spec: &QuadratureSpec,
) -> Result<(Complex<F>, F)> {
    if f.dim() != 1 || g.dim() != 1 {
        return domain("the disk semi-commutator formula needs n = 1");
    }
    disk_term2_tensor(&f.laplacian_disk()?, &g.laplacian_disk()?, *t.t(), spec)
}

/// Rotation-reduced tensor rule for non-constant Laplacians. With ζ = √s e^{iψ}
/// and z = e^{iψ}u the ψ-integral of each monomial pair is 2π δ, leaving
/// (s, |u|², arg u), integrated by Gauss-Legendre panels graded towards the
/// ends and a trapezoid rule in the angle.
fn disk_term2_tensor<R: Real, F: Float>(
    lf: &PolySymbol<R>,
    lg: &PolySymbol<R>,
    t: F,
    spec: &QuadratureSpec,
) -> Result<(Complex<F>, F)> {
    let pairs: Vec<_> = lf
        .terms()
        .flat_map(|(p, q, a)| {
            lg.terms().filter_map(move |(p2, q2, b)| {
                let wind = p.entries()[0] as i64 - q.entries()[0] as i64 + p2.entries()[0] as i64 - q2.entries()[0] as i64;
                (wind == 0).then(|| {
                    let ab = Complex::new(convert::<R, F>(&a.re), convert::<R, F>(&a.im))
                        * Complex::new(convert::<R, F>(&b.re), convert::<R, F>(&b.im));
                    (p.entries()[0] as i32, q.entries()[0] as i32, p2.entries()[0] as i32, q2.entries()[0] as i32, ab)
                })
            })
        })
        .collect();
    if pairs.is_empty() {
        return Ok((Complex::new(F::zero(), F::zero()), F::zero()));
    }
    let m_ang = spec.angular_orders.first().copied().unwrap_or(64);
    let inner = |s: F, m_ang: usize, order: usize| -> Complex<F> {
        let rs = s.sqrt();
        let panels = graded_panels::<F>(order);
        let mut acc = Complex::new(F::zero(), F::zero());
        for (lo, hi) in &panels {
            let rule = crate::quad::GaussRule::legendre(spec.radial_order);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let r2 = (*lo + *hi) / F::c(2.0) + (*hi - *lo) / F::c(2.0) * F::c(*x);
                let wr = F::c(*w) * (*hi - *lo) / F::c(2.0);
                let r = r2.sqrt();
                let defect = (F::one() - r2).powi(2);
                for k in 0..m_ang {
                    let th = F::c(2.0) * F::PI() * F::cu(k) / F::cu(m_ang);
                    let u = Complex::from_polar(r, th);
                    let den = Complex::new(F::one(), F::zero()) - u.conj() * rs;
                    let phi = (u - rs) / den;
                    let jac = defect / den.norm_sqr().powi(2);
                    let mut v = Complex::new(F::zero(), F::zero());
                    for (p, q, p2, q2, ab) in &pairs {
                        v = v + *ab * u.powi(*p) * u.conj().powi(*q) * phi.powi(*p2) * phi.conj().powi(*q2);
                    }
                    // dm(u) = ½ d|u|² dθ
                    acc = acc + v * (jac * wr * F::PI() / F::cu(m_ang));
                }
            }
        }
        acc
    };
    let outer = |m_ang: usize, order: usize| -> Result<Complex<F>> {
        let mut acc = Complex::new(F::zero(), F::zero());
        for (lo, hi) in graded_panels::<F>(order) {
            let rule = crate::quad::GaussRule::legendre(spec.radial_order);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let s = (lo + hi) / F::c(2.0) + (hi - lo) / F::c(2.0) * F::c(*x);
                let ws = F::c(*w) * (hi - lo) / F::c(2.0);
                // dm(ζ) = ½ ds dψ, the ψ-integral gives 2π
                acc = acc + inner(s, m_ang, order) * (rho(t, s)? * ws * F::PI());
            }
        }
        Ok(acc)
    };
    let coarse = outer(m_ang, 8)?;
    let fine = outer(2 * m_ang, 12)?;
    let err = (fine - coarse).norm();
    if err > F::c(spec.tolerance) * fine.norm().max(F::one()) {
        return Err(Error::Quadrature { achieved: (err / fine.norm().max(F::one())).approx_f64() });
    }
    Ok((fine, err))
}

/// Panels on (0,1) refined geometrically towards both ends.
fn graded_panels<F: Float>(levels: usize) -> Vec<(F, F)> {
    let mut cuts = vec![F::c(0.5)];
    let mut x = F::c(0.5);
    for _ in 0..levels {
        x = x * F::c(0.25);
        cuts.push(x);
        cuts.push(F::one() - x);
    }
    cuts.push(F::zero());
    cuts.push(F::one());
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn check_pairs<R: Real>(fs: &[PolySymbol<R>], gs: &[PolySymbol<R>], p: usize) -> Result<usize> {
    if fs.len() != p || gs.len() != p || p == 0 {
        return domain(format!("expected {p} pairs of symbols"));
    }
    let n = fs[0].dim();
    if let Some(h) = fs.iter().chain(gs).find(|h| h.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: h.dim() });
    }
    if p < n + 1 {
        return domain(format!("the limit integral needs p >= n + 1, got p = {p}, n = {n}"));
    }
    Ok(n)
}

fn integrate_over_defect<R: Real, F: Float>(prod: PolySymbol<R>, n: usize, scale: Complex<F>) -> Result<Complex<F>> {
    let q = prod.div_defect_power(n as u32 + 1)?;
    Ok(weighted_poly_integral::<R, F>(&q, F::zero())? * scale / F::PI().powi(n as i32))
}

/// (n^p/π^n) ∫ Π_j C_1(f_j,g_j) dm/(1-|z|²)^{n+1}, the limit of t^{p-n} Tr Π σ_t(f_j,g_j).
pub fn cc_limit_integral<R: Real, F: Float>(fs: &[PolySymbol<R>], gs: &[PolySymbol<R>], p: usize) -> Result<Complex<F>> {
    let n = check_pairs(fs, gs, p)?;
    let mut prod = PolySymbol::one(n);
    for (f, g) in fs.iter().zip(gs) {
        prod = &prod * &c_l_symbol(f, g, 1)?;
    }
    integrate_over_defect(prod, n, Complex::new(F::cu(n).powi(p as i32), F::zero()))
}

/// ((-i)^p/π^n) ∫ Π_j {f_j,g_j} dm/(1-|z|²)^{n+1}, the limit of
/// t^{p-n} Tr Π [T_{f_j}, T_{g_j}].
pub fn commutator_limit_integral<R: Real, F: Float>(fs: &[PolySymbol<R>], gs: &[PolySymbol<R>], p: usize) -> Result<Complex<F>> {
    let n = check_pairs(fs, gs, p)?;
    let mut prod = PolySymbol::one(n);
    for (f, g) in fs.iter().zip(gs) {
        prod = &prod * &poisson_bracket(f, g)?;
    }
    let minus_i = Complex::new(F::zero(), -F::one());
    integrate_over_defect(prod, n, minus_i.powu(p as u32))
}

/// (1/π^n) ∫ [|∂̄g|² - |R̄g|²]^p (1-|z|²)^{p-n-1} dm, the limit of
/// t^{p-n} ‖H_g‖^{2p}_{S^{2p}}.
pub fn hankel_limit_integral<R: Real, F: Float>(g: &PolySymbol<R>, p: usize) -> Result<F> {
    let n = g.dim();
    if p < n + 1 {
        return domain(format!("the Hankel limit needs p >= n + 1, got p = {p}, n = {n}"));
    }
    let gc = g.conj();
    let mut base = PolySymbol::zero(n);
    for i in 0..n {
        let d = g.d_anti(i);
        base = &base + &(&d.conj() * &d);
    }
    base = &base - &(&gc.radial_r() * &g.radial_rbar());
    let v = weighted_poly_integral::<R, F>(&base.pow(p as u32), F::cu(p - n - 1))?;
    Ok(v.re / F::PI().powi(n as i32))
}
