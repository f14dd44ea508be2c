//! Beta/Gamma ratios, monomial norms, the one-dimensional integral operators
//! F and G, the iterated functions Φ_{n,k}, the quantization coefficients
//! c_{l,t} and the disk trace kernel ρ_t.

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_to_one, GaussRule, QuadOptions};
use crate::scalar::{Float, Real};
use crate::symbols::MultiIndex;

/// Weight exponent t ≥ -1 of dλ_t; t = -1 is the Hardy space.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub struct WeightParam<R: Real> {
    t: R,
}

impl<R: Real> WeightParam<R> {
    pub fn new(t: R) -> Result<Self> {
        if t < -R::one() {
            return domain(format!("weight t = {:?} must be >= -1", t));
        }
        Ok(WeightParam { t })
    }

    pub fn hardy() -> Self {
        WeightParam { t: -R::one() }
    }

    pub fn t(&self) -> &R {
        &self.t
    }

    pub fn is_hardy(&self) -> bool {
        self.t == -R::one()
    }

    pub fn to_f64(&self) -> f64 {
        self.t.approx_f64()
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<F: Float>(x: F) -> F {
    let mut a = F::c(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + F::c(*c) / (x + F::cu(i));
    }
    a
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma<F: Float>(x: F) -> Result<F> {
    if !(x > F::zero()) {
        return domain(format!("ln_gamma needs x > 0, got {x}"));
    }
    if x < F::c(0.5) {
        let pi = F::PI();
        return Ok((pi / (pi * x).sin()).ln() - ln_gamma(F::one() - x)?);
    }
    let z = x - F::one();
    let tt = z + F::c(LANCZOS_G + 0.5);
    Ok(F::c(0.5) * (F::c(2.0) * F::PI()).ln() + (z + F::c(0.5)) * tt.ln() - tt + lanczos_sum(z).ln())
}

/// Euler Beta function B(a, b) for a, b > 0.
///
/// Arguments below one are shifted with B(a,b) = B(a+1,b)(a+b)/a; the shifted
/// value uses one Lanczos quotient so that no large Gamma values are formed.
pub fn beta<F: Float>(a: F, b: F) -> Result<F> {
    if !(a > F::zero() && b > F::zero()) {
        return domain(format!("beta needs positive arguments, got ({a}, {b})"));
    }
    let mut a = a;
    let mut b = b;
    let mut factor = F::one();
    while a < F::one() {
        factor = factor * (a + b) / a;
        a = a + F::one();
    }
    while b < F::one() {
        factor = factor * (a + b) / b;
        b = b + F::one();
    }
    let half = F::c(0.5);
    let g = F::c(LANCZOS_G);
    let cgh = a + b + g - half;
    let quotient = lanczos_sum(a - F::one()) * lanczos_sum(b - F::one()) / lanczos_sum(a + b - F::one());
    let expo = (a - half) * (-b / cgh).ln_1p() + (b - half) * (-a / cgh).ln_1p();
    let pref = (F::c(2.0) * F::PI() / cgh).sqrt() * (half - g).exp();
    Ok(factor * pref * quotient * expo.exp())
}

/// ‖z^α‖² in L²_{a,t}(B_n) (H²(S_n) at t = -1), as the telescoping product
/// α!/((n+t+1)(n+t+2)…(n+t+|α|)). Exact when `R` is rational.
pub fn monomial_norm_sq<R: Real>(n: usize, t: &WeightParam<R>, alpha: &MultiIndex) -> R {
    let base = R::from_int(n as i64) + t.t().clone();
    let mut acc = R::one();
    let mut j = 0i64;
    for &a in alpha.entries() {
        for k in 1..=a as i64 {
            j += 1;
            acc = acc * R::from_int(k) / (base.clone() + R::from_int(j));
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Tabulated functions

#[derive(Debug, Clone)]
enum Samples<F> {
    /// ln of strictly positive samples.
    Log(Vec<F>),
    Linear(Vec<F>),
}

/// A function on (0,1) given by samples. Interpolation runs in the logit
/// coordinate u = ln(s/(1-s)) and, for positive data, on ln(value), so that
/// power-law behaviour at both ends is represented by straight lines.
#[derive(Debug, Clone)]
pub struct TabulatedFn<F: Float> {
    grid: Vec<F>,
    values: Vec<F>,
    order: usize,
    u: Vec<F>,
    samples: Samples<F>,
    slopes: Vec<F>,
}

fn logit_split<F: Float>(s: F, one_minus_s: F) -> F {
    s.ln() - one_minus_s.ln()
}

/// ln σ(u) = -ln(1 + e^{-u}).
pub(crate) fn ln_sigmoid<F: Float>(u: F) -> F {
    if u > F::zero() {
        -(-u).exp().ln_1p()
    } else {
        u - u.exp().ln_1p()
    }
}

impl<F: Float> TabulatedFn<F> {
    /// `order` is 1 (linear), 3 (monotone cubic) or 4..=7 (local Lagrange).
    pub fn new(grid: Vec<F>, values: Vec<F>, order: usize) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return domain("tabulated function needs at least two grid points and matching values");
        }
        if grid.iter().any(|s| !(*s > F::zero() && *s < F::one())) {
            return domain("grid points must lie in (0,1)");
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("grid must be strictly increasing");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("values must be finite");
        }
        let u: Vec<F> = grid.iter().map(|&s| logit_split(s, F::one() - s)).collect();
        let samples = if values.iter().all(|v| *v > F::zero()) {
            Samples::Log(values.iter().map(|v| v.ln()).collect())
        } else {
            Samples::Linear(values.clone())
        };
        Self::assemble(grid, values, order, u, samples)
    }

    pub(crate) fn from_logit_log(u: Vec<F>, ln_values: Vec<F>, order: usize) -> Result<Self> {
        let grid = u.iter().map(|&x| ln_sigmoid(x).exp()).collect();
        let values = ln_values.iter().map(|y| y.exp()).collect();
        Self::assemble(grid, values, order, u, Samples::Log(ln_values))
    }

    /// The constant function `c`.
    pub fn constant(c: F) -> Self {
        let grid = vec![F::c(0.25), F::c(0.75)];
        TabulatedFn::new(grid, vec![c, c], 1).expect("valid constant table")
    }

    fn assemble(grid: Vec<F>, values: Vec<F>, order: usize, u: Vec<F>, samples: Samples<F>) -> Result<Self> {
        if !(order == 1 || (3..=7).contains(&order)) {
            return domain(format!("unsupported interpolation order {order}"));
        }
        let mut f = TabulatedFn { grid, values, order, u, samples, slopes: Vec::new() };
        if order == 3 {
            f.slopes = monotone_slopes(&f.u, f.ys());
        }
        Ok(f)
    }

    fn ys(&self) -> &[F] {
        match &self.samples {
            Samples::Log(v) | Samples::Linear(v) => v,
        }
    }

    pub fn grid(&self) -> &[F] {
        &self.grid
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval(&self, s: F) -> F {
        self.eval_split(s, F::one() - s)
    }

    /// Evaluates at s given an accurate complement 1 - s.
    pub fn eval_split(&self, s: F, one_minus_s: F) -> F {
        if s <= F::zero() || one_minus_s <= F::zero() {
            // Endpoint: use the extrapolated power law.
            let u = if s <= F::zero() { F::c(-745.0) } else { F::c(745.0) };
            return self.eval_logit(u);
        }
        self.eval_logit(logit_split(s, one_minus_s))
    }

    pub(crate) fn eval_logit(&self, u: F) -> F {
        let y = self.interp(u);
        match self.samples {
            Samples::Log(_) => y.exp(),
            Samples::Linear(_) => y,
        }
    }

    /// Interpolated value in storage coordinates (ln value for positive data).
    pub(crate) fn interp(&self, x: F) -> F {
        let xs = &self.u;
        let ys = self.ys();
        let m = xs.len();
        if x <= xs[0] || x >= xs[m - 1] {
            let (i, j) = if x <= xs[0] { (0, 1) } else { (m - 2, m - 1) };
            let slope = (ys[j] - ys[i]) / (xs[j] - xs[i]);
            return ys[i] + slope * (x - xs[i]);
        }
        let k = xs.partition_point(|v| *v <= x).saturating_sub(1).min(m - 2);
        match self.order {
            1 => {
                let w = (x - xs[k]) / (xs[k + 1] - xs[k]);
                ys[k] + w * (ys[k + 1] - ys[k])
            }
            3 => {
                let h = xs[k + 1] - xs[k];
                let w = (x - xs[k]) / h;
                let w2 = w * w;
                let w3 = w2 * w;
                let two = F::c(2.0);
                let three = F::c(3.0);
                let h00 = two * w3 - three * w2 + F::one();
                let h10 = w3 - two * w2 + w;
                let h01 = -two * w3 + three * w2;
                let h11 = w3 - w2;
                h00 * ys[k] + h10 * h * self.slopes[k] + h01 * ys[k + 1] + h11 * h * self.slopes[k + 1]
            }
            p => {
                let npts = (p + 1).min(m);
                let lo = (k + 1).saturating_sub(npts / 2).min(m - npts);
                let mut acc = F::zero();
                for i in lo..lo + npts {
                    let mut li = F::one();
                    for j in lo..lo + npts {
                        if j != i {
                            li = li * (x - xs[j]) / (xs[i] - xs[j]);
                        }
                    }
                    acc = acc + li * ys[i];
                }
                acc
            }
        }
    }
}

/// Fritsch-Carlson (Fritsch-Butland weighting) derivative estimates.
fn monotone_slopes<F: Float>(x: &[F], y: &[F]) -> Vec<F> {
    let m = x.len();
    let h: Vec<F> = (0..m - 1).map(|i| x[i + 1] - x[i]).collect();
    let d: Vec<F> = (0..m - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut s = vec![F::zero(); m];
    s[0] = d[0];
    s[m - 1] = d[m - 2];
    for i in 1..m - 1 {
        if d[i - 1] * d[i] <= F::zero() {
            s[i] = F::zero();
        } else {
            let three = F::c(3.0);
            let two = F::c(2.0);
            s[i] = three * (h[i - 1] + h[i])
                / ((two * h[i] + h[i - 1]) / d[i - 1] + (h[i] + two * h[i - 1]) / d[i]);
        }
    }
    s
}

fn quad_opts() -> QuadOptions {
    QuadOptions { rel_tol: 1e-11, abs_tol: 1e-300, max_panels: 6000 }
}

fn check_open_weight<F: Float>(t: F) -> Result<()> {
    if !(t > -F::one()) {
        return domain(format!("operation needs t > -1, got {t}"));
    }
    Ok(())
}

/// F^{(t)}_m φ(s) = ∫_s^1 r^{m-1} φ(r) (1-r)^t dr.
pub fn apply_f<F: Float>(m: usize, t: F, phi: &TabulatedFn<F>, s: F) -> Result<F> {
    check_open_weight(t)?;
    if m == 0 {
        return domain("F_m needs m >= 1");
    }
    if !(s >= F::zero() && s < F::one()) {
        return domain(format!("F_m needs s in [0,1), got {s}"));
    }
    let res = integrate_to_one(
        |r: F, omr: F| {
            let v = phi.eval_split(r, omr);
            if v == F::zero() {
                F::zero()
            } else {
                r.powi(m as i32 - 1) * v
            }
        },
        s,
        t,
        &quad_opts(),
    )?;
    let rel = (res.error / res.value.abs().max(F::min_positive_value())).approx_f64();
    if rel > 1e-9 && res.error.approx_f64() > 1e-300 {
        return Err(Error::Quadrature { achieved: rel });
    }
    Ok(res.value)
}

/// G^{(t)}_m φ(s) = F^{(t)}_m φ(s) / (s^m (1-s)^{t+1}) for s in (0,1).
pub fn apply_g<F: Float>(m: usize, t: F, phi: &TabulatedFn<F>, s: F) -> Result<F> {
    if !(s > F::zero() && s < F::one()) {
        return domain(format!("G_m needs s in (0,1), got {s}"));
    }
    let f = apply_f(m, t, phi, s)?;
    Ok(f / (s.powi(m as i32) * (F::one() - s).powf(t + F::one())))
}

// ---------------------------------------------------------------------------
// Φ_{n,k} tables

/// Grid layout for Φ tables: uniform in the logit coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiConfig {
    pub grid_size: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub order: usize,
    /// Gauss-Legendre points per grid cell for the cumulative integrals.
    pub cell_nodes: usize,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig { grid_size: 1024, u_min: -60.0, u_max: 40.0, order: 5, cell_nodes: 8 }
    }
}

pub const MAX_PHI_DEPTH: usize = 4;

/// Memoized levels Φ_{n,0}, …, Φ_{n,kmax} for one (n, t).
#[derive(Debug, Clone)]
pub struct PhiTable<F: Float> {
    n: usize,
    t: F,
    levels: Vec<TabulatedFn<F>>,
    cfg: PhiConfig,
}

/// Result of one cumulative F-transform on a logit grid: ln F at each node and F(0).
struct Cumulative<F> {
    ln_f: Vec<F>,
    at_zero: F,
}

impl<F: Float> PhiTable<F> {
    pub fn build(n: usize, kmax: usize, t: F, cfg: PhiConfig) -> Result<Self> {
        check_open_weight(t)?;
        if n == 0 {
            return domain("dimension must be positive");
        }
        if kmax > MAX_PHI_DEPTH {
            return Err(Error::Unsupported(format!("Φ depth {kmax} exceeds {MAX_PHI_DEPTH}")));
        }
        if cfg.grid_size < 16 || !(cfg.u_min < cfg.u_max) {
            return domain("Φ grid needs at least 16 points on a nonempty logit range");
        }
        let m = cfg.grid_size;
        let h = (cfg.u_max - cfg.u_min) / (m - 1) as f64;
        let u: Vec<F> = (0..m).map(|i| F::c(cfg.u_min + h * i as f64)).collect();
        let mut levels = vec![TabulatedFn::from_logit_log(u.clone(), vec![F::zero(); m], cfg.order)?];
        for k in 0..kmax {
            let mm = n + k;
            let psi = Self::g_transform(&levels[k], mm, t, &cfg)?;
            let psi2 = Self::g_transform(&psi, mm, t, &cfg)?;
            let ln_vals: Vec<F> = psi2.ys().iter().zip(&u).map(|(y, &ui)| *y + ln_sigmoid(-ui)).collect();
            levels.push(TabulatedFn::from_logit_log(u.clone(), ln_vals, cfg.order)?);
        }
        Ok(PhiTable { n, t, levels, cfg })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, k: usize) -> &TabulatedFn<F> {
        &self.levels[k]
    }

    pub fn eval(&self, k: usize, s: F) -> Result<F> {
        if k >= self.levels.len() {
            return Err(Error::Unsupported(format!("Φ level {k} not built")));
        }
        if !(s > F::zero() && s < F::one()) {
            return domain(format!("Φ needs s in (0,1), got {s}"));
        }
        Ok(self.levels[k].eval(s))
    }

    /// F^{(t)}_{n+k} Φ_{n,k}(0).
    pub fn moment_at_zero(&self, k: usize) -> Result<F> {
        if k >= self.levels.len() {
            return Err(Error::Unsupported(format!("Φ level {k} not built")));
        }
        let v = Self::cumulative(&self.levels[k], self.n + k, self.t, &self.cfg)?.at_zero;
        if !v.is_finite() {
            return Err(Error::NoConvergence(format!("F_{{n+{k}}}Φ_{{n,{k}}}(0) diverges")));
        }
        Ok(v)
    }

    fn cumulative(psi: &TabulatedFn<F>, m: usize, t: F, cfg: &PhiConfig) -> Result<Cumulative<F>> {
        let u = &psi.u;
        let y = psi.ys();
        let len = u.len();
        let mf = F::cu(m);
        let tp1 = t + F::one();
        let expo = |uu: F, yy: F| yy + mf * ln_sigmoid(uu) + tp1 * ln_sigmoid(-uu);
        let rule = GaussRule::legendre(cfg.cell_nodes);
        let mut cells = vec![F::zero(); len - 1];
        // Integrand in u: r^m (1-r)^{t+1} ψ(r), since dr = r(1-r) du.
        for j in 0..len - 1 {
            cells[j] = rule.integrate(u[j], u[j + 1], |uu| expo(uu, psi.interp(uu)).exp());
        }
        let last = len - 1;
        let slope_hi = (y[last] - y[last - 1]) / (u[last] - u[last - 1]);
        let rate_hi = tp1 - slope_hi;
        if !(rate_hi > F::zero()) {
            return Err(Error::NoConvergence("F-transform diverges at s -> 1".into()));
        }
        let right_tail = expo(u[last], y[last]).exp() / rate_hi;
        // Below the grid the integrand is a power law in r; a non-positive
        // rate only means F(0) is infinite, F(s) for s > 0 is unaffected.
        let slope_lo = (y[1] - y[0]) / (u[1] - u[0]);
        let rate_lo = slope_lo + mf;
        let left_tail = if rate_lo > F::zero() {
            expo(u[0], y[0]).exp() / rate_lo
        } else {
            F::infinity()
        };
        let mut ln_f = vec![F::zero(); len];
        let mut acc = right_tail;
        ln_f[last] = acc.ln();
        for j in (0..len - 1).rev() {
            acc = acc + cells[j];
            ln_f[j] = acc.ln();
        }
        Ok(Cumulative { ln_f, at_zero: acc + left_tail })
    }

    fn g_transform(psi: &TabulatedFn<F>, m: usize, t: F, cfg: &PhiConfig) -> Result<TabulatedFn<F>> {
        let cum = Self::cumulative(psi, m, t, cfg)?;
        let mf = F::cu(m);
        let tp1 = t + F::one();
        let ln_g: Vec<F> = cum
            .ln_f
            .iter()
            .zip(&psi.u)
            .map(|(lf, &uu)| *lf - mf * ln_sigmoid(uu) - tp1 * ln_sigmoid(-uu))
            .collect();
        TabulatedFn::from_logit_log(psi.u.clone(), ln_g, cfg.order)
    }
}

/// Φ^{(t)}_{n,k}(s), building a per-call table with the default grid.
pub fn phi_nk<F: Float>(n: usize, k: usize, t: F, s: F) -> Result<F> {
    if k == 0 {
        return Ok(F::one());
    }
    PhiTable::build(n, k, t, PhiConfig::default())?.eval(k, s)
}

// ---------------------------------------------------------------------------
// Quantization coefficients

/// Hurwitz zeta ζ(p, q) for p > 1 and q ≥ 10 by Euler-Maclaurin.
pub fn hurwitz_zeta<F: Float>(p: F, q: F) -> F {
    const B2K: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let shift = 10usize;
    let mut acc = F::zero();
    for k in 0..shift {
        acc = acc + (q + F::cu(k)).powf(-p);
    }
    let a = q + F::cu(shift);
    acc = acc + a.powf(F::one() - p) / (p - F::one()) + F::c(0.5) * a.powf(-p);
    // Σ B_{2j}/(2j)! · p(p+1)…(p+2j-2) · a^{-p-2j+1}
    let mut rising = p;
    let mut fact = F::c(2.0);
    let mut power = a.powf(-p - F::one());
    for (j, b) in B2K.iter().enumerate() {
        if j > 0 {
            let k = F::cu(2 * j + 2);
            rising = rising * (p + k - F::c(3.0)) * (p + k - F::c(2.0));
            fact = fact * (k - F::one()) * k;
            power = power / (a * a);
        }
        acc = acc + F::c(*b) / fact * rising * power;
    }
    acc
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub(crate) fn solve_small<F: Float>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Option<Vec<F>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c] == F::zero() {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let v = a[c][k];
                a[r][k] = a[r][k] - f * v;
            }
            b[r] = b[r] - f * b[c];
        }
    }
    let mut x = vec![F::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for k in r + 1..n {
            acc = acc - a[r][k] * x[k];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Σ_{M > mmax} b(M) for b(M) ~ M^{-p} Σ_i c_i M^{-i}, fitted on five points
/// spread over [mmax/2, mmax].
fn asymptotic_tail<F: Float>(b: &[F], mmax: usize, p: F) -> F {
    if b[mmax] == F::zero() {
        return F::zero();
    }
    let pts: Vec<usize> = [4usize, 5, 6, 7, 8].iter().map(|k| mmax * k / 8).collect();
    let rows: Vec<Vec<F>> = pts
        .iter()
        .map(|&m| {
            let x = F::one() / F::cu(m);
            (0..pts.len()).map(|i| x.powi(i as i32)).collect()
        })
        .collect();
    if pts.iter().any(|&m| !(b[m] > F::zero())) {
        return F::zero();
    }
    // b M^p formed in log space: both factors may be out of range separately.
    let rhs: Vec<F> = pts.iter().map(|&m| (b[m].ln() + p * F::cu(m).ln()).exp()).collect();
    let Some(c) = solve_small(rows, rhs) else {
        return F::zero();
    };
    let q = F::cu(mmax + 1);
    c.iter().enumerate().fold(F::zero(), |acc, (i, ci)| acc + *ci * hurwitz_zeta(p + F::cu(i), q))
}

/// Diagnostics of the series evaluation of c_{l,t}.
#[derive(Debug, Clone, PartialEq)]
pub struct CCoeff<F> {
    pub value: F,
    /// Number of explicitly summed terms per level.
    pub terms: usize,
    /// Largest (asymptotic tail)/(partial sum) ratio over the levels.
    pub tail_fraction: F,
}

/// c_{l,t} = F_{n+l}Φ_{n,l}(0)/B(n,t+1) by the nested series
/// a_0(M) = B(n+M,t+1), a_{k+1}(M) = (1/(M-k)) Σ_{M'≥M} a_k(M')/(M'-k),
/// c_l = a_l(l)/B(n,t+1), evaluated with ratios a_k(M)/B(n,t+1).
pub fn c_coeff_series<F: Float>(n: usize, l: usize, t: F) -> Result<CCoeff<F>> {
    check_open_weight(t)?;
    if n == 0 {
        return domain("dimension must be positive");
    }
    if l > MAX_PHI_DEPTH {
        return Err(Error::Unsupported(format!("c_l for l = {l} > {MAX_PHI_DEPTH}")));
    }
    if l == 0 {
        return Ok(CCoeff { value: F::one(), terms: 0, tail_fraction: F::zero() });
    }
    let tf = t.approx_f64();
    let mmax = (2000.0f64).max(40.0 * (tf + (n + l) as f64)).min(5.0e6) as usize;
    let mut a = vec![F::zero(); mmax + 1];
    a[0] = F::one();
    let tiny = F::min_positive_value() * F::c(1e20);
    for mm in 0..mmax {
        let nm = F::cu(n + mm);
        a[mm + 1] = a[mm] * nm / (nm + t + F::one());
        if a[mm + 1] < tiny {
            a[mm + 1] = F::zero();
        }
    }
    let mut tail_fraction = F::zero();
    for k in 0..l {
        let mut b = vec![F::zero(); mmax + 1];
        for mm in k + 1..=mmax {
            b[mm] = a[mm] / F::cu(mm - k);
        }
        let p = t + F::cu(2 + k);
        let tail = asymptotic_tail(&b, mmax, p);
        let mut next = vec![F::zero(); mmax + 1];
        let mut acc = tail;
        for mm in (k + 1..=mmax).rev() {
            acc = acc + b[mm];
            next[mm] = acc / F::cu(mm - k);
        }
        if acc > F::zero() {
            tail_fraction = tail_fraction.max(tail / acc);
        }
        a = next;
    }
    let value = a[l];
    if !value.is_finite() || !(value > F::zero()) {
        return Err(Error::NoConvergence(format!("c_{l} series produced {value}")));
    }
    Ok(CCoeff { value, terms: mmax, tail_fraction })
}

/// c_{l,t} by the series route.
pub fn c_coeff<F: Float>(n: usize, l: usize, t: F) -> Result<F> {
    Ok(c_coeff_series(n, l, t)?.value)
}

/// Series value together with the nested-quadrature value.
#[derive(Debug, Clone, PartialEq)]
pub struct CCoeffCheck<F> {
    pub series: F,
    pub quadrature: F,
    pub rel_mismatch: F,
    /// Set when the two routes differ by more than 1e-8 relative.
    pub diagnostic: Option<String>,
}

pub fn c_coeff_checked<F: Float>(n: usize, l: usize, t: F, cfg: PhiConfig) -> Result<CCoeffCheck<F>> {
    let series = c_coeff(n, l, t)?;
    let quadrature = if l == 0 {
        F::one()
    } else {
        let table = PhiTable::build(n, l, t, cfg)?;
        table.moment_at_zero(l)? / beta(F::cu(n), t + F::one())?
    };
    let rel_mismatch = ((series - quadrature) / series).abs();
    let diagnostic = (rel_mismatch > F::c(1e-8)).then(|| {
        format!("c_{{{l},t}} series {series:e} and quadrature {quadrature:e} differ by {rel_mismatch:e} (n={n}, t={t})")
    });
    Ok(CCoeffCheck { series, quadrature, rel_mismatch, diagnostic })
}

// ---------------------------------------------------------------------------
// ρ_t

/// Bernoulli relative entropy x ln(x/s) + (1-x) ln((1-x)/(1-s)), i.e. -F(s,x).
fn kl_bernoulli<F: Float>(s: F, oms: F, x: F, omx: F) -> F {
    let d = x - s;
    if d.abs() < F::c(1e-6) * s {
        let so = s * oms;
        let d2 = d * d;
        return d2 / (F::c(2.0) * so) + d2 * d * (F::c(2.0) * s - F::one()) / (F::c(6.0) * so * so)
            + d2 * d2 * (F::one() / (s * s * s) + F::one() / (oms * oms * oms)) / F::c(12.0);
    }
    let a = x * (x / s).ln();
    let b = if omx > F::zero() { omx * (omx / oms).ln() } else { F::zero() };
    (a + b).max(F::zero())
}

/// ρ_t(s) on (0,1); closed form -ln(s)/(16π²) at t = -1.
pub fn rho<F: Float>(t: F, s: F) -> Result<F> {
    if !(s > F::zero() && s < F::one()) {
        return domain(format!("ρ_t needs s in (0,1), got {s}"));
    }
    if t < -F::one() {
        return domain(format!("ρ_t needs t >= -1, got {t}"));
    }
    let c16 = F::c(16.0) * F::PI() * F::PI();
    if t == -F::one() {
        return Ok(-s.ln() / c16);
    }
    let oms = F::one() - s;
    // Next to s = 1 the value is far below any scale of interest; the
    // absolute floor keeps round-off from stalling the refinement there.
    let opts = QuadOptions { abs_tol: 1e-24, ..quad_opts() };
    let res = integrate_to_one(|x: F, omx: F| kl_bernoulli(s, oms, x, omx) / x, s, t, &opts)?;
    Ok((t + F::one()) / c16 * res.value)
}
