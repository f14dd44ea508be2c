//! Gaussian rules and adaptive interval quadrature.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Float;

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type RuleKey = (usize, u64, u64);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(key: RuleKey, build: impl FnOnce() -> GaussRule) -> Arc<GaussRule> {
    if let Some(r) = rule_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(build());
    rule_cache().lock().unwrap().entry(key).or_insert(rule).clone()
}

impl GaussRule {
    /// Gauss-Legendre rule with `n` points (Newton iteration on the three-term recurrence).
    pub fn legendre(n: usize) -> Arc<GaussRule> {
        assert!(n >= 1);
        cached((n, u64::MAX, u64::MAX), || {
            let mut nodes = vec![0.0; n];
            let mut weights = vec![0.0; n];
            for i in 0..n.div_ceil(2) {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 1.0;
                for _ in 0..100 {
                    let (p, d) = legendre_eval(n, x);
                    dp = d;
                    let dx = p / d;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                let (_, d) = legendre_eval(n, x);
                if d != 0.0 {
                    dp = d;
                }
                let w = 2.0 / ((1.0 - x * x) * dp * dp);
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                weights[i] = w;
                weights[n - 1 - i] = w;
            }
            if n % 2 == 1 {
                nodes[n / 2] = 0.0;
            }
            GaussRule { nodes, weights }
        })
    }

    /// Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta via Golub-Welsch.
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Arc<GaussRule> {
        assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
        if alpha == 0.0 && beta == 0.0 {
            return Self::legendre(n);
        }
        cached((n, alpha.to_bits(), beta.to_bits()), || golub_welsch_jacobi(n, alpha, beta))
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Float>(&self, a: F, b: F, mut f: impl FnMut(F) -> F) -> F {
        let half = (b - a) * F::c(0.5);
        let mid = (a + b) * F::c(0.5);
        let mut acc = F::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + F::c(*w) * f(mid + half * F::c(*x));
        }
        acc * half
    }
}

fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

fn golub_welsch_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    let ab = a + b;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        m[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let off2 = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * j * (j + a) * (j + b) * (j + ab)
                    / ((2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0))
            };
            let off = off2.sqrt();
            m[(k, k + 1)] = off;
            m[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * crate::special_fn::beta::<f64>(a + 1.0, b + 1.0).expect("positive arguments");
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-11, abs_tol: 1e-300, max_panels: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<F> {
    pub value: F,
    pub error: F,
    pub panels: usize,
}

#[derive(Clone, Copy)]
struct Panel<F> {
    lo: F,
    hi: F,
    /// 1 - hi, kept separately so that 1 - r stays accurate next to r = 1.
    one_minus_hi: F,
    value: F,
    error: F,
}

struct HeapItem {
    error: f64,
    seq: usize,
    idx: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then_with(|| o.seq.cmp(&self.seq))
    }
}

const LOW_ORDER: usize = 10;
const HIGH_ORDER: usize = 20;

/// ∫_a^b f(r, 1-r) (1-r)^t dr. When `weight_t` is `Some(t)` the panel touching
/// r = 1 (requires b = 1) uses a Gauss-Jacobi rule that absorbs (1-r)^t exactly.
fn adaptive_core<F: Float>(
    f: &dyn Fn(F, F) -> F,
    a: F,
    b: F,
    one_minus_b: F,
    weight_t: Option<F>,
    opts: &QuadOptions,
) -> Result<QuadResult<F>> {
    let half = F::c(0.5);
    let eval_panel = |lo: F, hi: F, omh: F, at_one: bool| -> (F, F) {
        let h = (hi - lo) * half;
        let mid = (hi + lo) * half;
        let run = |rule: &GaussRule, jac: bool| -> F {
            let mut acc = F::zero();
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let xf = F::c(*x);
                let r = mid + h * xf;
                let omr = omh + h * (F::one() - xf);
                let mut v = f(r, omr);
                if !jac {
                    if let Some(t) = weight_t {
                        v = v * omr.powf(t);
                    }
                }
                acc = acc + F::c(*w) * v;
            }
            match (jac, weight_t) {
                (true, Some(t)) => acc * h.powf(t + F::one()),
                _ => acc * h,
            }
        };
        if at_one {
            let t = weight_t.unwrap().approx_f64();
            let lo_v = run(&GaussRule::jacobi(LOW_ORDER, t, 0.0), true);
            let hi_v = run(&GaussRule::jacobi(HIGH_ORDER, t, 0.0), true);
            (hi_v, (hi_v - lo_v).abs())
        } else {
            let lo_v = run(&GaussRule::legendre(LOW_ORDER), false);
            let hi_v = run(&GaussRule::legendre(HIGH_ORDER), false);
            (hi_v, (hi_v - lo_v).abs())
        }
    };
    let jac_end = weight_t.is_some() && one_minus_b == F::zero();
    let mut panels: Vec<Panel<F>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let push = |panels: &mut Vec<Panel<F>>, heap: &mut BinaryHeap<HeapItem>, seq: &mut usize, p: Panel<F>| {
        heap.push(HeapItem { error: p.error.approx_f64(), seq: *seq, idx: panels.len() });
        *seq += 1;
        panels.push(p);
    };
    let (v, e) = eval_panel(a, b, one_minus_b, jac_end);
    push(&mut panels, &mut heap, &mut seq, Panel { lo: a, hi: b, one_minus_hi: one_minus_b, value: v, error: e });
    let mut live = vec![true];
    let mut total = v;
    let mut err = e;
    while err.approx_f64() > opts.abs_tol.max(opts.rel_tol * total.abs().approx_f64()) {
        if panels.len() >= opts.max_panels {
            let achieved = err.approx_f64() / total.abs().approx_f64().max(f64::MIN_POSITIVE);
            return Err(Error::Quadrature { achieved });
        }
        let Some(item) = heap.pop() else { break };
        let p = panels[item.idx];
        live[item.idx] = false;
        let mid = (p.lo + p.hi) * half;
        let at_one = jac_end && p.one_minus_hi == F::zero();
        let omm = p.one_minus_hi + (p.hi - mid);
        let (v1, e1) = eval_panel(p.lo, mid, omm, false);
        let (v2, e2) = eval_panel(mid, p.hi, p.one_minus_hi, at_one);
        total = total - p.value + v1 + v2;
        err = err - p.error + e1 + e2;
        push(&mut panels, &mut heap, &mut seq, Panel { lo: p.lo, hi: mid, one_minus_hi: omm, value: v1, error: e1 });
        live.push(true);
        push(&mut panels, &mut heap, &mut seq, Panel { lo: mid, hi: p.hi, one_minus_hi: p.one_minus_hi, value: v2, error: e2 });
        live.push(true);
    }
    // Deterministic final reduction in interval order.
    let mut order: Vec<usize> = (0..panels.len()).filter(|&i| live[i]).collect();
    order.sort_by(|&i, &j| panels[i].lo.partial_cmp(&panels[j].lo).unwrap());
    let mut value = F::zero();
    let mut error = F::zero();
    for i in &order {
        value = value + panels[*i].value;
        error = error + panels[*i].error;
    }
    Ok(QuadResult { value, error, panels: order.len() })
}

/// Adaptive Gauss-Legendre quadrature of `f` over [a, b].
pub fn integrate<F: Float>(f: impl Fn(F) -> F, a: F, b: F, opts: &QuadOptions) -> Result<QuadResult<F>> {
    let g = |r: F, _omr: F| f(r);
    adaptive_core(&g, a, b, F::one() - b, None, opts)
}

/// ∫_s^1 f(r, 1-r) (1-r)^t dr with a Jacobi-weighted rule on the panel touching 1.
/// `f` receives both r and the accurately computed complement 1-r.
pub fn integrate_to_one<F: Float>(
    f: impl Fn(F, F) -> F,
    s: F,
    t: F,
    opts: &QuadOptions,
) -> Result<QuadResult<F>> {
    if s >= F::one() {
        return Ok(QuadResult { value: F::zero(), error: F::zero(), panels: 0 });
    }
    adaptive_core(&f, s, F::one(), F::zero(), Some(t), opts)
}
