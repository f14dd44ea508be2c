//! Limits of slowly converging partial sums: polynomial (Richardson/Neville)
//! extrapolation in h = 1/(N + shift), and a power-law tail fit used as a
//! convergence diagnostic.

use crate::scalar::Float;
use crate::special_fn::hurwitz_zeta;

/// Value of the interpolating polynomial through (h_i, y_i) at h = 0.
pub fn neville_at_zero<F: Float>(h: &[F], y: &[F]) -> F {
    let mut p = y.to_vec();
    let m = p.len();
    for k in 1..m {
        for i in 0..m - k {
            p[i] = (h[i + k] * p[i] - h[i] * p[i + 1]) / (h[i + k] - h[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation<F> {
    pub value: F,
    pub error: F,
    pub degree: usize,
    pub spacing: usize,
}

/// Extrapolates partial sums `cum[N]` to N → ∞ assuming an expansion in
/// powers of h = 1/(N + shift). Several spacings and degrees are tried over
/// the upper half of the data; the estimate whose two highest degrees agree
/// best is kept, and that disagreement is the error estimate.
pub fn richardson<F: Float>(cum: &[F], shift: F, max_degree: usize) -> Option<Extrapolation<F>> {
    let last = cum.len().checked_sub(1)?;
    if last < 4 {
        return None;
    }
    let hs = |m: usize| F::one() / (F::cu(m) + shift);
    let mut best: Option<Extrapolation<F>> = None;
    for k in 2..=max_degree {
        for frac in [2usize, 3, 4] {
            // points last, last-Δ, …, last-kΔ within the last 1/frac of the data
            let spacing = (last / (frac * k)).max(1);
            if k * spacing > last {
                continue;
            }
            let pts: Vec<usize> = (0..=k).map(|j| last - j * spacing).collect();
            let h: Vec<F> = pts.iter().map(|&m| hs(m)).collect();
            let y: Vec<F> = pts.iter().map(|&m| cum[m]).collect();
            let hi = neville_at_zero(&h, &y);
            let lo = neville_at_zero(&h[..k], &y[..k]);
            if !hi.is_finite() {
                continue;
            }
            let err = (hi - lo).abs();
            if best.map_or(true, |b| err < b.error) {
                best = Some(Extrapolation { value: hi, error: err, degree: k, spacing });
            }
        }
    }
    best
}

/// Least-squares fit |s_d| ≈ c d^{-q} over the shells d in `lo..=hi`, which
/// must share one sign and be nonzero. Returns (c·sign, q).
pub fn power_law_fit<F: Float>(shells: &[F], lo: usize, hi: usize) -> Option<(F, F)> {
    if hi >= shells.len() || lo < 1 || hi < lo + 2 {
        return None;
    }
    let sgn = shells[hi].signum();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for d in lo..=hi {
        let s = shells[d];
        if s == F::zero() || s.signum() != sgn {
            return None;
        }
        xs.push(F::cu(d).ln());
        ys.push(s.abs().ln());
    }
    let m = F::cu(xs.len());
    let mx = xs.iter().fold(F::zero(), |a, &b| a + b) / m;
    let my = ys.iter().fold(F::zero(), |a, &b| a + b) / m;
    let sxx = xs.iter().fold(F::zero(), |a, &x| a + (x - mx) * (x - mx));
    let sxy = xs.iter().zip(&ys).fold(F::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
    let slope = sxy / sxx;
    let c = (my - slope * mx).exp();
    Some((c * sgn, -slope))
}

/// Σ_{d > n} c d^{-q} for q > 1.
pub fn power_law_tail<F: Float>(c: F, q: F, n: usize) -> F {
    c * hurwitz_zeta(q, F::cu(n + 1))
}
