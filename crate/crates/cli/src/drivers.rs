use std::time::Instant;

use bergtrace::diag::OpExpr;
use bergtrace::forms::{
    cc_limit_integral, disk_semicommutator_rhs, hankel_limit_integral, hankel_s4_bound, helton_howe_integral,
    mixed_wedge_integral,
};
use bergtrace::operators::{budget_check, operator_norm, quantization_residual, Assembly};
use bergtrace::traces::{antisym_trace, connes_chern, expr_trace, partial_antisym_trace, sigma_chain};
use bergtrace::{Parity, QuadratureSpec, Symbol, TraceSeries, WeightParam};
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{Row, VerificationReport};
use crate::CliError;

/// What a driver produces before the pass rule is applied.
struct Cell {
    lhs_raw: f64,
    lhs_extrapolated: f64,
    lhs_err: f64,
    rhs: f64,
    converged: bool,
    /// One-sided check: only lhs < rhs counts as a discrepancy.
    lower_bound: bool,
}

impl Cell {
    fn from_trace(tr: &TraceSeries<f64>, scale: f64, rhs: f64) -> Self {
        Cell {
            lhs_raw: scale * tr.raw().re,
            lhs_extrapolated: scale * tr.limit().re,
            lhs_err: scale.abs() * tr.error(),
            rhs,
            converged: tr.converged(),
            lower_bound: false,
        }
    }
}

fn padding(fs: &[Symbol]) -> usize {
    fs.iter().map(|f| f.d_h() as usize).sum()
}

fn chain_trace(hs: &[Symbol], n: usize, t: &WeightParam<f64>, degree: usize) -> Result<TraceSeries<f64>, CliError> {
    let e: OpExpr<f64> = sigma_chain(hs)?;
    Ok(expr_trace(&e, n, t, degree)?)
}

/// Quadrature for the disk right-hand side; its own tolerance is fixed so
/// that the reported rhs does not depend on the verification tolerance.
fn disk_spec() -> QuadratureSpec {
    QuadratureSpec::new(16, vec![48], true, 1e-8).expect("valid quadrature spec")
}

fn hankel_chain(g: &Symbol, p: usize) -> Vec<Symbol> {
    (0..p).flat_map(|_| [g.conj(), g.clone()]).collect()
}

fn run_cell(cfg: &ExperimentConfig, t: f64, degree: usize) -> Result<Cell, CliError> {
    let w = WeightParam::new(t)?;
    let n = cfg.n;
    let (fs, gs) = (&cfg.fs, &cfg.gs);
    let pad = match cfg.experiment {
        Experiment::HankelSchatten => cfg.p * padding(&[fs[0].clone(), fs[0].conj()]),
        Experiment::UncertaintyS4 => 2 * padding(fs).max(padding(&fs.iter().map(|f| f.conj()).collect::<Vec<_>>())),
        _ => padding(fs) + padding(gs),
    };
    budget_check(n, degree + pad, cfg.budget)?;
    let cell = match cfg.experiment {
        Experiment::HeltonHowe => {
            let rhs = helton_howe_integral::<f64, f64>(fs)?.re;
            Cell::from_trace(&antisym_trace(fs, &w, degree)?, 1.0, rhs)
        }
        Experiment::SemicommutatorDisk => {
            let rhs = disk_semicommutator_rhs(&fs[0], &gs[0], &w, &disk_spec())?;
            let mut c = Cell::from_trace(&partial_antisym_trace(fs, gs, Parity::Odd, &w, degree)?, 1.0, rhs.total().re);
            c.lhs_err += rhs.term2_error;
            c
        }
        Experiment::PartialAntisym => {
            let parity = if cfg.odd { Parity::Odd } else { Parity::Even };
            let rhs = mixed_wedge_integral::<f64, f64>(fs, gs)?.re;
            Cell::from_trace(&partial_antisym_trace(fs, gs, parity, &w, degree)?, 1.0, rhs)
        }
        Experiment::ConnesChern => {
            let p = cfg.p;
            let scale = t.powi((p - n) as i32);
            let evens: Vec<Symbol> = fs.iter().step_by(2).cloned().collect();
            let odds: Vec<Symbol> = fs.iter().skip(1).step_by(2).cloned().collect();
            let mut shifted = evens[1..].to_vec();
            shifted.push(evens[0].clone());
            let rhs = cc_limit_integral::<f64, f64>(&evens, &odds, p)? - cc_limit_integral::<f64, f64>(&odds, &shifted, p)?;
            let cc = connes_chern(fs, p, &w, degree)?;
            Cell {
                lhs_raw: scale * (cc.first.raw() - cc.second.raw()).re,
                lhs_extrapolated: scale * cc.value.re,
                lhs_err: scale.abs() * cc.error,
                rhs: rhs.re,
                converged: cc.first.converged() && cc.second.converged(),
                lower_bound: false,
            }
        }
        Experiment::QuantizationDecay => {
            // the slope is filled in once the whole t column is known
            let r = quantization_residual(&fs[0], &gs[0], cfg.k, &w, Assembly { budget: cfg.budget, ..Assembly::new(degree) })?;
            let norm = operator_norm(&r)?;
            Cell { lhs_raw: norm, lhs_extrapolated: f64::NAN, lhs_err: 0.0, rhs: -(cfg.k as f64 + 1.0), converged: true, lower_bound: false }
        }
        Experiment::HankelSchatten => {
            let g = &fs[0];
            let p = cfg.p;
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let tr = chain_trace(&hankel_chain(g, p), n, &w, degree)?;
            if p > n {
                let rhs: f64 = hankel_limit_integral(g, p)?;
                Cell::from_trace(&tr, sign * t.powi((p - n) as i32), rhs)
            } else {
                // p = n = 1: exact at every t through the disk formula
                let rhs = disk_semicommutator_rhs(&g.conj(), g, &w, &disk_spec())?;
                let mut c = Cell::from_trace(&tr, -1.0, -rhs.total().re);
                c.lhs_err += rhs.term2_error;
                c
            }
        }
        Experiment::UncertaintyS4 => {
            let rhs: f64 = hankel_s4_bound(&fs[0], &fs[1])?;
            let s4 = |f: &Symbol| chain_trace(&[f.clone(), f.conj(), f.clone(), f.conj()], n, &w, degree);
            let (a, b) = (s4(&fs[0])?, s4(&fs[1])?);
            let (la, lb) = (a.limit().re.max(0.0), b.limit().re.max(0.0));
            let lhs = (la * lb).sqrt();
            let rel = |e: f64, v: f64| if v > 0.0 { e / (2.0 * v) } else { f64::INFINITY };
            Cell {
                lhs_raw: (a.raw().re.max(0.0) * b.raw().re.max(0.0)).sqrt(),
                lhs_extrapolated: lhs,
                lhs_err: lhs * (rel(a.error(), la) + rel(b.error(), lb)),
                rhs,
                converged: a.converged() && b.converged(),
                lower_bound: true,
            }
        }
    };
    Ok(cell)
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn finish(cfg: &ExperimentConfig, t: f64, degree: usize, c: &Cell) -> Row {
    let abs_diff = if c.lower_bound { (c.rhs - c.lhs_extrapolated).max(0.0) } else { (c.lhs_extrapolated - c.rhs).abs() };
    Row {
        experiment: cfg.experiment.id().to_string(),
        t,
        n_core: degree,
        lhs_raw: c.lhs_raw,
        lhs_extrapolated: c.lhs_extrapolated,
        lhs_err: c.lhs_err,
        rhs: c.rhs,
        abs_diff,
        pass: c.converged && abs_diff <= cfg.tolerance,
    }
}

/// Runs every (t, N) cell, `workers` at a time; rows come back in grid order.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<VerificationReport, CliError> {
    let start = Instant::now();
    let grid: Vec<(f64, usize)> = cfg.t.iter().flat_map(|&t| cfg.degrees.iter().map(move |&d| (t, d))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Resource(e.to_string()))?;
    let results: Vec<Result<Cell, CliError>> = pool.install(|| grid.par_iter().map(|&(t, d)| run_cell(cfg, t, d)).collect());

    let mut cells = Vec::with_capacity(grid.len());
    for r in results {
        match r {
            Ok(c) => cells.push(c),
            // a cell that cannot be evaluated is a failed row, not a crash
            Err(CliError::Compute(_)) => cells.push(Cell {
                lhs_raw: f64::NAN,
                lhs_extrapolated: f64::NAN,
                lhs_err: f64::NAN,
                rhs: f64::NAN,
                converged: false,
                lower_bound: false,
            }),
            Err(e) => return Err(e),
        }
    }
    if cfg.experiment == Experiment::QuantizationDecay {
        for &d in &cfg.degrees {
            let idx: Vec<usize> = (0..grid.len()).filter(|&i| grid[i].1 == d).collect();
            let xs: Vec<f64> = idx.iter().map(|&i| grid[i].0).collect();
            let ys: Vec<f64> = idx.iter().map(|&i| cells[i].lhs_raw).collect();
            let slope = log_slope(&xs, &ys);
            for &i in &idx {
                cells[i].lhs_extrapolated = slope;
            }
        }
    }
    let rows = grid.iter().zip(&cells).map(|(&(t, d), c)| finish(cfg, t, d, c)).collect();
    Ok(VerificationReport {
        experiment: cfg.experiment.id().to_string(),
        n: cfg.n,
        fs: cfg.fs_text.clone(),
        gs: cfg.gs_text.clone(),
        tolerance: cfg.tolerance,
        seed: cfg.seed,
        rows,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}
