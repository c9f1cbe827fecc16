//! Golden-section maximization of the Hardy ratio over the near-extremal
//! family's exponent shift.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::make_hardy_extremal;
use crate::geometry::GrushinSpace;
use crate::params::{hardy_constant, HardyParams};

use super::{evaluate, EvalOptions, InequalityKind, InequalitySpec};

/// One optimizer evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchTracePoint {
    pub eps_shift: f64,
    pub ratio: f64,
    pub best_so_far: f64,
}

/// Search configuration. The initial grid is swept in the given order (the
/// canonical probe descends 0.4 → 0.05), then golden-section refines on
/// [`eps_shift_min`, max grid point] in log scale.
#[derive(Debug, Clone, Serialize)]
pub struct SharpSearchConfig {
    pub eps_shift_grid: Vec<f64>,
    pub eps_shift_min: f64,
    pub max_iters: usize,
    /// Bracket width (in ln eps_shift) at which the search stops.
    pub xtol: f64,
}

impl Default for SharpSearchConfig {
    fn default() -> Self {
        Self { eps_shift_grid: vec![0.4, 0.2, 0.1, 0.05], eps_shift_min: 5e-3, max_iters: 60, xtol: 2e-2 }
    }
}

/// Search outcome with the full reproducible trace.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub best_ratio: f64,
    pub best_eps_shift: f64,
    pub target_constant: f64,
    pub fraction_of_target: f64,
    /// Ratios at the initial grid, in sweep order.
    pub grid_ratios: Vec<SearchTracePoint>,
    pub trace: Vec<SearchTracePoint>,
    pub converged: bool,
}

/// Maximizes the Hardy ratio over the `hardy_extremal` family's `eps_shift`
/// by golden-section on one parameter, seeded by the configured grid sweep.
/// Reports the best ratio and the fraction of the explicit constant reached.
pub fn sharp_search(
    space: &GrushinSpace,
    params: &HardyParams,
    cfg: &SharpSearchConfig,
    opts: &EvalOptions,
) -> Result<SearchReport> {
    let target = hardy_constant(space, params)?;
    let spec = InequalitySpec { space: *space, kind: InequalityKind::Hardy(*params) };
    if cfg.eps_shift_grid.is_empty() {
        return Err(Error::InvalidParameter("sharp search needs a non-empty grid".into()));
    }
    if !(cfg.eps_shift_min > 0.0) {
        return Err(Error::InvalidParameter("eps_shift_min must be positive".into()));
    }

    let mut best = f64::NEG_INFINITY;
    let mut best_shift = f64::NAN;
    let mut trace: Vec<SearchTracePoint> = Vec::new();

    let mut eval_shift = |shift: f64, trace: &mut Vec<SearchTracePoint>, best: &mut f64, best_shift: &mut f64| -> Result<f64> {
        let u = make_hardy_extremal(&spec.space, params.p, params.alpha, shift)?;
        let rep = evaluate(&spec, &u, opts)?;
        if rep.ratio > *best {
            *best = rep.ratio;
            *best_shift = shift;
        }
        trace.push(SearchTracePoint { eps_shift: shift, ratio: rep.ratio, best_so_far: *best });
        Ok(rep.ratio)
    };

    let mut grid_ratios = Vec::with_capacity(cfg.eps_shift_grid.len());
    for &shift in &cfg.eps_shift_grid {
        eval_shift(shift, &mut trace, &mut best, &mut best_shift)?;
        grid_ratios.push(*trace.last().expect("trace populated"));
    }

    // Golden-section in ln(eps_shift) on [eps_shift_min, max grid point].
    let hi_bound = cfg.eps_shift_grid.iter().cloned().fold(f64::MIN, f64::max);
    let mut a = cfg.eps_shift_min.ln();
    let mut b = hi_bound.ln();
    if a >= b {
        return Err(Error::InvalidParameter("eps_shift_min must sit below the grid".into()));
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval_shift(c.exp(), &mut trace, &mut best, &mut best_shift)?;
    let mut fd = eval_shift(d.exp(), &mut trace, &mut best, &mut best_shift)?;
    let mut iters = 2usize;
    let mut converged = false;
    while iters < cfg.max_iters {
        if (b - a).abs() <= cfg.xtol {
            converged = true;
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval_shift(c.exp(), &mut trace, &mut best, &mut best_shift)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval_shift(d.exp(), &mut trace, &mut best, &mut best_shift)?;
        }
        iters += 1;
    }
    if !converged && (b - a).abs() <= cfg.xtol {
        converged = true;
    }
    if !converged {
        return Err(Error::BudgetExhausted);
    }

    Ok(SearchReport {
        best_ratio: best,
        best_eps_shift: best_shift,
        target_constant: target,
        fraction_of_target: best / target,
        grid_ratios,
        trace,
        converged,
    })
}
