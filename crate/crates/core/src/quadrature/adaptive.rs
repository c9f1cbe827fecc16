//! Error-driven adaptive refinement in one and two dimensions.
//!
//! Cells carry a fixed-order Gauss–Legendre estimate; the error indicator is
//! the difference against the sum over the dyadic children. The worst cell is
//! refined first, which drives the subdivision toward the singular edges of
//! weighted integrands without any a-priori grading.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::gauss::{gauss_rule, GaussRule};
use super::QuadratureResult;

/// Knobs shared by the adaptive integrators.
#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    /// Per-cell Gauss–Legendre order.
    pub order: usize,
    /// Hard cap on integrand evaluations per integral.
    pub max_evals: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self { order: 15, max_evals: 4_000_000 }
    }
}

/// Smallest cell width (relative to the root) that is still split.
const MIN_REL_WIDTH: f64 = 1e-290;

struct Entry1 {
    a: f64,
    b: f64,
    halves: [f64; 2],
    fine: f64,
    err: f64,
}

impl PartialEq for Entry1 {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Entry1 {}
impl PartialOrd for Entry1 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry1 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn gl1<F: FnMut(f64) -> f64>(
    rule: &GaussRule,
    lo: f64,
    hi: f64,
    f: &mut F,
    n_evals: &mut usize,
) -> f64 {
    *n_evals += rule.nodes.len();
    rule.integrate(lo, hi, &mut *f)
}

fn make1<F: FnMut(f64) -> f64>(
    rule: &GaussRule,
    lo: f64,
    hi: f64,
    coarse: f64,
    f: &mut F,
    n_evals: &mut usize,
) -> Entry1 {
    let mid = 0.5 * (lo + hi);
    let v0 = gl1(rule, lo, mid, f, n_evals);
    let v1 = gl1(rule, mid, hi, f, n_evals);
    let fine = v0 + v1;
    Entry1 { a: lo, b: hi, halves: [v0, v1], fine, err: (fine - coarse).abs() }
}

/// Adaptive 1-D integration of `f` over [a, b] to relative tolerance `tol`.
/// Endpoint singularities are fine: nodes are strictly interior.
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    cfg: &AdaptiveConfig,
) -> Result<QuadratureResult> {
    let rule = gauss_rule(cfg.order);
    let mut n_evals = 0usize;
    let root_width = b - a;

    let coarse = gl1(&rule, a, b, &mut f, &mut n_evals);
    let root = make1(&rule, a, b, coarse, &mut f, &mut n_evals);
    let mut total = root.fine;
    let mut err_total = root.err;
    let mut heap = BinaryHeap::new();
    heap.push(root);
    let mut stuck_err = 0.0;

    loop {
        let scale = total.abs().max(1e-300);
        if err_total + stuck_err <= tol * scale {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: err_total + stuck_err,
                n_evals,
                converged: true,
            });
        }
        if n_evals >= cfg.max_evals || heap.is_empty() {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: err_total + stuck_err,
                n_evals,
                converged: false,
            });
        }
        let worst = heap.pop().expect("heap non-empty");
        err_total -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        if !((worst.b - worst.a) > MIN_REL_WIDTH * root_width) || mid <= worst.a || mid >= worst.b {
            stuck_err += worst.err;
            continue;
        }
        total -= worst.fine;
        for (i, (lo, hi)) in [(worst.a, mid), (mid, worst.b)].into_iter().enumerate() {
            let child = make1(&rule, lo, hi, worst.halves[i], &mut f, &mut n_evals);
            total += child.fine;
            err_total += child.err;
            heap.push(child);
        }
    }
}

struct Entry2 {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    quads: [f64; 4],
    fine: f64,
    err: f64,
}

impl PartialEq for Entry2 {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Entry2 {}
impl PartialOrd for Entry2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry2 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

fn gl2<F: FnMut(f64, f64) -> f64>(
    rule: &GaussRule,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    f: &mut F,
    n_evals: &mut usize,
) -> f64 {
    *n_evals += rule.nodes.len() * rule.nodes.len();
    let hx = 0.5 * (x1 - x0);
    let cx = 0.5 * (x0 + x1);
    let hy = 0.5 * (y1 - y0);
    let cy = 0.5 * (y0 + y1);
    let mut acc = 0.0;
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        let x = cx + hx * xi;
        let mut row = 0.0;
        for (yj, wj) in rule.nodes.iter().zip(&rule.weights) {
            row += wj * f(x, cy + hy * yj);
        }
        acc += wi * row;
    }
    acc * hx * hy
}

fn make2<F: FnMut(f64, f64) -> f64>(
    rule: &GaussRule,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    coarse: f64,
    f: &mut F,
    n_evals: &mut usize,
) -> Entry2 {
    let mx = 0.5 * (x0 + x1);
    let my = 0.5 * (y0 + y1);
    let q = [
        gl2(rule, (x0, mx), (y0, my), f, n_evals),
        gl2(rule, (mx, x1), (y0, my), f, n_evals),
        gl2(rule, (x0, mx), (my, y1), f, n_evals),
        gl2(rule, (mx, x1), (my, y1), f, n_evals),
    ];
    let fine = q.iter().sum();
    Entry2 { x0, x1, y0, y1, quads: q, fine, err: (fine - coarse).abs() }
}

/// Outcome classification when the budget runs out: a divergent integral
/// keeps growing as refinement shrinks the inner cutoff, with increments
/// that do not die down.
fn classify_budget_exhaustion(history: &[f64], value: f64, err: f64, n_evals: usize) -> Error {
    if history.len() >= 6 {
        let tail = &history[history.len() - 6..];
        let increments: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        let all_up = increments.iter().all(|d| *d > 0.0);
        let sustained = increments.windows(2).all(|w| w[1] >= 0.5 * w[0]);
        if all_up && sustained && increments.last().copied().unwrap_or(0.0) > 1e-6 * value.abs() {
            return Error::Divergent(format!(
                "running total still growing after {n_evals} evaluations (last {value:.6e})"
            ));
        }
    }
    Error::NonConvergence { value, estimate: err, n_evals }
}

/// Adaptive 2-D integration of `f` over [x0, x1] × [y0, y1] to relative
/// tolerance `tol`. Divergent integrands are reported as
/// [`Error::Divergent`], never as a number.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    x: (f64, f64),
    y: (f64, f64),
    tol: f64,
    cfg: &AdaptiveConfig,
) -> Result<QuadratureResult> {
    let rule = gauss_rule(cfg.order);
    let mut n_evals = 0usize;
    let root_wx = x.1 - x.0;
    let root_wy = y.1 - y.0;

    let coarse = gl2(&rule, x, y, &mut f, &mut n_evals);
    let root = make2(&rule, x, y, coarse, &mut f, &mut n_evals);
    let mut total = root.fine;
    let mut err_total = root.err;
    let mut heap = BinaryHeap::new();
    heap.push(root);
    let mut stuck_err = 0.0;

    let checkpoint_step = (cfg.max_evals / 32).max(10_000);
    let mut next_checkpoint = checkpoint_step;
    let mut history: Vec<f64> = Vec::new();

    loop {
        let scale = total.abs().max(1e-300);
        if err_total + stuck_err <= tol * scale {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: err_total + stuck_err,
                n_evals,
                converged: true,
            });
        }
        if n_evals >= next_checkpoint {
            history.push(total);
            next_checkpoint += checkpoint_step;
        }
        if n_evals >= cfg.max_evals || heap.is_empty() {
            return Err(classify_budget_exhaustion(&history, total, err_total + stuck_err, n_evals));
        }
        let worst = heap.pop().expect("heap non-empty");
        err_total -= worst.err;
        let mx = 0.5 * (worst.x0 + worst.x1);
        let my = 0.5 * (worst.y0 + worst.y1);
        let splittable = (worst.x1 - worst.x0) > MIN_REL_WIDTH * root_wx
            && (worst.y1 - worst.y0) > MIN_REL_WIDTH * root_wy
            && mx > worst.x0
            && mx < worst.x1
            && my > worst.y0
            && my < worst.y1;
        if !splittable {
            stuck_err += worst.err;
            continue;
        }
        total -= worst.fine;
        let children = [
            ((worst.x0, mx), (worst.y0, my)),
            ((mx, worst.x1), (worst.y0, my)),
            ((worst.x0, mx), (my, worst.y1)),
            ((mx, worst.x1), (my, worst.y1)),
        ];
        for (i, (cx, cy)) in children.into_iter().enumerate() {
            let child = make2(&rule, cx, cy, worst.quads[i], &mut f, &mut n_evals);
            total += child.fine;
            err_total += child.err;
            heap.push(child);
        }
    }
}

/// Integrates `exp(ln_f(u))` over `u ∈ (-∞, u_max]`, extending the domain
/// leftward in doubling blocks until the added mass is negligible. This is
/// the log-radius workhorse behind the separable polar route: radial
/// integrands are supplied as log-values so steep gauge powers neither
/// overflow nor underflow.
pub fn integrate_left_tail<F: Fn(f64) -> f64>(
    ln_f: F,
    u_max: f64,
    tol: f64,
    cfg: &AdaptiveConfig,
) -> Result<QuadratureResult> {
    let f = |u: f64| ln_f(u).exp();
    let mut width = 8.0;
    let mut hi = u_max;
    let mut lo = u_max - width;
    let first = integrate_1d(f, lo, hi, tol, cfg)?;
    let mut total = first.value;
    let mut err = first.error_estimate;
    let mut n_evals = first.n_evals;
    let mut small_blocks = 0;
    let mut prev_block = first.value.abs();

    for round in 0..=60 {
        hi = lo;
        width *= 2.0;
        lo = hi - width;
        let block = integrate_1d(f, lo, hi, tol, cfg)?;
        n_evals += block.n_evals;
        total += block.value;
        err += block.error_estimate;
        let mass = block.value.abs();
        let scale = total.abs().max(1e-300);
        if mass <= 0.25 * tol * scale {
            small_blocks += 1;
            if small_blocks >= 2 {
                return Ok(QuadratureResult {
                    value: total,
                    error_estimate: err + mass,
                    n_evals,
                    converged: true,
                });
            }
        } else {
            small_blocks = 0;
        }
        // Divergence: leftward blocks stop shrinking (log-divergent weights
        // add constant-or-growing mass per doubling).
        if round >= 8 && mass > 0.5 * prev_block && mass > tol * scale {
            return Err(Error::Divergent(format!(
                "left-tail blocks not decaying (last block {mass:.3e} vs total {total:.3e})"
            )));
        }
        prev_block = mass.max(1e-300);
    }
    Err(Error::NonConvergence { value: total, estimate: err, n_evals })
}
