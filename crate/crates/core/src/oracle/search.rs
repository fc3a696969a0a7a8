//! Two-parameter exhaustive grid search followed by a nested line-search
//! refinement.
//!
//! The grid keeps two candidates: the best point that meets the constraints
//! to the tight tolerance, and the best point that meets them up to a
//! half-step Lipschitz slack, so a constrained optimum lying between grid
//! nodes is not lost. Each candidate is then refined on a window of a few
//! cells: for fixed `x` the best feasible `y` is found by a scan plus golden
//! section, and the resulting profile is minimized over `x` the same way.

use rayon::prelude::*;
use std::cmp::Ordering;

use crate::optimize::golden_section_min;

/// Tolerance applied to every constraint when a point is accepted.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Absolute tolerance of the golden-section stages of the refinement.
pub const REFINE_TOL: f64 = 1e-12;

/// Refinement window half-width, in grid cells.
const WINDOW_CELLS: f64 = 3.0;
/// Scan points per axis inside the window.
const WINDOW_SCAN: usize = 120;
const MAX_RECENTER: usize = 64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub rate: f64,
    /// Largest constraint excess `value − bound` (units mixed; only the sign
    /// and continuity matter).
    pub viol: f64,
    /// Constraints met within the slack for the spacing of the evaluation.
    pub loose: bool,
}

impl Sample {
    /// Constraints met within [`CONSTRAINT_TOL`].
    pub fn tight(&self) -> bool {
        self.viol <= CONSTRAINT_TOL
    }
}

pub(crate) trait Objective: Sync {
    /// `[(x_lo, x_hi), (y_lo, y_hi)]`.
    fn domain(&self) -> [(f64, f64); 2];

    /// Evaluates at `(x, y)`; `hx`, `hy` are the node spacings, from which the
    /// implementation derives its half-step slack.
    fn eval(&self, x: f64, y: f64, hx: f64, hy: f64) -> Sample;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Point {
    pub rate: f64,
    pub x: f64,
    pub y: f64,
}

impl Point {
    fn order(&self, other: &Self) -> Ordering {
        self.rate.total_cmp(&other.rate).then(self.x.total_cmp(&other.x)).then(self.y.total_cmp(&other.y))
    }
}

fn better(a: Option<Point>, b: Option<Point>) -> Option<Point> {
    match (a, b) {
        (Some(p), Some(q)) => Some(if q.order(&p) == Ordering::Less { q } else { p }),
        (p, None) => p,
        (None, q) => q,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct GridBest {
    tight: Option<Point>,
    loose: Option<Point>,
    feasible: usize,
}

impl GridBest {
    fn merge(self, o: Self) -> Self {
        Self {
            tight: better(self.tight, o.tight),
            loose: better(self.loose, o.loose),
            feasible: self.feasible + o.feasible,
        }
    }

    fn push(&mut self, p: Point, s: Sample) {
        if s.tight() {
            self.feasible += 1;
            self.tight = better(self.tight, Some(p));
        }
        if s.loose || s.tight() {
            self.loose = better(self.loose, Some(p));
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchOutcome {
    pub best: Option<Point>,
    pub feasible_points: usize,
    pub refined: bool,
}

fn node(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
    }
}

/// Runs the grid over `nx × ny` nodes (both ≥ 2) on the current rayon pool,
/// then refines if asked. The result does not depend on the pool size: rows
/// are reduced with a total order on `(rate, x, y)`.
pub(crate) fn minimize(obj: &impl Objective, nx: usize, ny: usize, do_refine: bool) -> SearchOutcome {
    let [(xlo, xhi), (ylo, yhi)] = obj.domain();
    let hx = (xhi - xlo) / (nx - 1) as f64;
    let hy = (yhi - ylo) / (ny - 1) as f64;
    let grid = (0..nx)
        .into_par_iter()
        .map(|i| {
            let x = node(xlo, xhi, i, nx);
            let mut acc = GridBest::default();
            for j in 0..ny {
                let y = node(ylo, yhi, j, ny);
                let s = obj.eval(x, y, hx, hy);
                acc.push(Point { rate: s.rate, x, y }, s);
            }
            acc
        })
        .reduce(GridBest::default, GridBest::merge);

    if !do_refine {
        return SearchOutcome { best: grid.tight, feasible_points: grid.feasible, refined: false };
    }
    let Some(start) = grid.loose else {
        return SearchOutcome { best: None, feasible_points: 0, refined: false };
    };
    let best = refine(obj, start, grid.tight, hx, hy);
    if let (Some(before), Some(after)) = (grid.tight, best) {
        assert!(after.rate <= before.rate, "refinement increased the rate");
        let s = obj.eval(after.x, after.y, 0.0, 0.0);
        assert!(s.tight(), "refinement left the feasible region");
    }
    SearchOutcome { best, feasible_points: grid.feasible, refined: true }
}

/// Best tightly feasible `y` for fixed `x` on `[ylo, yhi]`.
///
/// A scan locates either the best feasible node or, failing that, the least
/// violating one, which golden section then pushes into the feasible set
/// (this is how thin feasible slivers are found). The feasible interval
/// around that point is delimited by bisection and the rate minimized on it.
fn inner(obj: &impl Objective, x: f64, ylo: f64, yhi: f64) -> Option<Point> {
    let n = WINDOW_SCAN;
    let step = (yhi - ylo) / n as f64;
    let node = |k: usize| if k == n { yhi } else { ylo + step * k as f64 };
    let eval = |y: f64| obj.eval(x, y, 0.0, 0.0);
    let mut best_feasible: Option<(usize, f64)> = None;
    let mut least_viol: Option<(usize, f64)> = None;
    for k in 0..=n {
        let s = eval(node(k));
        if s.tight() && best_feasible.is_none_or(|(_, r)| s.rate < r) {
            best_feasible = Some((k, s.rate));
        }
        if least_viol.is_none_or(|(_, v)| s.viol < v) {
            least_viol = Some((k, s.viol));
        }
    }
    let (k, y_feasible) = match best_feasible {
        Some((k, _)) => (k, node(k)),
        None => {
            let (k, _) = least_viol?;
            let (a, b) = (node(k.saturating_sub(1)), node((k + 1).min(n)));
            let (y, v) = golden_section_min(|y| eval(y).viol, a, b, REFINE_TOL);
            if v > CONSTRAINT_TOL {
                return None;
            }
            (k, y)
        }
    };
    let feasible = |y: f64| eval(y).tight();
    let edge = |outer: f64| {
        if feasible(outer) {
            outer
        } else {
            let (mut good, mut bad) = (y_feasible, outer);
            while (good - bad).abs() > REFINE_TOL {
                let mid = 0.5 * (good + bad);
                if mid == good || mid == bad {
                    break;
                }
                if feasible(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        }
    };
    let lo = edge(node(k.saturating_sub(1)));
    let hi = edge(node((k + 1).min(n)));
    let f = |y: f64| {
        let s = eval(y);
        if s.tight() {
            s.rate
        } else {
            f64::INFINITY
        }
    };
    let mut best = (y_feasible, f(y_feasible));
    for cand in [lo, hi, golden_section_min(f, lo, hi, REFINE_TOL).0] {
        let r = f(cand);
        if r < best.1 {
            best = (cand, r);
        }
    }
    best.1.is_finite().then_some(Point { rate: best.1, x, y: best.0 })
}

/// Minimum of `f` (with `+inf` marking infeasible points) by a uniform scan
/// and golden section on the two cells around the best scan point.
fn line_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let n = WINDOW_SCAN;
    let step = (hi - lo) / n as f64;
    let mut best: Option<(usize, f64, f64)> = None;
    for k in 0..=n {
        let v = if k == n { hi } else { lo + step * k as f64 };
        let fv = f(v);
        if fv.is_finite() && best.is_none_or(|(_, _, fb)| fv < fb) {
            best = Some((k, v, fv));
        }
    }
    let (k, v, fv) = best?;
    let a = if k == 0 { lo } else { lo + step * (k - 1) as f64 };
    let b = if k + 1 >= n { hi } else { lo + step * (k + 1) as f64 };
    let (g, fg) = golden_section_min(&f, a, b, REFINE_TOL);
    Some(if fg < fv { (g, fg) } else { (v, fv) })
}

/// Nested line search on a window of `±WINDOW_CELLS` cells around `center`,
/// re-centered while the optimum sits on the window edge.
fn refine_window(obj: &impl Objective, center: Point, hx: f64, hy: f64) -> Option<Point> {
    let [(xlo, xhi), (ylo, yhi)] = obj.domain();
    let (wx, wy) = (WINDOW_CELLS * hx, WINDOW_CELLS * hy);
    let mut center = center;
    let mut best: Option<Point> = None;
    for _ in 0..MAX_RECENTER {
        let (x0, x1) = ((center.x - wx).max(xlo), (center.x + wx).min(xhi));
        let (y0, y1) = ((center.y - wy).max(ylo), (center.y + wy).min(yhi));
        let profile = |x: f64| inner(obj, x, y0, y1).map_or(f64::INFINITY, |p| p.rate);
        let Some((x, _)) = line_min(profile, x0, x1) else { break };
        let Some(p) = inner(obj, x, y0, y1) else { break };
        if best.is_some_and(|b| p.rate >= b.rate) {
            break;
        }
        best = Some(p);
        let near = |v: f64, lo: f64, hi: f64, dom_lo: f64, dom_hi: f64, w: f64| {
            let margin = 2.0 * w / WINDOW_SCAN as f64;
            (v - lo < margin && lo > dom_lo) || (hi - v < margin && hi < dom_hi)
        };
        if !near(p.x, x0, x1, xlo, xhi, wx) && !near(p.y, y0, y1, ylo, yhi, wy) {
            break;
        }
        center = p;
    }
    best
}

fn refine(obj: &impl Objective, loose: Point, tight: Option<Point>, hx: f64, hy: f64) -> Option<Point> {
    let mut best = tight;
    for center in std::iter::once(loose).chain(tight) {
        if let Some(p) = refine_window(obj, center, hx, hy) {
            if best.is_none_or(|b| p.rate < b.rate) {
                best = Some(p);
            }
        }
    }
    best
}
