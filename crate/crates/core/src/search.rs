//! Deterministic branch-and-bound over `eps > 0` on a log grid.
//!
//! Scores live in log space. Each objective supplies achievable scores at evaluated
//! points and optimistic bounds on cells between points and on the two unbounded
//! end regions. The search returns `best <= sup <= bound`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub grid_points: usize,
    pub refine_tol: f64,
    pub refine_max_iter: usize,
    /// Relative accuracy of tail enclosures at each evaluated exponent.
    pub tail_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { eps_min: 1e-8, eps_max: 1e4, grid_points: 64, refine_tol: 1e-10, refine_max_iter: 200, tail_tol: 1e-7 }
    }
}

impl OptimizerConfig {
    /// Coarser grid for bulk verification runs.
    pub fn fast() -> Self {
        Self { grid_points: 32, refine_max_iter: 120, ..Self::default() }
    }

    /// Four times the grid and refinement budget, used for a second attempt.
    pub fn tightened(&self) -> Self {
        Self {
            grid_points: self.grid_points * 4,
            refine_max_iter: self.refine_max_iter * 4,
            tail_tol: self.tail_tol * 0.1,
            ..self.clone()
        }
    }

    pub(crate) fn tail_options(&self) -> crate::seqcore::TailOptions {
        crate::seqcore::TailOptions {
            rel_width: self.tail_tol,
            quad_tol: self.tail_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_min.is_finite()
            && self.eps_max.is_finite()
            && self.eps_min > 0.0
            && self.eps_min < self.eps_max
            && self.grid_points >= 3
            && self.refine_tol >= 0.0
            && self.tail_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{self:?}")))
        }
    }
}

pub(crate) trait Objective {
    type Node: Copy;

    fn eval(&mut self, eps: f64) -> Self::Node;

    /// Score certainly attained at `eps`.
    fn achieved(&self, eps: f64, node: &Self::Node) -> f64;

    /// Upper bound of the score on `[l, r]` and a suggested split point.
    fn cell_bound(&self, l: f64, nl: &Self::Node, r: f64, nr: &Self::Node) -> (f64, f64);

    /// Upper bound of the score on `(0, eps]`.
    fn below_bound(&mut self, eps: f64, node: &Self::Node) -> f64;

    /// Upper bound of the score on `[eps, cap]`, `cap` possibly infinite.
    fn above_bound(&self, eps: f64, node: &Self::Node, cap: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SearchOutcome {
    pub best: f64,
    pub best_eps: f64,
    pub bound: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
enum Piece {
    Cell(usize, usize),
    Below(usize),
    Above(usize),
}

struct Item {
    bound: f64,
    order: u64,
    piece: Piece,
    split_at: f64,
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.order.cmp(&self.order))
    }
}

const REGION_STEP: f64 = 16.0;
const EPS_FLOOR: f64 = 1e-300;
const EPS_CEIL: f64 = 1e300;

/// Maximises a score over `eps in (0, cap]`, with grid bounds `[lo, hi]`, `hi <= cap`.
pub(crate) fn maximize<O: Objective>(
    obj: &mut O,
    lo: f64,
    hi: f64,
    cap: f64,
    cfg: &OptimizerConfig,
    seed_best: Option<(f64, f64)>,
) -> SearchOutcome {
    let n = cfg.grid_points.max(3);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut pts: Vec<(f64, O::Node)> = Vec::with_capacity(n + 2 * cfg.refine_max_iter);
    let (mut best, mut best_eps) = seed_best.unwrap_or((f64::NEG_INFINITY, f64::NAN));
    let note = |eps: f64, node: &O::Node, obj: &O, best: &mut f64, best_eps: &mut f64| {
        let a = obj.achieved(eps, node);
        if a > *best {
            *best = a;
            *best_eps = eps;
        }
    };
    for i in 0..n {
        let eps = if i == n - 1 { hi } else { lo * (ratio * i as f64).exp() };
        let node = obj.eval(eps);
        note(eps, &node, obj, &mut best, &mut best_eps);
        pts.push((eps, node));
    }
    let mut order = 0u64;
    let mut heap = BinaryHeap::new();
    let mut push = |heap: &mut BinaryHeap<Item>, bound: f64, piece: Piece, split_at: f64| {
        order += 1;
        heap.push(Item { bound, order, piece, split_at });
    };
    for i in 0..n - 1 {
        let (l, nl) = pts[i];
        let (r, nr) = pts[i + 1];
        let (b, s) = obj.cell_bound(l, &nl, r, &nr);
        push(&mut heap, b, Piece::Cell(i, i + 1), s);
    }
    let below = obj.below_bound(pts[0].0, &pts[0].1);
    push(&mut heap, below, Piece::Below(0), f64::NAN);
    if cap > hi {
        let above = obj.above_bound(hi, &pts[n - 1].1, cap);
        push(&mut heap, above, Piece::Above(n - 1), f64::NAN);
    }

    let mut iter = 0;
    loop {
        let top = heap.peek().expect("search heap is never empty");
        if top.bound == f64::INFINITY || top.bound - best <= cfg.refine_tol || iter >= cfg.refine_max_iter {
            break;
        }
        let item = heap.pop().unwrap();
        match item.piece {
            Piece::Cell(il, ir) => {
                let (l, r) = (pts[il].0, pts[ir].0);
                if r / l - 1.0 < 1e-13 {
                    heap.push(item);
                    break;
                }
                let span = (r / l).ln();
                let s = item.split_at;
                let m = if s.is_finite() && (s / l).ln() > 0.05 * span && (r / s).ln() > 0.05 * span {
                    s
                } else {
                    (l * r).sqrt()
                };
                let node = obj.eval(m);
                note(m, &node, obj, &mut best, &mut best_eps);
                pts.push((m, node));
                let im = pts.len() - 1;
                let (b1, s1) = obj.cell_bound(l, &pts[il].1, m, &node);
                let (b2, s2) = obj.cell_bound(m, &node, r, &pts[ir].1);
                push(&mut heap, b1, Piece::Cell(il, im), s1);
                push(&mut heap, b2, Piece::Cell(im, ir), s2);
            }
            Piece::Below(ie) => {
                let e = pts[ie].0;
                if e <= EPS_FLOOR {
                    heap.push(item);
                    break;
                }
                let e2 = e / REGION_STEP;
                let node = obj.eval(e2);
                note(e2, &node, obj, &mut best, &mut best_eps);
                pts.push((e2, node));
                let i2 = pts.len() - 1;
                let (b, s) = obj.cell_bound(e2, &node, e, &pts[ie].1);
                push(&mut heap, b, Piece::Cell(i2, ie), s);
                let below = obj.below_bound(e2, &node);
                push(&mut heap, below, Piece::Below(i2), f64::NAN);
            }
            Piece::Above(ie) => {
                let e = pts[ie].0;
                if e >= EPS_CEIL {
                    heap.push(item);
                    break;
                }
                let e2 = (e * REGION_STEP).min(cap);
                let node = obj.eval(e2);
                note(e2, &node, obj, &mut best, &mut best_eps);
                pts.push((e2, node));
                let i2 = pts.len() - 1;
                let (b, s) = obj.cell_bound(e, &pts[ie].1, e2, &node);
                push(&mut heap, b, Piece::Cell(ie, i2), s);
                if e2 < cap {
                    let above = obj.above_bound(e2, &node, cap);
                    push(&mut heap, above, Piece::Above(i2), f64::NAN);
                }
            }
        }
        iter += 1;
    }
    let bound = heap.peek().map_or(best, |t| t.bound).max(best);
    SearchOutcome { best, best_eps, bound, evaluations: pts.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Score `-(ln eps - ln 2)^2`, with exact interval bounds.
    struct Parabola;

    impl Objective for Parabola {
        type Node = ();
        fn eval(&mut self, _eps: f64) {}
        fn achieved(&self, eps: f64, _: &()) -> f64 {
            -(eps.ln() - 2f64.ln()).powi(2)
        }
        fn cell_bound(&self, l: f64, _: &(), r: f64, _: &()) -> (f64, f64) {
            let c = 2f64.clamp(l, r);
            (self.achieved(c, &()), c)
        }
        fn below_bound(&mut self, eps: f64, _: &()) -> f64 {
            self.achieved(eps.min(2.0), &())
        }
        fn above_bound(&self, eps: f64, _: &(), cap: f64) -> f64 {
            self.achieved(2f64.clamp(eps, cap), &())
        }
    }

    #[test]
    fn finds_interior_peak() {
        let out = maximize(&mut Parabola, 1e-3, 1e3, f64::INFINITY, &OptimizerConfig::default(), None);
        assert!(out.best <= out.bound);
        assert!(out.bound - out.best <= 1e-10);
        assert!((out.best_eps - 2.0).abs() < 1e-4);
    }

    #[test]
    fn widens_past_the_grid() {
        let cfg = OptimizerConfig { eps_min: 1e-3, eps_max: 1e-1, ..OptimizerConfig::default() };
        let out = maximize(&mut Parabola, 1e-3, 1e-1, f64::INFINITY, &cfg, None);
        assert!(out.bound - out.best <= 1e-10);
        assert!((out.best_eps - 2.0).abs() < 1e-4);
    }

    #[test]
    fn respects_cap() {
        let out = maximize(&mut Parabola, 1e-3, 0.5, 1.0, &OptimizerConfig::default(), None);
        assert!(out.best_eps <= 1.0);
        assert!((out.bound - (-(2f64.ln()).powi(2))).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig { grid_points: 2, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
        let bad = OptimizerConfig { eps_min: 1.0, eps_max: 0.5, ..OptimizerConfig::default() };
        assert!(bad.validate().is_err());
    }
}
