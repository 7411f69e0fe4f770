//! Best-bound branch and bound over the integer-flagged variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use super::simplex::solve_lp_with_bounds;
use super::{Basis, LinearModel, LpOptions, LpStatus, DEFAULT_GAP, FEAS_TOL, INT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    /// Incumbent proven optimal within the gap tolerance.
    Optimal,
    /// No integer point exists (or none beats the cutoff).
    Infeasible,
    /// Stopped on a time or node limit; `incumbent` may still be present.
    Limit,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct MipOptions {
    pub time_limit: Option<Duration>,
    pub deadline: Option<Instant>,
    pub node_limit: Option<usize>,
    /// Relative gap, measured against `max(1, |incumbent|)`.
    pub rel_gap: f64,
    pub abs_gap: f64,
    /// Only solutions with objective strictly above this value are of interest.
    pub cutoff: Option<f64>,
    /// A known feasible point used as the starting incumbent.
    pub incumbent: Option<Vec<f64>>,
}

impl Default for MipOptions {
    fn default() -> Self {
        MipOptions {
            time_limit: None,
            deadline: None,
            node_limit: None,
            rel_gap: DEFAULT_GAP,
            abs_gap: 1e-9,
            cutoff: None,
            incumbent: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MipSolution {
    pub status: MipStatus,
    pub incumbent: Option<Vec<f64>>,
    pub objective: f64,
    /// Best proven upper bound on the optimum.
    pub bound: f64,
    pub gap: f64,
    pub node_count: usize,
}

struct Node {
    bound: f64,
    depth: usize,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: higher bound first, then deeper, then older
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

/// Solves `model` with integrality enforced on flagged variables.
pub fn solve_mip(model: &LinearModel, opts: &MipOptions) -> MipSolution {
    let start = Instant::now();
    let deadline = match (opts.time_limit.map(|t| start + t), opts.deadline) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let ints: Vec<usize> = (0..model.num_vars()).filter(|&j| model.vars[j].integer).collect();

    let mut incumbent: Option<Vec<f64>> = None;
    let mut inc_obj = f64::NEG_INFINITY;
    if let Some(x) = &opts.incumbent {
        if x.len() == model.num_vars() && model.max_violation(x) <= FEAS_TOL && is_integral(x, &ints) {
            inc_obj = model.objective(x);
            incumbent = Some(x.clone());
        }
    }
    let threshold = |inc: f64| -> f64 {
        let base = match opts.cutoff {
            Some(c) => inc.max(c),
            None => inc,
        };
        if base.is_finite() {
            base + opts.abs_gap.max(opts.rel_gap * base.abs().max(1.0))
        } else {
            base
        }
    };

    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    heap.push(Node {
        bound: f64::INFINITY,
        depth: 0,
        id: next_id,
        lower: model.vars.iter().map(|v| v.lower).collect(),
        upper: model.vars.iter().map(|v| v.upper).collect(),
        basis: None,
    });
    next_id += 1;
    let mut nodes = 0usize;
    let mut hit_limit = false;
    let mut numerical = false;

    while let Some(node) = heap.pop() {
        if node.bound <= threshold(inc_obj) {
            // everything left is dominated
            heap.clear();
            break;
        }
        let out_of_time = deadline.is_some_and(|d| Instant::now() >= d);
        if out_of_time || opts.node_limit.is_some_and(|l| nodes >= l) {
            heap.push(node);
            hit_limit = true;
            break;
        }
        nodes += 1;
        let lp = solve_lp_with_bounds(
            model,
            &node.lower,
            &node.upper,
            &LpOptions {
                deadline,
                warm_start: node.basis.clone(),
                ..Default::default()
            },
        );
        match lp.status {
            LpStatus::Infeasible => continue,
            LpStatus::Optimal => {}
            LpStatus::Limit => {
                heap.push(node);
                hit_limit = true;
                break;
            }
            LpStatus::Unbounded => {
                return MipSolution {
                    status: MipStatus::Unbounded,
                    incumbent: None,
                    objective: f64::INFINITY,
                    bound: f64::INFINITY,
                    gap: f64::INFINITY,
                    node_count: nodes,
                };
            }
            LpStatus::NumericalFailure => {
                numerical = true;
                continue;
            }
        }
        let bound = lp.objective.min(node.bound);
        if bound <= threshold(inc_obj) {
            continue;
        }
        // most fractional, ties to lowest index
        let mut branch: Option<(usize, f64)> = None;
        let mut best_frac = INT_TOL;
        for &j in &ints {
            let v = lp.primal[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > best_frac + 1e-12 {
                best_frac = frac;
                branch = Some((j, v));
            }
        }
        match branch {
            None => {
                let mut x = lp.primal.clone();
                for &j in &ints {
                    x[j] = x[j].round();
                }
                let obj = model.objective(&x);
                if obj > inc_obj && opts.cutoff.is_none_or(|c| obj > c) {
                    inc_obj = obj;
                    incumbent = Some(x);
                }
            }
            Some((j, v)) => {
                let mut down_upper = node.upper.clone();
                down_upper[j] = v.floor();
                let mut up_lower = node.lower.clone();
                up_lower[j] = v.ceil();
                heap.push(Node {
                    bound,
                    depth: node.depth + 1,
                    id: next_id,
                    lower: node.lower.clone(),
                    upper: down_upper,
                    basis: lp.basis.clone(),
                });
                heap.push(Node {
                    bound,
                    depth: node.depth + 1,
                    id: next_id + 1,
                    lower: up_lower,
                    upper: node.upper,
                    basis: lp.basis,
                });
                next_id += 2;
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::NEG_INFINITY, f64::max);
    let proven_bound = if hit_limit { open_bound.max(inc_obj) } else { inc_obj };
    let status = if hit_limit {
        MipStatus::Limit
    } else if numerical {
        // a subtree was dropped unsolved, so nothing is proven
        if incumbent.is_some() {
            MipStatus::Limit
        } else {
            MipStatus::NumericalFailure
        }
    } else if incumbent.is_some() {
        MipStatus::Optimal
    } else {
        MipStatus::Infeasible
    };
    let (objective, gap) = match &incumbent {
        Some(_) => {
            let gap = if proven_bound.is_finite() {
                ((proven_bound - inc_obj) / inc_obj.abs().max(1.0)).max(0.0)
            } else {
                f64::INFINITY
            };
            (inc_obj, gap)
        }
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    MipSolution {
        status,
        incumbent,
        objective,
        bound: proven_bound,
        gap,
        node_count: nodes,
    }
}

fn is_integral(x: &[f64], ints: &[usize]) -> bool {
    ints.iter().all(|&j| (x[j] - x[j].round()).abs() <= INT_TOL)
}
