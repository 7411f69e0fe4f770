//! Independent scoring of a zone selection: coverage, cost, budget checks,
//! per-zone connectivity and overlap statistics.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Instance;
use crate::model::{CellId, BUDGET_TOL};
use crate::solution::Solution;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvaluateOptions {
    /// Two cells are adjacent when their two-way normalized distance is at
    /// most this. `None` picks 1.5 times the largest nearest-neighbour
    /// distance in the instance.
    pub adjacency_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneEvaluation {
    pub index: usize,
    pub cells: Vec<CellId>,
    pub diameter_sq: f64,
    pub cost: f64,
    pub demand: f64,
    pub within_zone_budget: bool,
    /// Connected components under the adjacency radius.
    pub components: usize,
    pub connected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapStats {
    pub overlapping_zone_pairs: usize,
    pub cells_in_several_zones: usize,
    pub max_zones_per_cell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub num_zones: usize,
    pub covered_demand: f64,
    pub total_demand: f64,
    pub coverage_pct: f64,
    pub total_cost: f64,
    pub budget: f64,
    pub within_budget: bool,
    pub adjacency_radius: f64,
    pub zones: Vec<ZoneEvaluation>,
    pub overlap: OverlapStats,
    /// Whether the solution's own coverage figure equals the recomputed one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches_reported: Option<bool>,
}

/// Largest distance from any cell to its nearest other cell, times 1.5.
pub fn default_adjacency_radius(instance: &Instance) -> f64 {
    let n = instance.num_cells();
    let d = &instance.distances;
    let mut worst = 0.0f64;
    for i in 0..n {
        let nearest = (0..n)
            .filter(|&j| j != i)
            .map(|j| d.get(i, j).max(d.get(j, i)))
            .fold(f64::INFINITY, f64::min);
        if nearest.is_finite() {
            worst = worst.max(nearest);
        }
    }
    1.5 * worst
}

fn components(cells: &[CellId], instance: &Instance, radius: f64) -> usize {
    let d = &instance.distances;
    let mut seen = vec![false; cells.len()];
    let mut count = 0;
    for s in 0..cells.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(a) = stack.pop() {
            for b in 0..cells.len() {
                let (i, j) = (cells[a], cells[b]);
                if !seen[b] && d.get(i, j).max(d.get(j, i)) <= radius {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
    }
    count
}

pub fn evaluate(instance: &Instance, zones: &[Vec<CellId>], opts: &EvaluateOptions) -> Result<Evaluation> {
    let n = instance.num_cells();
    let p = &instance.params;
    let d = &instance.distances;
    let radius = opts.adjacency_radius.unwrap_or_else(|| default_adjacency_radius(instance));
    let mut sets: Vec<HashSet<CellId>> = Vec::with_capacity(zones.len());
    let mut evals = Vec::with_capacity(zones.len());
    for (k, z) in zones.iter().enumerate() {
        if z.is_empty() {
            return Err(Error::Validation(format!("zone {k} is empty")));
        }
        if let Some(&bad) = z.iter().find(|&&c| c >= n) {
            return Err(Error::Validation(format!("zone {k} references cell {bad}, instance has {n} cells")));
        }
        let cells: Vec<CellId> = z.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let mut diameter_sq = 0.0f64;
        let mut demand = 0.0;
        for &i in &cells {
            for &j in &cells {
                let t = d.get(i, j).max(d.get(j, i));
                diameter_sq = diameter_sq.max(t * t);
                if i != j || p.include_self_pairs {
                    demand += instance.demand.get(i, j);
                }
            }
        }
        let cost = p.alpha * diameter_sq + p.beta;
        let comps = components(&cells, instance, radius);
        evals.push(ZoneEvaluation {
            index: k,
            within_zone_budget: p.zone_budget.is_none_or(|b0| cost <= b0 + BUDGET_TOL),
            components: comps,
            connected: comps == 1,
            cells: cells.clone(),
            diameter_sq,
            cost,
            demand,
        });
        sets.push(cells.into_iter().collect());
    }

    let mut covered = 0.0;
    let mut total = 0.0;
    for ((i, j), v) in instance.demand.iter() {
        if i == j && !p.include_self_pairs {
            continue;
        }
        total += v;
        if sets.iter().any(|s| s.contains(&i) && s.contains(&j)) {
            covered += v;
        }
    }

    let mut per_cell = vec![0usize; n];
    for s in &sets {
        for &c in s {
            per_cell[c] += 1;
        }
    }
    let mut overlapping = 0;
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            if !sets[a].is_disjoint(&sets[b]) {
                overlapping += 1;
            }
        }
    }
    let total_cost: f64 = evals.iter().map(|e| e.cost).sum();
    Ok(Evaluation {
        num_zones: zones.len(),
        covered_demand: covered,
        total_demand: total,
        coverage_pct: if total > 0.0 { 100.0 * covered / total } else { 0.0 },
        total_cost,
        budget: p.budget,
        within_budget: total_cost <= p.budget + BUDGET_TOL,
        adjacency_radius: radius,
        zones: evals,
        overlap: OverlapStats {
            overlapping_zone_pairs: overlapping,
            cells_in_several_zones: per_cell.iter().filter(|&&c| c > 1).count(),
            max_zones_per_cell: per_cell.iter().copied().max().unwrap_or(0),
        },
        matches_reported: None,
    })
}

/// Evaluates a solution document and records whether its reported coverage
/// agrees exactly with the recomputation.
pub fn evaluate_solution(instance: &Instance, solution: &Solution, opts: &EvaluateOptions) -> Result<Evaluation> {
    let mut e = evaluate(instance, &solution.selected_cells(), opts)?;
    e.matches_reported = Some(e.covered_demand == solution.covered_demand);
    Ok(e)
}
