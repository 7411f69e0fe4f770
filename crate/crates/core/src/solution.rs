//! The solution document shared by the column-generation driver, the
//! oracle and the evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Instance;
use crate::model::{intra_zone_demand, zone_cost, zone_diameter_sq, CellId, DemandMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// The integer selection over the final pool is proven optimal.
    Optimal,
    /// A limit stopped the integer solve; `mip_gap` bounds the loss.
    Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub cells: Vec<CellId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    pub diameter_sq: f64,
    pub cost: f64,
    /// Demand between cells of this zone, ignoring other zones.
    pub demand: f64,
}

impl ZoneReport {
    pub fn new(cells: Vec<CellId>, instance: &Instance) -> Result<Self> {
        let diameter_sq = zone_diameter_sq(&cells, &instance.distances)?;
        let tags = if cells.iter().all(|&c| instance.cells[c].tag.is_some()) {
            cells.iter().filter_map(|&c| instance.cells[c].tag.clone()).collect()
        } else {
            Vec::new()
        };
        Ok(ZoneReport {
            tags,
            diameter_sq,
            cost: zone_cost(diameter_sq, &instance.params),
            demand: intra_zone_demand(&cells, &instance.demand, instance.params.include_self_pairs),
            cells,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    Timeout,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgSummary {
    pub pricing: String,
    pub iterations: usize,
    pub pool_size: usize,
    pub termination: Termination,
    /// LP value of the (perturbed) master at the last iteration.
    pub root_lp_objective: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
    pub lp_s: f64,
    pub pricing_s: f64,
    pub mip_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub method: String,
    pub status: SolveStatus,
    pub zones: Vec<ZoneReport>,
    pub covered_demand: f64,
    pub total_demand: f64,
    pub coverage_pct: f64,
    pub budget: f64,
    pub budget_used: f64,
    pub mip_gap: f64,
    pub covered_pairs: Vec<(CellId, CellId)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg: Option<CgSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Solution {
    /// Builds the document for the given selection, recomputing every
    /// metric from the instance.
    pub fn from_selection(
        instance: &Instance,
        mut selected: Vec<Vec<CellId>>,
        method: &str,
        status: SolveStatus,
        mip_gap: f64,
    ) -> Result<Solution> {
        for z in &mut selected {
            z.sort_unstable();
            z.dedup();
        }
        selected.sort();
        let zones = selected
            .iter()
            .map(|z| ZoneReport::new(z.clone(), instance))
            .collect::<Result<Vec<_>>>()?;
        let (covered_pairs, covered_demand) = union_coverage(&selected, &instance.demand, instance.params.include_self_pairs)?;
        let total_demand = instance.demand.total(instance.params.include_self_pairs);
        Ok(Solution {
            method: method.to_string(),
            status,
            budget_used: zones.iter().map(|z| z.cost).sum(),
            zones,
            covered_demand,
            total_demand,
            coverage_pct: coverage_pct(covered_demand, total_demand),
            budget: instance.params.budget,
            mip_gap,
            covered_pairs,
            cg: None,
            timings: None,
        })
    }

    pub fn selected_cells(&self) -> Vec<Vec<CellId>> {
        self.zones.iter().map(|z| z.cells.clone()).collect()
    }
}

pub fn coverage_pct(covered: f64, total: f64) -> f64 {
    if total > 0.0 {
        100.0 * covered / total
    } else {
        0.0
    }
}

/// Demand pairs whose endpoints share at least one zone, each counted once,
/// and their total demand (summed in ascending pair order).
pub fn union_coverage(
    zones: &[Vec<CellId>],
    demand: &DemandMatrix,
    include_self_pairs: bool,
) -> Result<(Vec<(CellId, CellId)>, f64)> {
    let n = demand.dim();
    let mut member = vec![Vec::new(); n];
    for (k, z) in zones.iter().enumerate() {
        for &c in z {
            if c >= n {
                return Err(Error::Validation(format!("zone {k} references cell {c}, instance has {n}")));
            }
            member[c].push(k);
        }
    }
    let mut pairs = Vec::new();
    let mut total = 0.0;
    for ((i, j), v) in demand.counted_pairs(include_self_pairs) {
        if member[i].iter().any(|k| member[j].contains(k)) {
            pairs.push((i, j));
            total += v;
        }
    }
    Ok((pairs, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_counts_pairs_once() {
        let demand = DemandMatrix::from_triples(4, [(1, 2, 3.0), (2, 3, 4.0), (1, 3, 5.0), (2, 2, 9.0)]).unwrap();
        let zones = vec![vec![1, 2], vec![2, 3]];
        let (pairs, total) = union_coverage(&zones, &demand, false).unwrap();
        assert_eq!(pairs, vec![(1, 2), (2, 3)]);
        assert_eq!(total, 7.0);
        let (pairs, total) = union_coverage(&zones, &demand, true).unwrap();
        assert_eq!(pairs, vec![(1, 2), (2, 2), (2, 3)]);
        assert_eq!(total, 16.0);
        assert!(union_coverage(&[vec![7]], &demand, false).is_err());
    }
}
