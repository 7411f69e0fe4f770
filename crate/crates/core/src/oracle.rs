//! Brute-force references for small instances.
//!
//! Everything here enumerates subsets of cells, so hard size guards refuse
//! to start on instances that would not finish.

use crate::error::{Error, Result};
use crate::ingest::Instance;
use crate::lp::Sense;
use crate::model::{reduced_cost, CellId, Duals, Zone};
use crate::pricing::PricedZone;
use crate::rmp::{build_rmp, solve_rmp_mip, ColumnPool, ColumnSource, RmpMipOptions};
use crate::solution::Solution;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleLimits {
    pub max_cells_pricing: usize,
    pub max_cells_zoning: usize,
    pub max_zone_size: Option<usize>,
    pub max_zones_selected: Option<usize>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_cells_pricing: 15,
            max_cells_zoning: 8,
            max_zone_size: None,
            max_zones_selected: None,
        }
    }
}

fn guard(n: usize, max: usize, what: &str) -> Result<()> {
    if n > max {
        return Err(Error::SizeGuard(format!("{what} needs |V| <= {max}, instance has {n} cells")));
    }
    Ok(())
}

fn mask_cells(mask: u32, n: usize) -> Vec<CellId> {
    (0..n).filter(|&k| mask >> k & 1 == 1).collect()
}

/// Best reduced cost over every nonempty affordable subset; ties go to the
/// lexicographically smallest cell list.
pub fn oracle_pricing(duals: &Duals, instance: &Instance, limits: &OracleLimits) -> Result<Option<PricedZone>> {
    let n = instance.num_cells();
    guard(n, limits.max_cells_pricing, "pricing enumeration")?;
    let params = &instance.params;
    let mut best: Option<PricedZone> = None;
    for mask in 1u32..(1u32 << n) {
        if limits.max_zone_size.is_some_and(|m| mask.count_ones() as usize > m) {
            continue;
        }
        let zone = Zone::new(mask_cells(mask, n), &instance.distances, params)?;
        if !params.zone_affordable(zone.diameter_sq()) {
            continue;
        }
        let rc = reduced_cost(&zone, duals, params);
        let better = match &best {
            None => true,
            Some(b) => rc > b.reduced_cost || (rc == b.reduced_cost && zone.cells() < b.zone.cells()),
        };
        if better {
            best = Some(PricedZone { zone, reduced_cost: rc });
        }
    }
    Ok(best)
}

/// Every affordable subset (within the size cap), in ascending bitmask order.
pub fn enumerate_candidates(instance: &Instance, limits: &OracleLimits) -> Result<ColumnPool> {
    let n = instance.num_cells();
    guard(n, limits.max_cells_pricing, "candidate enumeration")?;
    let params = &instance.params;
    let mut pool = ColumnPool::new();
    for mask in 1u32..(1u32 << n) {
        if limits.max_zone_size.is_some_and(|m| mask.count_ones() as usize > m) {
            continue;
        }
        let zone = Zone::new(mask_cells(mask, n), &instance.distances, params)?;
        if params.zone_affordable(zone.diameter_sq()) {
            pool.insert(zone, 0, ColumnSource::Enumerated, params)?;
        }
    }
    Ok(pool)
}

/// Exact zoning optimum: the integer master over the complete candidate set.
pub fn oracle_optimum(instance: &Instance, limits: &OracleLimits) -> Result<Solution> {
    guard(instance.num_cells(), limits.max_cells_zoning, "the zoning oracle")?;
    instance.validate()?;
    let pool = enumerate_candidates(instance, limits)?;
    let mut build = build_rmp(&pool, instance, false, 0);
    if let Some(k) = limits.max_zones_selected {
        let coeffs = (0..pool.len()).map(|z| (build.zone_column(z), 1.0)).collect();
        build.model.add_row(coeffs, Sense::Le, k as f64);
    }
    let mut sol = solve_rmp_mip(&build, &pool, instance, &RmpMipOptions::default())?;
    sol.method = "oracle".into();
    Ok(sol)
}

/// Largest instance the recursive search accepts (pair sets fit in a u64).
pub const RECURSIVE_MAX_CELLS: usize = 8;

struct Search {
    cands: Vec<(u64, f64, u32)>,
    weights: Vec<f64>,
    budget: f64,
    best_value: f64,
    best_pick: Vec<usize>,
}

impl Search {
    fn value(&self, covered: u64) -> f64 {
        (0..64).filter(|b| covered >> b & 1 == 1).map(|b| self.weights[b]).sum()
    }

    fn go(&mut self, from: usize, covered: u64, spent: f64, pick: &mut Vec<usize>) {
        let v = self.value(covered);
        if v > self.best_value {
            self.best_value = v;
            self.best_pick = pick.clone();
        }
        let reachable = self.cands[from..].iter().fold(covered, |acc, c| acc | c.0);
        if self.value(reachable) <= self.best_value {
            return;
        }
        for k in from..self.cands.len() {
            let (pairs, cost, _) = self.cands[k];
            if pairs & !covered == 0 || spent + cost > self.budget + crate::model::BUDGET_TOL {
                continue;
            }
            pick.push(k);
            self.go(k + 1, covered | pairs, spent + cost, pick);
            pick.pop();
        }
    }
}

/// Exact zoning optimum by depth-first search over zone collections with
/// budget pruning. Costs, diameters and coverage are computed here from the
/// raw matrices, sharing no code with the master problem.
pub fn recursive_optimum(instance: &Instance) -> Result<(f64, Vec<Vec<CellId>>)> {
    let n = instance.num_cells();
    guard(n, RECURSIVE_MAX_CELLS, "the recursive search")?;
    let p = &instance.params;
    let mut weights = vec![0.0; 64];
    for i in 0..n {
        for j in 0..n {
            if i != j || p.include_self_pairs {
                weights[i * n + j] = instance.demand.get(i, j);
            }
        }
    }
    let mut cands = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let cells = mask_cells(mask, n);
        let mut diam = 0.0f64;
        let mut pairs = 0u64;
        for &i in &cells {
            for &j in &cells {
                let d = instance.distances.get(i, j).max(instance.distances.get(j, i));
                diam = diam.max(d * d);
                if weights[i * n + j] > 0.0 {
                    pairs |= 1 << (i * n + j);
                }
            }
        }
        let cost = p.alpha * diam + p.beta;
        let affordable = p.zone_budget.is_none_or(|b0| cost <= b0 + crate::model::BUDGET_TOL);
        if affordable && pairs != 0 {
            cands.push((pairs, cost, mask));
        }
    }
    let mut search = Search {
        cands,
        weights,
        budget: p.budget,
        best_value: 0.0,
        best_pick: Vec::new(),
    };
    search.go(0, 0, 0.0, &mut Vec::new());
    let zones = search
        .best_pick
        .iter()
        .map(|&k| mask_cells(search.cands[k].2, n))
        .collect();
    Ok((search.best_value, zones))
}
