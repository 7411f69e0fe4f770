//! The restricted master problem: choose zones from the pool under the
//! global budget so that covered demand is maximal.
//!
//! Variables are laid out as every pair variable `w_ij` first, then one
//! `x_S` per pool zone in pool order. Row 0 is the budget row and row
//! `1 + k` links the k-th instantiated pair. New zones therefore only append
//! columns, which lets the driver warm-start each LP from the previous basis.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::ingest::Instance;
use crate::lp::{
    solve_lp, solve_mip, Basis, LinearModel, LpOptions, LpSolution, LpStatus, MipOptions, MipStatus, Sense,
};
use crate::model::{CellId, CostParams, Duals, Zone, BUDGET_TOL};
use crate::solution::{union_coverage, Solution, SolveStatus};

/// Upper end of the uniform draw for each linking-row perturbation.
pub const EPSILON_MAX: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSource {
    Initial,
    Heuristic,
    Exact,
    Enumerated,
}

#[derive(Clone, Debug)]
pub struct PoolEntry {
    pub zone: Zone,
    pub round: usize,
    pub source: ColumnSource,
}

/// Candidate zones, unique by cell set.
#[derive(Clone, Debug, Default)]
pub struct ColumnPool {
    entries: Vec<PoolEntry>,
    seen: HashSet<Vec<CellId>>,
}

impl ColumnPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `zone` unless an identical cell set is already present. Zones
    /// above the single-zone budget are rejected with an error.
    pub fn insert(&mut self, zone: Zone, round: usize, source: ColumnSource, params: &CostParams) -> Result<bool> {
        if !params.zone_affordable(zone.diameter_sq()) {
            return Err(Error::Validation(format!(
                "zone {:?} costs {} which exceeds the single-zone budget",
                zone.cells(),
                zone.cost()
            )));
        }
        if zone.is_empty() || self.seen.contains(zone.cells()) {
            return Ok(false);
        }
        self.seen.insert(zone.cells().to_vec());
        self.entries.push(PoolEntry { zone, round, source });
        Ok(true)
    }

    pub fn contains(&self, cells: &[CellId]) -> bool {
        self.seen.contains(cells)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn zones(&self) -> impl Iterator<Item = &Zone> {
        self.entries.iter().map(|e| &e.zone)
    }
}

/// A master model plus the bookkeeping needed to read duals back.
#[derive(Clone, Debug)]
pub struct RmpBuild {
    pub model: LinearModel,
    /// Instantiated ordered pairs, in variable (and linking-row) order.
    pub pairs: Vec<(CellId, CellId)>,
    /// Row of each pair's linking constraint.
    pub pair_index: HashMap<(CellId, CellId), usize>,
    pub epsilons: Vec<f64>,
    pub perturbed: bool,
    /// Number of pool zones with a column in the model.
    pub num_zones: usize,
}

pub const BUDGET_ROW: usize = 0;

/// Pair-variable demand weights in pair order.
fn pair_weights(instance: &Instance) -> (Vec<(CellId, CellId)>, Vec<f64>) {
    instance
        .demand
        .counted_pairs(instance.params.include_self_pairs)
        .unzip()
}

/// One perturbation per instantiated pair, drawn in pair order from `seed`.
pub fn draw_epsilons(count: usize, perturb: bool, seed: u64) -> Vec<f64> {
    if !perturb {
        return vec![0.0; count];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random_range(0.0..=EPSILON_MAX)).collect()
}

pub fn build_rmp(pool: &ColumnPool, instance: &Instance, perturb: bool, seed: u64) -> RmpBuild {
    let (pairs, weights) = pair_weights(instance);
    let epsilons = draw_epsilons(pairs.len(), perturb, seed);
    let mut model = LinearModel::new();
    for &d in &weights {
        model.add_var(0.0, 1.0, d, true);
    }
    model.add_row(Vec::new(), Sense::Le, instance.params.budget);
    let mut pair_index = HashMap::with_capacity(pairs.len());
    for (k, (&p, &eps)) in pairs.iter().zip(&epsilons).enumerate() {
        let row = model.add_row(vec![(k, 1.0)], Sense::Le, eps);
        pair_index.insert(p, row);
    }
    let mut build = RmpBuild {
        model,
        pairs,
        pair_index,
        epsilons,
        perturbed: perturb,
        num_zones: 0,
    };
    build.append_zones(pool.zones());
    build
}

impl RmpBuild {
    /// Appends one `x_S` column per zone.
    pub fn append_zones<'a>(&mut self, zones: impl IntoIterator<Item = &'a Zone>) {
        for zone in zones {
            let col = self.model.add_var(0.0, 1.0, 0.0, true);
            self.model.rows[BUDGET_ROW].coeffs.push((col, zone.cost()));
            let cells = zone.cells();
            for &i in cells {
                for &j in cells {
                    if let Some(&row) = self.pair_index.get(&(i, j)) {
                        self.model.rows[row].coeffs.push((col, -1.0));
                    }
                }
            }
            self.num_zones += 1;
        }
    }

    pub fn zone_column(&self, k: usize) -> usize {
        self.pairs.len() + k
    }

    /// Upper bound on how much the perturbation can lift the LP objective.
    pub fn epsilon_slack_bound(&self) -> f64 {
        self.epsilons
            .iter()
            .enumerate()
            .map(|(k, e)| self.model.vars[k].obj * e)
            .sum()
    }

    /// Reads λ from the budget row and π from the linking rows, clipping
    /// tiny negative values to zero.
    pub fn extract_duals(&self, lp: &LpSolution) -> Duals {
        let clip = |v: f64| if v > 0.0 { v } else { 0.0 };
        let mut pi = BTreeMap::new();
        for (k, &p) in self.pairs.iter().enumerate() {
            pi.insert(p, clip(lp.duals[1 + k]));
        }
        Duals {
            lambda: clip(lp.duals[BUDGET_ROW]),
            pi,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RmpLp {
    pub lp: LpSolution,
    pub duals: Duals,
}

/// Solves the LP relaxation. `warm_start` may be a basis from an earlier
/// solve of the same build before columns were appended.
pub fn solve_rmp_lp(build: &RmpBuild, warm_start: Option<Basis>, deadline: Option<Instant>) -> Result<RmpLp> {
    let warm_start = warm_start.map(|b| {
        let extra = build.model.num_vars() - b.num_vars;
        if extra > 0 {
            b.extend_vars(extra)
        } else {
            b
        }
    });
    let lp = solve_lp(
        &build.model,
        &LpOptions {
            deadline,
            warm_start,
            ..Default::default()
        },
    );
    match lp.status {
        LpStatus::Optimal => {
            let duals = build.extract_duals(&lp);
            Ok(RmpLp { lp, duals })
        }
        LpStatus::Limit => Err(Error::Solver("master LP hit its time limit".into())),
        other => Err(Error::Solver(format!("master LP ended with status {other:?}"))),
    }
}

#[derive(Clone, Debug, Default)]
pub struct RmpMipOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
}

/// Greedy selection by covered demand per unit cost, used as the starting
/// incumbent of the integer solve.
fn greedy_incumbent(build: &RmpBuild, pool: &ColumnPool, budget: f64) -> Vec<f64> {
    let n_pairs = build.pairs.len();
    let mut x = vec![0.0; build.model.num_vars()];
    let mut covered = vec![false; n_pairs];
    let mut spent = 0.0;
    let zone_pairs: Vec<Vec<usize>> = pool
        .zones()
        .map(|z| {
            let mut v = Vec::new();
            for &i in z.cells() {
                for &j in z.cells() {
                    if let Some(&r) = build.pair_index.get(&(i, j)) {
                        v.push(r - 1);
                    }
                }
            }
            v
        })
        .collect();
    let mut used = vec![false; pool.len()];
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (k, z) in pool.zones().enumerate() {
            if used[k] || spent + z.cost() > budget + BUDGET_TOL {
                continue;
            }
            let gain: f64 = zone_pairs[k].iter().filter(|&&p| !covered[p]).map(|&p| build.model.vars[p].obj).sum();
            let ratio = gain / z.cost();
            if gain > 0.0 && best.is_none_or(|(_, r)| ratio > r) {
                best = Some((k, ratio));
            }
        }
        let Some((k, _)) = best else { break };
        used[k] = true;
        spent += pool.entries()[k].zone.cost();
        x[build.zone_column(k)] = 1.0;
        for &p in &zone_pairs[k] {
            covered[p] = true;
        }
    }
    for p in 0..n_pairs {
        x[p] = if covered[p] { 1.0 } else { 0.0 };
    }
    x
}

/// Integer solve over the pool. `build` must be unperturbed so the reported
/// coverage is exact; it is recomputed from the union of selected zones.
pub fn solve_rmp_mip(build: &RmpBuild, pool: &ColumnPool, instance: &Instance, opts: &RmpMipOptions) -> Result<Solution> {
    if build.perturbed {
        return Err(Error::Input("the integer master must be built without perturbation".into()));
    }
    let incumbent = greedy_incumbent(build, pool, instance.params.budget);
    // w_ij = min(1, Σ x_S) at any vertex once x is integral
    let mut model = build.model.clone();
    for v in &mut model.vars[..build.pairs.len()] {
        v.integer = false;
    }
    let mip = solve_mip(
        &model,
        &MipOptions {
            time_limit: opts.time_limit,
            node_limit: opts.node_limit,
            incumbent: Some(incumbent),
            ..Default::default()
        },
    );
    let status = match mip.status {
        MipStatus::Optimal => SolveStatus::Optimal,
        MipStatus::Limit if mip.incumbent.is_some() => SolveStatus::Limit,
        other => return Err(Error::Solver(format!("integer master ended with status {other:?}"))),
    };
    let x = mip.incumbent.expect("incumbent present");
    let selected: Vec<Vec<CellId>> = pool
        .zones()
        .enumerate()
        .filter(|(k, _)| x[build.zone_column(*k)] > 0.5)
        .map(|(_, z)| z.cells().to_vec())
        .collect();
    let mut sol = Solution::from_selection(instance, selected, "rmp", status, mip.gap)?;
    let (_, union) = union_coverage(&sol.selected_cells(), &instance.demand, instance.params.include_self_pairs)?;
    debug_assert!(union + 1e-6 * union.max(1.0) >= mip.objective);
    sol.covered_demand = union;
    Ok(sol)
}
