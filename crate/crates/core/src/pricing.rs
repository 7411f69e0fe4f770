//! Column pricing: find zones whose reduced cost under the current master
//! duals is positive.
//!
//! [`heuristic_pricing`] grows zones greedily from random seed pairs.
//! [`exact_pricing`] solves a linearized binary program over cells, cell
//! pairs and the squared diameter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::ingest::Instance;
use crate::lp::{solve_mip, LinearModel, MipOptions, MipStatus, Sense};
use crate::model::{reduced_cost, CellId, CostParams, Duals, Zone, BUDGET_TOL, REDUCED_COST_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingMethod {
    Exact,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PricedZone {
    pub zone: Zone,
    pub reduced_cost: f64,
}

#[derive(Clone, Debug)]
pub struct PricingResult {
    /// Improving zones, best first.
    pub zones: Vec<PricedZone>,
    pub method: PricingMethod,
    pub elapsed: Duration,
    /// Heuristic runs performed (0 for exact pricing).
    pub runs_attempted: usize,
    /// Heuristic runs that found no affordable seed pair.
    pub runs_skipped: usize,
    /// False when a time limit stopped exact pricing before optimality.
    pub proven: bool,
}

impl PricingResult {
    pub fn best_reduced_cost(&self) -> Option<f64> {
        self.zones.first().map(|z| z.reduced_cost)
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }
}

/// Dense views of the duals and distances used by both pricing methods.
#[derive(Clone, Debug)]
pub struct PricingData {
    pub n: usize,
    pub lambda: f64,
    /// π_kj + π_jk, row-major.
    pub pair_gain: Vec<f64>,
    /// π_kk when self pairs count, else zero.
    pub self_gain: Vec<f64>,
    /// max(c(i,j), c(j,i))², row-major.
    pub diam_sq: Vec<f64>,
    pub params: CostParams,
}

impl PricingData {
    pub fn new(duals: &Duals, instance: &Instance) -> Result<Self> {
        duals.validate()?;
        let n = instance.num_cells();
        let pi = duals.dense_pi(n);
        let mut pair_gain = vec![0.0; n * n];
        let mut diam_sq = vec![0.0; n * n];
        let mut self_gain = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pair_gain[i * n + j] = pi[i * n + j] + pi[j * n + i];
                    diam_sq[i * n + j] = instance.distances.two_way_sq(i, j);
                }
            }
            if instance.params.include_self_pairs {
                self_gain[i] = pi[i * n + i];
            }
        }
        Ok(PricingData {
            n,
            lambda: duals.lambda,
            pair_gain,
            self_gain,
            diam_sq,
            params: instance.params.clone(),
        })
    }

    #[inline]
    fn affordable(&self, d2: f64) -> bool {
        self.params.zone_affordable(d2)
    }

    /// Marginal contribution of `k` to the π-sum of `cells` (k not in cells).
    fn contribution(&self, k: CellId, cells: &[CellId]) -> f64 {
        self.self_gain[k] + cells.iter().filter(|&&j| j != k).map(|&j| self.pair_gain[k * self.n + j]).sum::<f64>()
    }
}

#[derive(Clone, Debug)]
pub struct HeuristicOptions {
    pub runs: usize,
    /// Wall-clock cap per run; `None` lets every run finish.
    pub run_time_limit: Option<Duration>,
    pub seed: u64,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            runs: 10,
            run_time_limit: None,
            seed: 0,
        }
    }
}

/// Outcome of one greedy run.
#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    /// No affordable seed pair was drawn within |V|² attempts.
    Skipped,
    /// The grown cell set (sorted) and whether the run hit its time cap.
    Grown { cells: Vec<CellId>, timed_out: bool },
}

/// One greedy run seeded from `seed ^ run`.
pub fn heuristic_run(data: &PricingData, run: usize, seed: u64, run_time_limit: Option<Duration>) -> RunOutcome {
    grow(data, run, seed, run_time_limit, None)
}

/// Same as [`heuristic_run`] without a time cap, also returning each
/// accepted cell after the seed pair with the gain it was accepted at.
pub fn heuristic_run_steps(data: &PricingData, run: usize, seed: u64) -> (RunOutcome, Vec<(CellId, f64)>) {
    let mut steps = Vec::new();
    let out = grow(data, run, seed, None, Some(&mut steps));
    (out, steps)
}

fn grow(
    data: &PricingData,
    run: usize,
    seed: u64,
    run_time_limit: Option<Duration>,
    mut steps: Option<&mut Vec<(CellId, f64)>>,
) -> RunOutcome {
    let n = data.n;
    if n < 2 {
        return RunOutcome::Skipped;
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ run as u64);
    let mut seed_pair = None;
    for _ in 0..n * n {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        if data.affordable(data.diam_sq[i * n + j]) {
            seed_pair = Some((i, j));
            break;
        }
    }
    let Some((a, b)) = seed_pair else {
        return RunOutcome::Skipped;
    };

    let mut in_zone = vec![false; n];
    let mut cells = vec![a, b];
    in_zone[a] = true;
    in_zone[b] = true;
    let mut d2 = data.diam_sq[a * n + b];
    let mut gain = vec![0.0; n];
    let mut reach = vec![0.0f64; n];
    for k in 0..n {
        gain[k] = data.self_gain[k] + data.pair_gain[k * n + a] + data.pair_gain[k * n + b];
        reach[k] = data.diam_sq[k * n + a].max(data.diam_sq[k * n + b]);
    }
    let penalty = data.lambda * data.params.alpha;
    let mut timed_out = false;
    while cells.len() < n {
        if run_time_limit.is_some_and(|t| start.elapsed() >= t) {
            timed_out = true;
            break;
        }
        let mut best: Option<(CellId, f64)> = None;
        for k in 0..n {
            if in_zone[k] || !data.affordable(reach[k].max(d2)) {
                continue;
            }
            let delta = gain[k] - penalty * (reach[k].max(d2) - d2);
            if best.is_none_or(|(_, bd)| delta > bd) {
                best = Some((k, delta));
            }
        }
        let Some((k, delta)) = best else { break };
        if delta <= 0.0 {
            break;
        }
        if let Some(s) = steps.as_mut() {
            s.push((k, delta));
        }
        let new_d2 = reach[k].max(d2);
        in_zone[k] = true;
        cells.push(k);
        d2 = new_d2;
        for m in 0..n {
            gain[m] += data.pair_gain[m * n + k];
            reach[m] = reach[m].max(data.diam_sq[m * n + k]);
        }
    }
    cells.sort_unstable();
    RunOutcome::Grown { cells, timed_out }
}

fn sort_and_dedup(mut zones: Vec<PricedZone>) -> Vec<PricedZone> {
    zones.sort_by(|a, b| {
        b.reduced_cost
            .total_cmp(&a.reduced_cost)
            .then_with(|| a.zone.cells().cmp(b.zone.cells()))
    });
    zones.dedup_by(|a, b| a.zone.cells() == b.zone.cells());
    zones
}

/// Greedy pricing with random seed pairs, `opts.runs` independent runs.
pub fn heuristic_pricing(duals: &Duals, instance: &Instance, opts: &HeuristicOptions) -> Result<PricingResult> {
    if opts.runs == 0 {
        return Err(Error::Input("the heuristic needs at least one run".into()));
    }
    let start = Instant::now();
    let data = PricingData::new(duals, instance)?;
    let run = |r: usize| heuristic_run(&data, r, opts.seed, opts.run_time_limit);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<RunOutcome> = {
        use rayon::prelude::*;
        (0..opts.runs).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<RunOutcome> = (0..opts.runs).map(run).collect();

    let mut zones = Vec::new();
    let mut skipped = 0;
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            RunOutcome::Skipped => {
                log::debug!("heuristic run {r}: no affordable seed pair, skipped");
                skipped += 1;
            }
            RunOutcome::Grown { cells, .. } => {
                let zone = Zone::new(cells, &instance.distances, &instance.params)?;
                let rc = reduced_cost(&zone, duals, &instance.params);
                if rc > REDUCED_COST_TOL {
                    zones.push(PricedZone { zone, reduced_cost: rc });
                }
            }
        }
    }
    Ok(PricingResult {
        zones: sort_and_dedup(zones),
        method: PricingMethod::Heuristic,
        elapsed: start.elapsed(),
        runs_attempted: opts.runs,
        runs_skipped: skipped,
        proven: false,
    })
}

#[derive(Clone, Debug, Default)]
pub struct ExactOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Seed for the heuristic that supplies the starting incumbent.
    pub seed: u64,
}

/// Best zone found by the pricing program, improving or not.
#[derive(Clone, Debug)]
pub struct ExactBest {
    pub best: Option<PricedZone>,
    pub proven: bool,
}

/// Drops cells that add nothing to the π-sum, lowest id first.
pub fn trim_zero_contribution(data: &PricingData, cells: &mut Vec<CellId>) {
    loop {
        if cells.len() <= 1 {
            return;
        }
        let pos = cells.iter().position(|&k| data.contribution(k, cells) == 0.0);
        match pos {
            Some(p) => {
                cells.remove(p);
            }
            None => return,
        }
    }
}

struct PricingModel {
    model: LinearModel,
    cells: Vec<CellId>,
    /// (z_i, z_j, y) for each modelled pair with positive dual weight.
    pairs: Vec<(usize, usize, usize)>,
    d2_var: usize,
}

fn build_pricing_model(data: &PricingData, require_nonempty: bool) -> Option<PricingModel> {
    let n = data.n;
    let compatible = |i: usize, j: usize| data.affordable(data.diam_sq[i * n + j]);
    let cells: Vec<CellId> = (0..n)
        .filter(|&i| data.self_gain[i] > 0.0 || (0..n).any(|j| j != i && data.pair_gain[i * n + j] > 0.0 && compatible(i, j)))
        .collect();
    if cells.is_empty() {
        return None;
    }
    let mut model = LinearModel::new();
    for &c in &cells {
        model.add_var(0.0, 1.0, data.self_gain[c], true);
    }
    let mut d2_max = 0.0f64;
    for (a, &i) in cells.iter().enumerate() {
        for &j in &cells[a + 1..] {
            if compatible(i, j) {
                d2_max = d2_max.max(data.diam_sq[i * n + j]);
            }
        }
    }
    let d2_var = model.add_var(0.0, d2_max, -data.lambda * data.params.alpha, false);
    let mut pairs = Vec::new();
    for (a, &i) in cells.iter().enumerate() {
        for (b, &j) in cells.iter().enumerate().skip(a + 1) {
            let c2 = data.diam_sq[i * n + j];
            if !compatible(i, j) {
                model.add_row(vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.0);
                continue;
            }
            let w = data.pair_gain[i * n + j];
            if w > 0.0 {
                let y = model.add_var(0.0, 1.0, w, true);
                model.add_row(vec![(y, 1.0), (a, -1.0)], Sense::Le, 0.0);
                model.add_row(vec![(y, 1.0), (b, -1.0)], Sense::Le, 0.0);
                model.add_row(vec![(y, 1.0), (a, -1.0), (b, -1.0)], Sense::Ge, -1.0);
                if c2 > 0.0 {
                    model.add_row(vec![(d2_var, 1.0), (y, -c2)], Sense::Ge, 0.0);
                }
                pairs.push((a, b, y));
            } else if c2 > 0.0 {
                // D² >= c²·(z_i + z_j - 1)
                model.add_row(vec![(d2_var, 1.0), (a, -c2), (b, -c2)], Sense::Ge, -c2);
            }
        }
    }
    if require_nonempty {
        model.add_row((0..cells.len()).map(|a| (a, 1.0)).collect(), Sense::Ge, 1.0);
    }
    Some(PricingModel {
        model,
        cells,
        pairs,
        d2_var,
    })
}

/// Encodes `zone_cells` as a feasible point of the pricing model if every
/// cell is modelled.
fn encode_start(pm: &PricingModel, data: &PricingData, zone_cells: &[CellId]) -> Option<Vec<f64>> {
    let mut x = vec![0.0; pm.model.num_vars()];
    for &c in zone_cells {
        let a = pm.cells.binary_search(&c).ok()?;
        x[a] = 1.0;
    }
    let mut d2 = 0.0f64;
    for (p, &i) in zone_cells.iter().enumerate() {
        for &j in &zone_cells[p + 1..] {
            d2 = d2.max(data.diam_sq[i * data.n + j]);
        }
    }
    x[pm.d2_var] = d2;
    for &(a, b, y) in &pm.pairs {
        x[y] = x[a] * x[b];
    }
    Some(x)
}

/// Solves the pricing program. With `min_value = Some(v)` only zones whose
/// reduced cost exceeds `v` are searched for; with `None` the best nonempty
/// affordable zone is returned whatever its sign.
pub fn exact_pricing_best(
    duals: &Duals,
    instance: &Instance,
    opts: &ExactOptions,
    min_value: Option<f64>,
) -> Result<ExactBest> {
    let data = PricingData::new(duals, instance)?;
    let params = &instance.params;
    if !params.zone_affordable(0.0) || data.n == 0 {
        return Ok(ExactBest { best: None, proven: true });
    }
    let constant = data.lambda * params.beta;
    let price = |cells: Vec<CellId>| -> Result<PricedZone> {
        let zone = Zone::new(cells, &instance.distances, params)?;
        let rc = reduced_cost(&zone, duals, params);
        Ok(PricedZone { zone, reduced_cost: rc })
    };
    let Some(pm) = build_pricing_model(&data, min_value.is_none()) else {
        // no positive dual weight anywhere: every zone is worth -λβ
        let best = match min_value {
            Some(v) if -constant <= v => None,
            _ => Some(price(vec![0])?),
        };
        return Ok(ExactBest { best, proven: true });
    };

    let mut start_point = None;
    let warm = heuristic_pricing(
        duals,
        instance,
        &HeuristicOptions {
            runs: 10,
            run_time_limit: None,
            seed: opts.seed,
        },
    )?;
    if let Some(z) = warm.zones.first() {
        let mut cells = z.zone.cells().to_vec();
        trim_zero_contribution(&data, &mut cells);
        start_point = encode_start(&pm, &data, &cells);
    }
    let mip = solve_mip(
        &pm.model,
        &MipOptions {
            time_limit: opts.time_limit,
            node_limit: opts.node_limit,
            cutoff: min_value.map(|v| v + constant),
            incumbent: start_point,
            ..Default::default()
        },
    );
    let proven = match mip.status {
        MipStatus::Optimal | MipStatus::Infeasible => true,
        MipStatus::Limit => false,
        other => return Err(Error::Solver(format!("pricing program ended with status {other:?}"))),
    };
    let Some(x) = mip.incumbent else {
        return Ok(ExactBest { best: None, proven });
    };
    let mut cells: Vec<CellId> = (0..pm.cells.len()).filter(|&a| x[a] > 0.5).map(|a| pm.cells[a]).collect();
    if cells.is_empty() {
        return Ok(ExactBest { best: None, proven });
    }
    trim_zero_contribution(&data, &mut cells);
    let best = price(cells)?;
    let keep = min_value.is_none_or(|v| best.reduced_cost > v);
    Ok(ExactBest {
        best: keep.then_some(best),
        proven,
    })
}

/// Exact pricing: returns the optimal zone when its reduced cost exceeds
/// the tolerance, otherwise nothing.
pub fn exact_pricing(duals: &Duals, instance: &Instance, opts: &ExactOptions) -> Result<PricingResult> {
    let start = Instant::now();
    let res = exact_pricing_best(duals, instance, opts, Some(REDUCED_COST_TOL))?;
    if !res.proven {
        log::info!("exact pricing stopped on its limit; returning the incumbent");
    }
    Ok(PricingResult {
        zones: res.best.into_iter().collect(),
        method: PricingMethod::Exact,
        elapsed: start.elapsed(),
        runs_attempted: 0,
        runs_skipped: 0,
        proven: res.proven,
    })
}

/// Check used by tests and the driver: cost within B0 (when enforced).
pub fn within_zone_budget(zone: &Zone, params: &CostParams) -> bool {
    params.zone_budget.is_none_or(|b0| zone.cost() <= b0 + BUDGET_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Provenance;
    use crate::model::{Cell, DemandMatrix, DistanceMatrix};
    use std::collections::BTreeMap;

    fn instance(dist: Vec<Vec<f64>>, params: CostParams) -> Instance {
        let n = dist.len();
        Instance {
            cells: (0..n).map(|k| Cell::new(k, 35.0, -85.0 + 0.01 * k as f64)).collect(),
            demand: DemandMatrix::new(n),
            distances: DistanceMatrix::from_rows(dist, 1.0).unwrap(),
            params,
            boundary: None,
            provenance: Provenance::default(),
        }
    }

    fn random_instance(n: usize, seed: u64, params: CostParams) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                    dist[i][j] = d * rng.random_range(0.9..1.1) / 1.6;
                }
            }
        }
        instance(dist, params)
    }

    fn random_duals(n: usize, seed: u64, density: f64) -> Duals {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pi = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(density) {
                    pi.insert((i, j), rng.random_range(0.0..3.0));
                }
            }
        }
        Duals {
            lambda: rng.random_range(0.0..2.0),
            pi,
        }
    }

    fn brute_force(duals: &Duals, inst: &Instance) -> f64 {
        let n = inst.num_cells();
        let mut best = f64::NEG_INFINITY;
        for mask in 1u32..(1 << n) {
            let cells: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
            let z = Zone::new(cells, &inst.distances, &inst.params).unwrap();
            if within_zone_budget(&z, &inst.params) {
                best = best.max(reduced_cost(&z, duals, &inst.params));
            }
        }
        best
    }

    #[test]
    fn no_dual_incentive_gives_nothing() {
        let inst = random_instance(6, 1, CostParams::default());
        let duals = Duals {
            lambda: 0.7,
            pi: BTreeMap::new(),
        };
        assert!(exact_pricing(&duals, &inst, &ExactOptions::default()).unwrap().is_empty());
        let h = heuristic_pricing(&duals, &inst, &HeuristicOptions::default()).unwrap();
        assert!(h.is_empty());
        let zero = Duals::default();
        assert!(heuristic_pricing(&zero, &inst, &HeuristicOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn free_diameter_takes_the_whole_support() {
        let params = CostParams {
            zone_budget: None,
            ..CostParams::default()
        };
        let inst = random_instance(7, 2, params);
        let mut pi = BTreeMap::new();
        pi.insert((0, 3), 1.0);
        pi.insert((3, 5), 2.0);
        pi.insert((6, 0), 0.5);
        let duals = Duals { lambda: 0.0, pi };
        let r = exact_pricing(&duals, &inst, &ExactOptions::default()).unwrap();
        assert_eq!(r.zones[0].zone.cells(), &[0, 3, 5, 6]);
        assert!((r.zones[0].reduced_cost - 3.5).abs() < 1e-12);
        assert!(r.proven);
    }

    #[test]
    fn single_pair_heuristic_arithmetic() {
        let inst = instance(
            vec![vec![0.0, 0.2, 0.9], vec![0.1, 0.0, 0.9], vec![0.9, 0.9, 0.0]],
            CostParams::default(),
        );
        let mut pi = BTreeMap::new();
        pi.insert((0, 1), 5.0);
        pi.insert((1, 0), 5.0);
        let duals = Duals { lambda: 0.1, pi };
        let r = heuristic_pricing(&duals, &inst, &HeuristicOptions { runs: 20, ..Default::default() }).unwrap();
        assert_eq!(r.zones.len(), 1);
        assert_eq!(r.zones[0].zone.cells(), &[0, 1]);
        let expected = 10.0 - 0.1 * (5.0 * 0.04 + 1.0);
        assert!((r.zones[0].reduced_cost - expected).abs() < 1e-12);
    }

    #[test]
    fn exact_matches_enumeration() {
        for seed in 0..12 {
            let mut params = CostParams::default();
            if seed % 3 == 0 {
                params.zone_budget = None;
            }
            if seed % 4 == 1 {
                params.include_self_pairs = true;
            }
            let inst = random_instance(8, seed, params);
            let mut duals = random_duals(8, seed + 100, 0.4);
            if inst.params.include_self_pairs {
                duals.pi.insert((2, 2), 0.8);
            }
            let oracle = brute_force(&duals, &inst);
            let got = exact_pricing_best(&duals, &inst, &ExactOptions::default(), None).unwrap();
            let best = got.best.unwrap();
            assert!((best.reduced_cost - oracle).abs() <= 1e-6, "seed {seed}: {} vs {oracle}", best.reduced_cost);
            assert!(within_zone_budget(&best.zone, &inst.params));
            let heur = heuristic_pricing(&duals, &inst, &HeuristicOptions { runs: 10, seed, ..Default::default() }).unwrap();
            if let Some(h) = heur.best_reduced_cost() {
                assert!(h <= oracle + 1e-9);
            }
        }
    }

    #[test]
    fn heuristic_zones_are_improving_and_affordable() {
        let inst = random_instance(12, 5, CostParams::default());
        for s in 0..10 {
            let duals = random_duals(12, s, 0.3);
            let r = heuristic_pricing(&duals, &inst, &HeuristicOptions { runs: 10, seed: s, ..Default::default() }).unwrap();
            let exact = exact_pricing(&duals, &inst, &ExactOptions::default()).unwrap();
            for z in &r.zones {
                let fresh = Zone::new(z.zone.cells().iter().copied(), &inst.distances, &inst.params).unwrap();
                assert!(reduced_cost(&fresh, &duals, &inst.params) > REDUCED_COST_TOL);
                assert!(within_zone_budget(&fresh, &inst.params));
            }
            if let Some(h) = r.best_reduced_cost() {
                assert!(exact.best_reduced_cost().unwrap() >= h - 1e-9);
            }
        }
    }

    #[test]
    fn heuristic_is_reproducible() {
        let inst = random_instance(10, 9, CostParams::default());
        let duals = random_duals(10, 4, 0.5);
        let opts = HeuristicOptions { runs: 16, seed: 77, ..Default::default() };
        let a = heuristic_pricing(&duals, &inst, &opts).unwrap();
        let b = heuristic_pricing(&duals, &inst, &opts).unwrap();
        assert_eq!(a.zones, b.zones);
    }

    #[test]
    fn no_affordable_seed_pair_skips_runs() {
        let mut params = CostParams::default();
        params.zone_budget = Some(1.0);
        let inst = random_instance(5, 3, params);
        let duals = random_duals(5, 1, 0.9);
        let r = heuristic_pricing(&duals, &inst, &HeuristicOptions::default()).unwrap();
        assert_eq!(r.runs_skipped, 10);
        assert!(r.is_empty());
    }

    #[test]
    fn trimming_removes_idle_cells() {
        let inst = random_instance(5, 8, CostParams::default());
        let mut pi = BTreeMap::new();
        pi.insert((1, 2), 1.0);
        let data = PricingData::new(&Duals { lambda: 0.0, pi }, &inst).unwrap();
        let mut cells = vec![0, 1, 2, 4];
        trim_zero_contribution(&data, &mut cells);
        assert_eq!(cells, vec![1, 2]);
    }
}
