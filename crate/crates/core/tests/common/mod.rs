#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use zonecg_core::cg::{run_cg, CgConfig, PricingMode};
use zonecg_core::evaluate::{evaluate, EvaluateOptions};
use zonecg_core::ingest::{Instance, Provenance};
use zonecg_core::lp::Sense;
use zonecg_core::model::{reduced_cost, Cell, CostParams, DemandMatrix, DistanceMatrix, Duals, Zone};
use zonecg_core::oracle::{enumerate_candidates, OracleLimits};
use zonecg_core::pricing::{heuristic_pricing, heuristic_run_steps, HeuristicOptions, PricingData, RunOutcome};
use zonecg_core::rmp::{build_rmp, solve_rmp_lp, ColumnPool, ColumnSource};
use zonecg_core::synthetic::{generate_instance, SyntheticSpec};

/// Raw material for a random instance: `n` points in the unit square, a
/// stretch factor per ordered pair, demand triples, B0, B and the self-pair
/// switch.
#[derive(Clone, Debug)]
pub struct RawInstance {
    pub n: usize,
    pub points: Vec<(f64, f64)>,
    pub stretch: Vec<f64>,
    pub demand: Vec<(usize, usize, u32)>,
    pub zone_budget: Option<f64>,
    pub budget: f64,
    pub include_self_pairs: bool,
}

impl RawInstance {
    pub fn build(&self) -> Instance {
        let n = self.n;
        let raw: Vec<f64> = (0..n * n)
            .map(|k| {
                let (a, b) = (self.points[k / n], self.points[k % n]);
                (0.02 + ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()) * self.stretch[k]
            })
            .collect();
        let max = raw.iter().copied().fold(0.0, f64::max);
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { raw[i * n + j] / max }).collect())
            .collect();
        Instance {
            cells: (0..n).map(|k| Cell::new(k, 35.0 + 0.003 * (k / 3) as f64, -85.0 + 0.004 * (k % 3) as f64)).collect(),
            demand: DemandMatrix::from_triples(n, self.demand.iter().map(|&(i, j, c)| (i, j, c as f64))).unwrap(),
            distances: DistanceMatrix::from_rows(rows, 1000.0).unwrap(),
            params: CostParams {
                zone_budget: self.zone_budget,
                budget: self.budget,
                include_self_pairs: self.include_self_pairs,
                ..CostParams::default()
            },
            boundary: None,
            provenance: Provenance::default(),
        }
    }
}

pub fn arb_raw(min_n: usize, max_n: usize) -> impl Strategy<Value = RawInstance> {
    (min_n..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), n),
            prop::collection::vec(1.0f64..1.3, n * n),
            prop::collection::vec((0..n, 0..n, 1u32..6), 1..(2 * n * n)),
            prop_oneof![Just(None), Just(Some(2.0)), Just(Some(3.0))],
            1.0f64..8.0,
            any::<bool>(),
        )
            .prop_map(move |(points, stretch, demand, zone_budget, budget, include_self_pairs)| RawInstance {
                n,
                points,
                stretch,
                demand,
                zone_budget,
                budget,
                include_self_pairs,
            })
    })
}

pub fn arb_instance(min_n: usize, max_n: usize) -> impl Strategy<Value = Instance> {
    arb_raw(min_n, max_n).prop_map(|r| r.build())
}

/// Instance plus duals: λ and a random price on every counted pair.
pub fn arb_priced(min_n: usize, max_n: usize) -> impl Strategy<Value = (Instance, Duals)> {
    arb_instance(min_n, max_n).prop_flat_map(|inst| {
        let pairs: Vec<_> = inst.demand.counted_pairs(inst.params.include_self_pairs).map(|(p, _)| p).collect();
        let len = pairs.len();
        (0.0f64..1.5, prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..3.0], len)).prop_map(move |(lambda, pi)| {
            let duals = Duals {
                lambda,
                pi: pairs.iter().copied().zip(pi).collect(),
            };
            (inst.clone(), duals)
        })
    })
}

pub fn small_city(rows: usize, cols: usize, hotspots: usize, trips: usize, seed: u64) -> Instance {
    generate_instance(&SyntheticSpec {
        rows,
        cols,
        hotspots,
        trips,
        seed,
        ..SyntheticSpec::default()
    })
    .unwrap()
}

pub fn deterministic(pricing: PricingMode, seed: u64) -> CgConfig {
    CgConfig {
        pricing,
        seed,
        deterministic: true,
        time_limit: None,
        ..CgConfig::default()
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Diameter and cost of an arbitrary zone equal a brute-force recomputation.
pub fn check_diameter_cost(inst: &Instance, mask: u32) -> Result<(), TestCaseError> {
    let n = inst.num_cells();
    let cells: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
    prop_assume!(!cells.is_empty());
    let zone = Zone::new(cells.clone(), &inst.distances, &inst.params).unwrap();
    let mut d = 0.0f64;
    for &i in &cells {
        for &j in &cells {
            d = d.max(inst.distances.get(i, j)).max(inst.distances.get(j, i));
        }
    }
    prop_assert_eq!(zone.diameter_sq(), d * d);
    prop_assert!(close(zone.cost(), inst.params.alpha * d * d + inst.params.beta, 1e-12));
    prop_assert!(zone.is_consistent(&inst.distances, &inst.params));
    Ok(())
}

/// Each greedy acceptance gain equals the difference of from-scratch
/// reduced costs, and every grown zone stays within B0.
pub fn check_incremental_gain(inst: &Instance, duals: &Duals, seed: u64) -> Result<(), TestCaseError> {
    let data = PricingData::new(duals, inst).unwrap();
    for run in 0..3 {
        let (out, steps) = heuristic_run_steps(&data, run, seed);
        let RunOutcome::Grown { cells, .. } = out else { continue };
        let added: Vec<usize> = steps.iter().map(|s| s.0).collect();
        let mut current: Vec<usize> = cells.iter().copied().filter(|c| !added.contains(c)).collect();
        prop_assert_eq!(current.len(), 2);
        for &(k, delta) in &steps {
            let before = reduced_cost(&Zone::new(current.clone(), &inst.distances, &inst.params).unwrap(), duals, &inst.params);
            current.push(k);
            let zone = Zone::new(current.clone(), &inst.distances, &inst.params).unwrap();
            prop_assert!(inst.params.zone_affordable(zone.diameter_sq()));
            let after = reduced_cost(&zone, duals, &inst.params);
            prop_assert!(delta > 0.0);
            prop_assert!(close(after - before, delta, 1e-9), "gain {} vs recomputed {}", delta, after - before);
        }
    }
    Ok(())
}

fn pool_from_masks(inst: &Instance, picks: &[usize]) -> ColumnPool {
    let all = enumerate_candidates(inst, &OracleLimits::default()).unwrap();
    let mut pool = ColumnPool::new();
    if all.is_empty() {
        return pool;
    }
    for &p in picks {
        let z = all.entries()[p % all.len()].zone.clone();
        pool.insert(z, 0, ColumnSource::Initial, &inst.params).unwrap();
    }
    pool
}

/// The master LP solution is primal feasible, its duals are sign-correct,
/// reduced costs agree with variable positions and the duality gap closes.
pub fn check_complementary_slackness(inst: &Instance, picks: &[usize], perturb: bool, seed: u64) -> Result<(), TestCaseError> {
    let pool = pool_from_masks(inst, picks);
    let build = build_rmp(&pool, inst, perturb, seed);
    let rmp = solve_rmp_lp(&build, None, None).unwrap();
    let m = &build.model;
    let x = &rmp.lp.primal;
    let y = &rmp.lp.duals;
    let tol = 1e-7;
    prop_assert!(m.max_violation(x) <= tol);
    let mut col_price = vec![0.0; m.num_vars()];
    for (r, row) in m.rows.iter().enumerate() {
        prop_assert_eq!(row.sense, Sense::Le);
        prop_assert!(y[r] >= -tol, "row {} dual {}", r, y[r]);
        let slack = row.rhs - m.row_activity(r, x);
        prop_assert!(y[r] * slack <= 1e-6 * (1.0 + y[r]), "row {} dual {} slack {}", r, y[r], slack);
        for &(j, a) in &row.coeffs {
            col_price[j] += a * y[r];
        }
    }
    let mut dual_obj: f64 = m.rows.iter().zip(y).map(|(row, yr)| row.rhs * yr).sum();
    for (j, v) in m.vars.iter().enumerate() {
        let rc = v.obj - col_price[j];
        if x[j] < v.upper - tol {
            prop_assert!(rc <= 1e-6, "var {} below upper with reduced cost {}", j, rc);
        }
        if x[j] > v.lower + tol {
            prop_assert!(rc >= -1e-6, "var {} above lower with reduced cost {}", j, rc);
        }
        dual_obj += rc.max(0.0) * v.upper;
    }
    prop_assert!(close(dual_obj, rmp.lp.objective, 1e-7), "dual {} primal {}", dual_obj, rmp.lp.objective);
    let duals = build.extract_duals(&rmp.lp);
    for (k, z) in pool.zones().enumerate() {
        let col = build.zone_column(k);
        if x[col] > tol {
            prop_assert!(reduced_cost(z, &duals, &inst.params) >= -1e-6);
        }
    }
    Ok(())
}

/// Adding columns never lowers the master LP objective for fixed ε.
pub fn check_monotone_lp(inst: &Instance, first: &[usize], extra: &[usize], seed: u64) -> Result<(), TestCaseError> {
    let small = pool_from_masks(inst, first);
    let mut both: Vec<usize> = first.to_vec();
    both.extend_from_slice(extra);
    let large = pool_from_masks(inst, &both);
    let a = solve_rmp_lp(&build_rmp(&small, inst, true, seed), None, None).unwrap();
    let cold = solve_rmp_lp(&build_rmp(&large, inst, true, seed), None, None).unwrap();
    prop_assert!(cold.lp.objective >= a.lp.objective - 1e-9);
    let mut grown = build_rmp(&small, inst, true, seed);
    let added: Vec<&Zone> = large.zones().skip(small.len()).collect();
    grown.append_zones(added);
    let warm = solve_rmp_lp(&grown, a.lp.basis.clone(), None).unwrap();
    prop_assert!(close(warm.lp.objective, cold.lp.objective, 1e-9));
    Ok(())
}

/// A full deterministic solve respects both budgets, its coverage matches
/// the evaluator bit for bit, and a second solve replays it exactly.
pub fn check_solve(inst: &Instance, mode: PricingMode, seed: u64) -> Result<(), TestCaseError> {
    let cfg = deterministic(mode, seed);
    let out = match run_cg(inst, &cfg) {
        Ok(o) => o,
        Err(f) => {
            prop_assert!(matches!(f.error, zonecg_core::Error::Infeasible(_)), "{}", f);
            return Ok(());
        }
    };
    let sol = &out.solution;
    let p = &inst.params;
    prop_assert!(sol.budget_used <= p.budget + 1e-9);
    for z in &sol.zones {
        prop_assert!(p.zone_affordable(z.diameter_sq));
    }
    let ev = evaluate(inst, &sol.selected_cells(), &EvaluateOptions::default()).unwrap();
    prop_assert_eq!(ev.covered_demand, sol.covered_demand);
    prop_assert_eq!(ev.total_cost, sol.budget_used);
    prop_assert!(ev.within_budget);
    let again = run_cg(inst, &cfg).unwrap();
    prop_assert_eq!(serde_json::to_string(sol).unwrap(), serde_json::to_string(&again.solution).unwrap());
    prop_assert_eq!(out.trace.to_jsonl().unwrap(), again.trace.to_jsonl().unwrap());
    Ok(())
}

/// Heuristic pricing is a pure function of (duals, instance, seed).
pub fn check_heuristic_replay(inst: &Instance, duals: &Duals, seed: u64) -> Result<(), TestCaseError> {
    let opts = HeuristicOptions {
        runs: 5,
        run_time_limit: None,
        seed,
    };
    let a = heuristic_pricing(duals, inst, &opts).unwrap();
    let b = heuristic_pricing(duals, inst, &opts).unwrap();
    let cells = |r: &zonecg_core::pricing::PricingResult| -> Vec<Vec<usize>> { r.zones.iter().map(|z| z.zone.cells().to_vec()).collect() };
    prop_assert_eq!(cells(&a), cells(&b));
    Ok(())
}
