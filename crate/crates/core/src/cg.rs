//! Root-node column generation: alternate master LP solves and pricing
//! until no improving zone is found or a limit is reached, then solve the
//! integer master over every zone generated.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::ingest::Instance;
use crate::lp::Basis;
use crate::model::{CellId, Duals, Zone};
use crate::pricing::{
    exact_pricing, heuristic_pricing, ExactOptions, HeuristicOptions, PricingMethod, PricingResult,
};
use crate::rmp::{build_rmp, solve_rmp_lp, solve_rmp_mip, ColumnPool, ColumnSource, RmpMipOptions};
use crate::solution::{CgSummary, Solution, Termination, Timings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricingMode {
    Exact,
    Heuristic,
    /// Heuristic first, exact only when the heuristic finds nothing new.
    Hybrid,
}

impl PricingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PricingMode::Exact => "exact",
            PricingMode::Heuristic => "heuristic",
            PricingMode::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for PricingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PricingMode::Exact),
            "heuristic" => Ok(PricingMode::Heuristic),
            "hybrid" => Ok(PricingMode::Hybrid),
            other => Err(Error::Input(format!("unknown pricing mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgConfig {
    pub pricing: PricingMode,
    /// Budget for the whole column generation loop; `None` for no limit.
    pub time_limit: Option<Duration>,
    /// Cap per pricing call: the exact program's limit, or each heuristic
    /// run's limit.
    pub pricing_time_limit: Option<Duration>,
    /// Heuristic runs R per pricing round.
    pub runs: usize,
    pub seed: u64,
    pub perturb: bool,
    pub max_iterations: usize,
    /// Check clocks only between iterations and leave timings out of the
    /// outputs, so equal inputs give byte-identical results.
    pub deterministic: bool,
    pub mip_time_limit: Option<Duration>,
    pub mip_node_limit: Option<usize>,
    /// Node cap for exact pricing, used in deterministic mode in place of
    /// its time limit.
    pub pricing_node_limit: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            pricing: PricingMode::Heuristic,
            time_limit: Some(Duration::from_secs(600)),
            pricing_time_limit: Some(Duration::from_secs(60)),
            runs: 10,
            seed: 0,
            perturb: true,
            max_iterations: 10_000,
            deterministic: false,
            mip_time_limit: Some(Duration::from_secs(120)),
            mip_node_limit: Some(200_000),
            pricing_node_limit: Some(50_000),
        }
    }
}

impl CgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Input("runs must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Input("max iterations must be at least 1".into()));
        }
        if self.pricing_time_limit.is_some_and(|t| t.is_zero()) {
            return Err(Error::Input("pricing time limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pool_size: usize,
    pub lp_objective: f64,
    pub lambda: f64,
    pub max_pi: f64,
    pub columns_added: usize,
    pub best_reduced_cost: Option<f64>,
    pub pricing: PricingMethod,
    /// False when exact pricing stopped on a limit.
    pub proven: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_s: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CgTrace {
    pub records: Vec<IterationRecord>,
    pub termination: Option<Termination>,
}

impl CgTrace {
    /// One JSON object per line, one line per iteration.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Solution,
    pub trace: CgTrace,
    pub pool: ColumnPool,
    /// Duals of the last master LP, if one was solved.
    pub final_duals: Option<Duals>,
    pub final_lp_objective: Option<f64>,
    /// Bound on the objective lift caused by the perturbation.
    pub epsilon_slack: f64,
}

/// A failed run together with the iterations completed before the failure.
#[derive(Debug)]
pub struct CgFailure {
    pub error: Error,
    pub trace: CgTrace,
}

impl fmt::Display for CgFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.trace.records.len())
    }
}

impl std::error::Error for CgFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for CgFailure {
    fn from(error: Error) -> Self {
        CgFailure {
            error,
            trace: CgTrace::default(),
        }
    }
}

/// Demand-greedy starting pool: the heuristic under duals π = d, λ = 0,
/// falling back to one random affordable pair.
pub fn initialize_pool(instance: &Instance, config: &CgConfig) -> Result<ColumnPool> {
    let params = &instance.params;
    if !params.zone_affordable(0.0) {
        return Err(Error::Infeasible(format!(
            "single-zone budget {:?} is below the fixed zone cost {}",
            params.zone_budget, params.beta
        )));
    }
    let surrogate = Duals {
        lambda: 0.0,
        pi: instance.demand.counted_pairs(params.include_self_pairs).collect(),
    };
    let found = heuristic_pricing(
        &surrogate,
        instance,
        &HeuristicOptions {
            runs: config.runs,
            run_time_limit: None,
            seed: config.seed,
        },
    )?;
    let mut pool = ColumnPool::new();
    for z in found.zones {
        pool.insert(z.zone, 0, ColumnSource::Initial, params)?;
    }
    if pool.is_empty() {
        let n = instance.num_cells();
        let feasible: Vec<(CellId, CellId)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| params.zone_affordable(instance.distances.two_way_sq(i, j)))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let &(i, j) = feasible.choose(&mut rng).ok_or_else(|| {
            Error::Infeasible("no pair of cells fits within the single-zone budget".into())
        })?;
        pool.insert(Zone::new([i, j], &instance.distances, params)?, 0, ColumnSource::Initial, params)?;
    }
    Ok(pool)
}

fn remaining(deadline: Option<Instant>) -> Option<Duration> {
    deadline.map(|d| d.saturating_duration_since(Instant::now()))
}

fn min_limit(a: Option<Duration>, b: Option<Duration>) -> Option<Duration> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

struct Pricer<'a> {
    instance: &'a Instance,
    config: &'a CgConfig,
    deadline: Option<Instant>,
}

impl Pricer<'_> {
    fn heuristic(&self, duals: &Duals, round: usize) -> Result<PricingResult> {
        let run_time_limit = if self.config.deterministic {
            None
        } else {
            min_limit(self.config.pricing_time_limit, remaining(self.deadline))
        };
        heuristic_pricing(
            duals,
            self.instance,
            &HeuristicOptions {
                runs: self.config.runs,
                run_time_limit,
                seed: self.config.seed.wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            },
        )
    }

    fn exact(&self, duals: &Duals, round: usize) -> Result<PricingResult> {
        let (time_limit, node_limit) = if self.config.deterministic {
            (None, self.config.pricing_node_limit)
        } else {
            (
                min_limit(self.config.pricing_time_limit, remaining(self.deadline)),
                self.config.pricing_node_limit,
            )
        };
        exact_pricing(
            duals,
            self.instance,
            &ExactOptions {
                time_limit,
                node_limit,
                seed: self.config.seed ^ round as u64,
            },
        )
    }
}

fn new_columns(result: &PricingResult, pool: &ColumnPool) -> usize {
    result.zones.iter().filter(|z| !pool.contains(z.zone.cells())).count()
}

/// Runs column generation followed by the integer master.
pub fn run_cg(instance: &Instance, config: &CgConfig) -> std::result::Result<CgOutcome, CgFailure> {
    let start = Instant::now();
    instance.validate()?;
    config.validate()?;
    let deadline = config.time_limit.map(|t| start + t);
    let mut pool = initialize_pool(instance, config)?;
    let mut build = build_rmp(&pool, instance, config.perturb, config.seed);
    let epsilon_slack = build.epsilon_slack_bound();
    let pricer = Pricer {
        instance,
        config,
        deadline,
    };

    let mut trace = CgTrace::default();
    let mut basis: Option<Basis> = None;
    let mut final_duals = None;
    let mut final_lp_objective = None;
    let (mut lp_time, mut pricing_time) = (Duration::ZERO, Duration::ZERO);
    let mut termination = Termination::IterationCap;

    macro_rules! fail {
        ($e:expr) => {{
            trace.termination = None;
            return Err(CgFailure { error: $e, trace });
        }};
    }

    for iteration in 1..=config.max_iterations {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            termination = Termination::Timeout;
            break;
        }
        let t0 = Instant::now();
        let lp_deadline = if config.deterministic { None } else { deadline };
        let rmp = match solve_rmp_lp(&build, basis.take(), lp_deadline) {
            Ok(r) => r,
            Err(_) if deadline.is_some_and(|d| Instant::now() >= d) && !config.deterministic => {
                termination = Termination::Timeout;
                break;
            }
            Err(e) => fail!(e),
        };
        lp_time += t0.elapsed();
        let duals = rmp.duals.clone();

        let t1 = Instant::now();
        let priced = match config.pricing {
            PricingMode::Exact => pricer.exact(&duals, iteration),
            PricingMode::Heuristic => pricer.heuristic(&duals, iteration),
            PricingMode::Hybrid => match pricer.heuristic(&duals, iteration) {
                Ok(h) if new_columns(&h, &pool) > 0 => Ok(h),
                Ok(_) => pricer.exact(&duals, iteration),
                Err(e) => Err(e),
            },
        };
        pricing_time += t1.elapsed();
        let priced = match priced {
            Ok(p) => p,
            Err(e) => fail!(e),
        };

        let mut added = Vec::new();
        let source = match priced.method {
            PricingMethod::Exact => ColumnSource::Exact,
            PricingMethod::Heuristic => ColumnSource::Heuristic,
        };
        for z in &priced.zones {
            match pool.insert(z.zone.clone(), iteration, source, &instance.params) {
                Ok(true) => added.push(z.zone.clone()),
                Ok(false) => {}
                Err(e) => fail!(e),
            }
        }
        let record = IterationRecord {
            iteration,
            pool_size: pool.len(),
            lp_objective: rmp.lp.objective,
            lambda: duals.lambda,
            max_pi: duals.max_pi(),
            columns_added: added.len(),
            best_reduced_cost: priced.best_reduced_cost(),
            pricing: priced.method,
            proven: priced.proven,
            wall_s: (!config.deterministic).then(|| start.elapsed().as_secs_f64()),
        };
        log::info!(
            "iter={} pool={} lp={:.6} lambda={:.6} max_pi={:.6} added={} best_rc={:?} method={:?}",
            record.iteration,
            record.pool_size,
            record.lp_objective,
            record.lambda,
            record.max_pi,
            record.columns_added,
            record.best_reduced_cost,
            record.pricing
        );
        trace.records.push(record);
        final_duals = Some(duals);
        final_lp_objective = Some(rmp.lp.objective);
        basis = rmp.lp.basis;

        if added.is_empty() {
            termination = if priced.proven || priced.method == PricingMethod::Heuristic {
                Termination::Converged
            } else {
                Termination::Timeout
            };
            break;
        }
        build.append_zones(added.iter());
    }
    trace.termination = Some(termination);

    let t2 = Instant::now();
    let int_build = build_rmp(&pool, instance, false, config.seed);
    let mip_opts = RmpMipOptions {
        time_limit: if config.deterministic { None } else { config.mip_time_limit },
        node_limit: config.mip_node_limit,
    };
    let mut solution = match solve_rmp_mip(&int_build, &pool, instance, &mip_opts) {
        Ok(s) => s,
        Err(e) => fail!(e),
    };
    let mip_time = t2.elapsed();
    solution.method = format!("cg-{}", config.pricing.as_str());
    solution.cg = Some(CgSummary {
        pricing: config.pricing.as_str().to_string(),
        iterations: trace.records.len(),
        pool_size: pool.len(),
        termination,
        root_lp_objective: final_lp_objective,
        seed: config.seed,
    });
    if !config.deterministic {
        solution.timings = Some(Timings {
            total_s: start.elapsed().as_secs_f64(),
            lp_s: lp_time.as_secs_f64(),
            pricing_s: pricing_time.as_secs_f64(),
            mip_s: mip_time.as_secs_f64(),
        });
    }
    Ok(CgOutcome {
        solution,
        trace,
        pool,
        final_duals,
        final_lp_objective,
        epsilon_slack,
    })
}
