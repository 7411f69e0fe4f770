mod settings;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use zonecg_core::bench::{run_anytime_curve, run_pricing_comparison, run_r_sensitivity, write_results, Suite};
use zonecg_core::cg::{run_cg, CgConfig};
use zonecg_core::evaluate::{evaluate_solution, EvaluateOptions};
use zonecg_core::export::zones_geojson;
use zonecg_core::ingest::{
    ingest_files, load_instance, save_instance, write_cells_csv, write_network_csv, write_trips_csv, IngestFiles,
    Instance, DEFAULT_MIN_TRIP_M,
};
use zonecg_core::oracle::{oracle_optimum, OracleLimits};
use zonecg_core::rmp::build_rmp;
use zonecg_core::solution::Solution;
use zonecg_core::synthetic::{generate, Layout, SyntheticSpec};
use zonecg_core::Error;

use settings::{cg_config, cost_params, CostArgs, FileConfig, SolveArgs};

/// Micro-transit zoning under a global budget by column generation.
#[derive(Parser, Debug)]
#[command(name = "zonecg", version)]
struct Cli {
    /// TOML file with default solver settings (flags and ZONECG_* variables
    /// take precedence)
    #[arg(long, global = true, env = "ZONECG_CONFIG")]
    config: Option<PathBuf>,
    /// More log output; repeat for debug level
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an instance file from trips, a road network and cells
    Ingest {
        #[arg(long)]
        trips: PathBuf,
        #[arg(long)]
        nodes: PathBuf,
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        cells: PathBuf,
        /// GeoJSON polygon; trips with an endpoint outside are dropped
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MIN_TRIP_M)]
        min_trip_m: f64,
        /// Directory for cached shortest-path matrices
        #[arg(long, env = "ZONECG_CACHE_DIR")]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run column generation and the final integer selection
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write the final integer master in LP format
        #[arg(long)]
        lp_dump: Option<PathBuf>,
    },
    /// Exact optimum by enumerating every affordable zone (small instances)
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long)]
        max_zone_size: Option<usize>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Recompute coverage, costs, connectivity and overlap of a solution
    Evaluate {
        instance: PathBuf,
        solution: PathBuf,
        /// Adjacency radius in normalized distance units
        #[arg(long)]
        adjacency_radius: Option<f64>,
        /// Write the JSON report here instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded synthetic city
    GenSynthetic {
        /// TOML or JSON spec; flags override its fields
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long, value_enum)]
        layout: Option<LayoutArg>,
        #[arg(long)]
        hotspots: Option<usize>,
        #[arg(long)]
        trips: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write trips.csv, nodes.csv, edges.csv and cells.csv here
        #[arg(long)]
        raw_dir: Option<PathBuf>,
    },
    /// Run the synthetic experiment suites
    Bench {
        #[arg(long, value_enum, default_value_t = BenchSuite::All)]
        suite: BenchSuite,
        #[arg(long, default_value = "results")]
        results_dir: PathBuf,
        /// Suite seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Wall-clock budget per solve in the pricing comparison, seconds
        #[arg(long, default_value_t = 10.0)]
        budget_s: f64,
        /// Solver seeds per instance in the run-count study
        #[arg(long, default_value_t = 20)]
        seeds: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LayoutArg {
    Square,
    Hex,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum BenchSuite {
    Comparison,
    Sensitivity,
    Anytime,
    All,
}

fn load(path: &Path) -> Result<Instance> {
    load_instance(path).with_context(|| format!("loading instance {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_solution(dir: &Path, instance: &Instance, solution: &Solution) -> Result<()> {
    write(&dir.join("solution.json"), &serde_json::to_string_pretty(solution)?)?;
    let geo = zones_geojson(instance, solution)?;
    write(&dir.join("zones.geojson"), &serde_json::to_string_pretty(&geo)?)?;
    Ok(())
}

fn summary(s: &Solution) -> String {
    let term = s.cg.as_ref().map(|c| format!(", {:?} after {} iterations", c.termination, c.iterations));
    format!(
        "{}: coverage {:.3}% with {} zones, cost {:.4} of {:.4}{}",
        s.method,
        s.coverage_pct,
        s.zones.len(),
        s.budget_used,
        s.budget,
        term.unwrap_or_default()
    )
}

fn synthetic_spec(
    path: Option<&Path>,
    rows: Option<usize>,
    cols: Option<usize>,
    layout: Option<LayoutArg>,
    hotspots: Option<usize>,
    trips: Option<usize>,
    seed: Option<u64>,
) -> Result<SyntheticSpec> {
    let mut spec = match path {
        None => SyntheticSpec::default(),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            if p.extension().is_some_and(|e| e == "json") {
                serde_json::from_str(&text)?
            } else {
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
        }
    };
    spec.rows = rows.unwrap_or(spec.rows);
    spec.cols = cols.unwrap_or(spec.cols);
    spec.hotspots = hotspots.unwrap_or(spec.hotspots);
    spec.trips = trips.unwrap_or(spec.trips);
    spec.seed = seed.unwrap_or(spec.seed);
    if let Some(l) = layout {
        spec.layout = match l {
            LayoutArg::Square => Layout::Square,
            LayoutArg::Hex => Layout::Hex,
        };
    }
    Ok(spec)
}

fn bench(suite: BenchSuite, root: &Path, seed: u64, budget_s: f64, seeds: u64) -> Result<()> {
    let want = |s: BenchSuite| suite == s || suite == BenchSuite::All;
    let base = CgConfig::default();
    if want(BenchSuite::Comparison) {
        let s = Suite::pricing_comparison(seed);
        let table = run_pricing_comparison(&s.build()?, &base, Duration::from_secs_f64(budget_s))?;
        let dir = write_results(root, &s.digest(), "pricing_comparison", &table)?;
        println!("pricing comparison: max shortfall {:.4} -> {}", table.max_relative_shortfall, dir.display());
    }
    if want(BenchSuite::Sensitivity) {
        let s = Suite::multi_hotspot(seed);
        let cfg = CgConfig {
            time_limit: Some(Duration::from_secs_f64(budget_s)),
            deterministic: true,
            ..base.clone()
        };
        let seeds: Vec<u64> = (0..seeds).collect();
        let table = run_r_sensitivity(&s.build()?, &[1, 5, 10], &seeds, &cfg)?;
        let dir = write_results(root, &s.digest(), "r_sensitivity", &table)?;
        println!("run-count sensitivity -> {}", dir.display());
    }
    if want(BenchSuite::Anytime) {
        let s = Suite::multi_hotspot(seed);
        let checkpoints: Vec<Duration> = [0.0, 0.25, 1.0, 4.0, 16.0].map(Duration::from_secs_f64).to_vec();
        let mut all = Vec::new();
        for (name, inst) in s.build()? {
            for mut p in run_anytime_curve(&inst, &checkpoints, &base)? {
                p.instance = Some(name.clone());
                all.push(p);
            }
        }
        let dir = write_results(root, &s.digest(), "anytime", &all)?;
        println!("anytime curves -> {}", dir.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest {
            trips,
            nodes,
            edges,
            cells,
            boundary,
            min_trip_m,
            cache_dir,
            cost,
            out,
        } => {
            let params = cost_params(&cost, &file, &Default::default())?;
            let files = IngestFiles {
                trips,
                nodes,
                edges,
                cells,
                boundary,
            };
            let inst = ingest_files(&files, params, min_trip_m, cache_dir.as_deref())?;
            save_instance(&inst, &out)?;
            let p = &inst.provenance;
            println!(
                "{} cells, {} of {} trips retained -> {}",
                inst.num_cells(),
                p.trips_retained.unwrap_or(0.0),
                p.trips_read.unwrap_or(0.0),
                out.display()
            );
        }
        Command::Solve {
            instance,
            cost,
            solve,
            out_dir,
            lp_dump,
        } => {
            let mut inst = load(&instance)?;
            inst.params = cost_params(&cost, &file, &inst.params)?;
            let config = cg_config(&solve, &file)?;
            log::info!("solving {} cells with {config:?}", inst.num_cells());
            let outcome = match run_cg(&inst, &config) {
                Ok(o) => o,
                Err(f) => {
                    if !f.trace.records.is_empty() {
                        write(&out_dir.join("trace.jsonl"), &f.trace.to_jsonl()?)?;
                    }
                    return Err(f.error.into());
                }
            };
            write_solution(&out_dir, &inst, &outcome.solution)?;
            write(&out_dir.join("trace.jsonl"), &outcome.trace.to_jsonl()?)?;
            if let Some(path) = lp_dump {
                let build = build_rmp(&outcome.pool, &inst, false, config.seed);
                write(&path, &build.model.to_lp_string())?;
            }
            println!("{}", summary(&outcome.solution));
        }
        Command::Oracle {
            instance,
            cost,
            max_zone_size,
            out_dir,
        } => {
            let mut inst = load(&instance)?;
            inst.params = cost_params(&cost, &file, &inst.params)?;
            let limits = OracleLimits {
                max_zone_size,
                ..OracleLimits::default()
            };
            let sol = oracle_optimum(&inst, &limits)?;
            write_solution(&out_dir, &inst, &sol)?;
            println!("{}", summary(&sol));
        }
        Command::Evaluate {
            instance,
            solution,
            adjacency_radius,
            out,
        } => {
            let inst = load(&instance)?;
            let text = fs::read_to_string(&solution).with_context(|| format!("reading {}", solution.display()))?;
            let sol: Solution = serde_json::from_str(&text).with_context(|| format!("parsing {}", solution.display()))?;
            let report = evaluate_solution(&inst, &sol, &EvaluateOptions { adjacency_radius })?;
            let json = serde_json::to_string_pretty(&report)?;
            match out {
                Some(p) => write(&p, &json)?,
                None => println!("{json}"),
            }
            if report.matches_reported == Some(false) {
                log::warn!(
                    "solution reports {} covered demand, recomputed {}",
                    sol.covered_demand,
                    report.covered_demand
                );
            }
        }
        Command::GenSynthetic {
            spec,
            rows,
            cols,
            layout,
            hotspots,
            trips,
            seed,
            cost,
            out,
            raw_dir,
        } => {
            let mut spec = synthetic_spec(spec.as_deref(), rows, cols, layout, hotspots, trips, seed)?;
            spec.params = cost_params(&cost, &file, &spec.params)?;
            let city = generate(&spec)?;
            save_instance(&city.instance, &out)?;
            if let Some(dir) = raw_dir {
                fs::create_dir_all(&dir)?;
                write_trips_csv(&dir.join("trips.csv"), &city.trips)?;
                write_cells_csv(&dir.join("cells.csv"), &city.instance.cells)?;
                write_network_csv(&dir.join("nodes.csv"), &dir.join("edges.csv"), &city.network)?;
            }
            println!("{} cells, {} trips -> {}", city.instance.num_cells(), city.trips.len(), out.display());
        }
        Command::Bench {
            suite,
            results_dir,
            seed,
            budget_s,
            seeds,
        } => bench(suite, &results_dir, seed, budget_s, seeds)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Infeasible(_)) => ExitCode::from(3),
                Some(Error::SizeGuard(_)) => ExitCode::from(4),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
