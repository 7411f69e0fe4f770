//! Experiment harness on synthetic suites: exact against heuristic pricing,
//! sensitivity to the number of heuristic runs, and anytime curves.
//!
//! Every coverage figure is recomputed with [`crate::evaluate`] from the
//! zones of the returned solution.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cg::{run_cg, CgConfig, PricingMode};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, EvaluateOptions};
use crate::ingest::Instance;
use crate::solution::{Solution, Termination};
use crate::synthetic::{generate_instance, SyntheticSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub name: String,
    pub spec: SyntheticSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub instances: Vec<BenchInstance>,
}

impl Suite {
    /// Hex SHA-256 of the canonical JSON form, truncated to 16 characters.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("suite serializes");
        hex::encode(Sha256::digest(&json))[..16].to_string()
    }

    pub fn build(&self) -> Result<Vec<(String, Instance)>> {
        self.instances
            .iter()
            .map(|b| Ok((b.name.clone(), generate_instance(&b.spec)?)))
            .collect()
    }

    /// Square grids from 4x4 to 8x8, three seeds each.
    pub fn pricing_comparison(seed: u64) -> Suite {
        let mut instances = Vec::new();
        for side in 4..=8usize {
            for k in 0..3u64 {
                instances.push(BenchInstance {
                    name: format!("grid{side}x{side}-s{k}"),
                    spec: SyntheticSpec {
                        rows: side,
                        cols: side,
                        hotspots: 3,
                        trips: 2000,
                        seed: seed.wrapping_mul(1000).wrapping_add(side as u64 * 10 + k),
                        ..SyntheticSpec::default()
                    },
                });
            }
        }
        Suite {
            name: "pricing-comparison".into(),
            instances,
        }
    }

    /// Three multi-hotspot hex cities of growing size.
    pub fn multi_hotspot(seed: u64) -> Suite {
        let instances = [(6usize, 3usize), (7, 4), (8, 5)]
            .iter()
            .enumerate()
            .map(|(k, &(side, hot))| BenchInstance {
                name: format!("hex{side}x{side}-h{hot}"),
                spec: SyntheticSpec {
                    rows: side,
                    cols: side,
                    layout: crate::synthetic::Layout::Hex,
                    hotspots: hot,
                    trips: 2500,
                    decay_radius_m: 450.0,
                    seed: seed.wrapping_mul(1000).wrapping_add(500 + k as u64),
                    ..SyntheticSpec::default()
                },
            })
            .collect();
        Suite {
            name: "multi-hotspot".into(),
            instances,
        }
    }
}

/// Coverage percentage of a solution as recomputed by the evaluator.
pub fn evaluated_coverage(instance: &Instance, solution: &Solution) -> Result<f64> {
    let zones = solution.selected_cells();
    Ok(evaluate(instance, &zones, &EvaluateOptions::default())?.coverage_pct)
}

fn solve(instance: &Instance, config: &CgConfig) -> Result<Solution> {
    run_cg(instance, config).map(|o| o.solution).map_err(|f| f.error)
}

fn termination(s: &Solution) -> Option<Termination> {
    s.cg.as_ref().map(|c| c.termination)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance: String,
    pub cells: usize,
    pub exact_coverage_pct: f64,
    pub heuristic_coverage_pct: f64,
    /// Heuristic over exact coverage; 1 when both are zero.
    pub ratio: f64,
    pub exact_termination: Option<Termination>,
    pub heuristic_termination: Option<Termination>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PricingComparison {
    pub time_limit_s: f64,
    pub rows: Vec<ComparisonRow>,
    /// Largest `1 - ratio` over the suite, never negative.
    pub max_relative_shortfall: f64,
}

/// Solves every instance twice, once per pricing mode, each with the same
/// wall-clock budget.
pub fn run_pricing_comparison(
    instances: &[(String, Instance)],
    base: &CgConfig,
    budget: Duration,
) -> Result<PricingComparison> {
    let mut rows = Vec::with_capacity(instances.len());
    for (name, inst) in instances {
        let mut cfg = base.clone();
        cfg.time_limit = Some(budget);
        cfg.pricing = PricingMode::Exact;
        let exact = solve(inst, &cfg)?;
        cfg.pricing = PricingMode::Heuristic;
        let heur = solve(inst, &cfg)?;
        let e = evaluated_coverage(inst, &exact)?;
        let h = evaluated_coverage(inst, &heur)?;
        rows.push(ComparisonRow {
            instance: name.clone(),
            cells: inst.num_cells(),
            exact_coverage_pct: e,
            heuristic_coverage_pct: h,
            ratio: if e > 0.0 { h / e } else { 1.0 },
            exact_termination: termination(&exact),
            heuristic_termination: termination(&heur),
        });
    }
    let max_relative_shortfall = rows.iter().map(|r| 1.0 - r.ratio).fold(0.0, f64::max);
    Ok(PricingComparison {
        time_limit_s: budget.as_secs_f64(),
        rows,
        max_relative_shortfall,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub instance: String,
    /// Mean coverage per entry of `r_values`.
    pub mean_coverage_pct: Vec<f64>,
    pub std_coverage_pct: Vec<f64>,
    /// Mean coverage never decreases along `r_values`.
    pub nondecreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RSensitivity {
    pub r_values: Vec<usize>,
    pub seeds: Vec<u64>,
    pub time_limit_s: Option<f64>,
    pub rows: Vec<SensitivityRow>,
}

/// Heuristic-pricing CG for every (instance, R, seed); `base.time_limit`
/// applies to each solve.
pub fn run_r_sensitivity(
    instances: &[(String, Instance)],
    r_values: &[usize],
    seeds: &[u64],
    base: &CgConfig,
) -> Result<RSensitivity> {
    if r_values.is_empty() || seeds.is_empty() {
        return Err(Error::Input("need at least one R value and one seed".into()));
    }
    let mut rows = Vec::new();
    for (name, inst) in instances {
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for &r in r_values {
            let mut cov = Vec::with_capacity(seeds.len());
            for &seed in seeds {
                let cfg = CgConfig {
                    pricing: PricingMode::Heuristic,
                    runs: r,
                    seed,
                    ..base.clone()
                };
                cov.push(evaluated_coverage(inst, &solve(inst, &cfg)?)?);
            }
            let m = cov.iter().sum::<f64>() / cov.len() as f64;
            let var = cov.iter().map(|c| (c - m).powi(2)).sum::<f64>() / cov.len() as f64;
            means.push(m);
            stds.push(var.sqrt());
        }
        rows.push(SensitivityRow {
            instance: name.clone(),
            nondecreasing: means.windows(2).all(|w| w[1] >= w[0]),
            mean_coverage_pct: means,
            std_coverage_pct: stds,
        });
    }
    Ok(RSensitivity {
        r_values: r_values.to_vec(),
        seeds: seeds.to_vec(),
        time_limit_s: base.time_limit.map(|d| d.as_secs_f64()),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnytimePoint {
    /// Label set by callers that merge several curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    pub time_limit_s: f64,
    pub coverage_pct: f64,
    pub iterations: usize,
    pub pool_size: usize,
}

/// Solves once per checkpoint with deterministic settings, so that a longer
/// limit replays the shorter run before continuing.
pub fn run_anytime_curve(instance: &Instance, checkpoints: &[Duration], base: &CgConfig) -> Result<Vec<AnytimePoint>> {
    let mut limits = checkpoints.to_vec();
    limits.sort();
    limits
        .into_iter()
        .map(|t| {
            let cfg = CgConfig {
                time_limit: Some(t),
                deterministic: true,
                ..base.clone()
            };
            let sol = solve(instance, &cfg)?;
            let (iterations, pool_size) = sol.cg.as_ref().map_or((0, 0), |c| (c.iterations, c.pool_size));
            Ok(AnytimePoint {
                instance: None,
                time_limit_s: t.as_secs_f64(),
                coverage_pct: evaluated_coverage(instance, &sol)?,
                iterations,
                pool_size,
            })
        })
        .collect()
}

/// A table ready for CSV output.
pub trait Table {
    fn header(&self) -> Vec<String>;
    fn records(&self) -> Vec<Vec<String>>;
}

fn opt_term(t: Option<Termination>) -> String {
    match t {
        Some(Termination::Converged) => "converged".into(),
        Some(Termination::Timeout) => "timeout".into(),
        Some(Termination::IterationCap) => "iteration_cap".into(),
        None => String::new(),
    }
}

impl Table for PricingComparison {
    fn header(&self) -> Vec<String> {
        ["instance", "cells", "exact_pct", "heuristic_pct", "ratio", "exact_termination", "heuristic_termination"]
            .map(String::from)
            .to_vec()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.instance.clone(),
                    r.cells.to_string(),
                    format!("{:.4}", r.exact_coverage_pct),
                    format!("{:.4}", r.heuristic_coverage_pct),
                    format!("{:.6}", r.ratio),
                    opt_term(r.exact_termination),
                    opt_term(r.heuristic_termination),
                ]
            })
            .collect()
    }
}

impl Table for RSensitivity {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["instance".to_string()];
        h.extend(self.r_values.iter().map(|r| format!("{r} Runs")));
        h.push("nondecreasing".into());
        h
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut rec = vec![r.instance.clone()];
                rec.extend(r.mean_coverage_pct.iter().map(|m| format!("{m:.4}")));
                rec.push(r.nondecreasing.to_string());
                rec
            })
            .collect()
    }
}

impl Table for Vec<AnytimePoint> {
    fn header(&self) -> Vec<String> {
        ["instance", "time_limit_s", "coverage_pct", "iterations", "pool_size"].map(String::from).to_vec()
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.iter()
            .map(|p| {
                vec![
                    p.instance.clone().unwrap_or_default(),
                    p.time_limit_s.to_string(),
                    format!("{:.4}", p.coverage_pct),
                    p.iterations.to_string(),
                    p.pool_size.to_string(),
                ]
            })
            .collect()
    }
}

/// Writes `<root>/<digest>/<name>.csv` and `<name>.json`; returns the
/// directory.
pub fn write_results<T: Table + Serialize>(root: &Path, digest: &str, name: &str, table: &T) -> Result<PathBuf> {
    let dir = root.join(digest);
    fs::create_dir_all(&dir)?;
    let mut w = csv::Writer::from_path(dir.join(format!("{name}.csv")))?;
    w.write_record(table.header())?;
    for r in table.records() {
        w.write_record(r)?;
    }
    w.flush()?;
    fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(table)?)?;
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_tracks_content() {
        let a = Suite::pricing_comparison(1);
        assert_eq!(a.instances.len(), 15);
        assert_eq!(a.digest(), Suite::pricing_comparison(1).digest());
        assert_ne!(a.digest(), Suite::pricing_comparison(2).digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn sensitivity_header_has_one_column_per_r() {
        let t = RSensitivity {
            r_values: vec![5, 10],
            seeds: vec![0],
            time_limit_s: None,
            rows: vec![SensitivityRow {
                instance: "a".into(),
                mean_coverage_pct: vec![50.0, 51.0],
                std_coverage_pct: vec![0.0, 0.0],
                nondecreasing: true,
            }],
        };
        assert_eq!(t.header(), vec!["instance", "5 Runs", "10 Runs", "nondecreasing"]);
        assert_eq!(t.records()[0], vec!["a", "50.0000", "51.0000", "true"]);
    }

    #[test]
    fn tables_land_under_digest_dir() {
        let tmp = tempfile::tempdir().unwrap();
        let pts = vec![AnytimePoint {
            instance: None,
            time_limit_s: 0.0,
            coverage_pct: 10.0,
            iterations: 0,
            pool_size: 3,
        }];
        let dir = write_results(tmp.path(), "abc", "anytime", &pts).unwrap();
        let csv = fs::read_to_string(dir.join("anytime.csv")).unwrap();
        assert!(csv.starts_with("instance,time_limit_s,coverage_pct"));
        assert!(dir.join("anytime.json").exists());
    }
}
