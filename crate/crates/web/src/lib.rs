//! Browser bindings: generate a synthetic city, solve it, inspect a zone.
//!
//! Every export takes and returns JSON strings. The `_impl` functions hold
//! the logic so they can be tested natively.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use zonecg_core::cg::{run_cg, CgConfig, PricingMode};
use zonecg_core::export::zones_geojson;
use zonecg_core::ingest::Instance;
use zonecg_core::model::{intra_zone_demand, Zone};
use zonecg_core::synthetic::{generate_instance, SyntheticSpec};

#[derive(Debug, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub pricing: String,
    pub runs: usize,
    pub seed: u64,
    pub time_limit_s: f64,
    pub budget: Option<f64>,
    pub zone_budget: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            pricing: "heuristic".into(),
            runs: 10,
            seed: 0,
            time_limit_s: 5.0,
            budget: None,
            zone_budget: None,
        }
    }
}

#[derive(Serialize)]
struct ZoneInfo {
    cells: Vec<usize>,
    diameter_sq: f64,
    cost: f64,
    demand: f64,
    within_zone_budget: bool,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Spec JSON (any subset of the generator fields) to instance JSON.
pub fn generate_instance_impl(spec_json: &str) -> Result<String, String> {
    let spec: SyntheticSpec = if spec_json.trim().is_empty() {
        SyntheticSpec::default()
    } else {
        serde_json::from_str(spec_json).map_err(err)?
    };
    generate_instance(&spec).map_err(err)?.to_json_string().map_err(err)
}

/// Solves an instance; returns `{solution, geojson, trace}`.
pub fn solve_impl(instance_json: &str, options_json: &str) -> Result<String, String> {
    let mut inst = Instance::from_json_str(instance_json).map_err(err)?;
    let opts: SolveOptions = if options_json.trim().is_empty() {
        SolveOptions::default()
    } else {
        serde_json::from_str(options_json).map_err(err)?
    };
    if let Some(b) = opts.budget {
        inst.params.budget = b;
    }
    if opts.zone_budget.is_some() {
        inst.params.zone_budget = opts.zone_budget;
    }
    let pricing: PricingMode = opts.pricing.parse().map_err(err)?;
    let limit = web_time::Duration::try_from_secs_f64(opts.time_limit_s).map_err(err)?;
    let config = CgConfig {
        pricing,
        runs: opts.runs,
        seed: opts.seed,
        time_limit: Some(limit),
        pricing_time_limit: Some(limit),
        mip_time_limit: Some(limit),
        ..CgConfig::default()
    };
    let out = run_cg(&inst, &config).map_err(err)?;
    let geojson = zones_geojson(&inst, &out.solution).map_err(err)?;
    let trace: Vec<Value> = out
        .trace
        .records
        .iter()
        .map(|r| json!({"iteration": r.iteration, "lp_objective": r.lp_objective, "pool_size": r.pool_size}))
        .collect();
    Ok(json!({"solution": out.solution, "geojson": geojson, "trace": trace}).to_string())
}

/// Cost, squared diameter and internal demand of an arbitrary cell set.
pub fn inspect_zone_impl(instance_json: &str, cells_json: &str) -> Result<String, String> {
    let inst = Instance::from_json_str(instance_json).map_err(err)?;
    let cells: Vec<usize> = serde_json::from_str(cells_json).map_err(err)?;
    let zone = Zone::new(cells, &inst.distances, &inst.params).map_err(err)?;
    let info = ZoneInfo {
        cells: zone.cells().to_vec(),
        diameter_sq: zone.diameter_sq(),
        cost: zone.cost(),
        demand: intra_zone_demand(zone.cells(), &inst.demand, inst.params.include_self_pairs),
        within_zone_budget: inst.params.zone_affordable(zone.diameter_sq()),
    };
    serde_json::to_string(&info).map_err(err)
}

#[wasm_bindgen]
pub fn generate(spec_json: &str) -> Result<String, JsValue> {
    generate_instance_impl(spec_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve(instance_json: &str, options_json: &str) -> Result<String, JsValue> {
    solve_impl(instance_json, options_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn inspect_zone(instance_json: &str, cells_json: &str) -> Result<String, JsValue> {
    inspect_zone_impl(instance_json, cells_json).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn city() -> String {
        generate_instance_impl(r#"{"rows": 3, "cols": 4, "hotspots": 2, "trips": 400, "seed": 4}"#).unwrap()
    }

    #[test]
    fn round_trip_through_json() {
        let inst = city();
        let out: Value = serde_json::from_str(&solve_impl(&inst, r#"{"seed": 2, "time_limit_s": 10}"#).unwrap()).unwrap();
        let zones = out["solution"]["zones"].as_array().unwrap();
        assert_eq!(out["geojson"]["features"].as_array().unwrap().len(), zones.len());
        assert!(out["solution"]["coverage_pct"].as_f64().unwrap() > 0.0);
        let first: Vec<usize> = serde_json::from_value(zones[0]["cells"].clone()).unwrap();
        let info: Value =
            serde_json::from_str(&inspect_zone_impl(&inst, &serde_json::to_string(&first).unwrap()).unwrap()).unwrap();
        assert_eq!(info["within_zone_budget"], true);
        assert_eq!(info["cost"], zones[0]["cost"]);
    }

    #[test]
    fn errors_are_strings() {
        assert!(generate_instance_impl(r#"{"rows": 1}"#).is_err());
        assert!(generate_instance_impl(r#"{"colour": 1}"#).is_err());
        let inst = city();
        assert!(solve_impl(&inst, r#"{"pricing": "magic"}"#).is_err());
        assert!(inspect_zone_impl(&inst, "[0, 500]").is_err());
        assert!(inspect_zone_impl("{}", "[0]").is_err());
    }
}
