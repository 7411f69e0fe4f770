//! Resolution of solver settings from flags, environment, a TOML config
//! file and built-in defaults, in that order of precedence.

use std::path::Path;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;
use zonecg_core::cg::{CgConfig, PricingMode};
use zonecg_core::model::CostParams;

/// Per-zone budget as given on the command line: a number or `none`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ZoneBudget {
    Value(f64),
    Keyword(Keyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    None,
}

impl ZoneBudget {
    fn get(self) -> Option<f64> {
        match self {
            ZoneBudget::Value(v) => Some(v),
            ZoneBudget::Keyword(Keyword::None) => None,
        }
    }
}

pub fn parse_zone_budget(s: &str) -> Result<ZoneBudget, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(ZoneBudget::Keyword(Keyword::None));
    }
    s.parse::<f64>().map(ZoneBudget::Value).map_err(|_| format!("expected a number or `none`, got `{s}`"))
}

pub fn parse_pricing(s: &str) -> Result<PricingMode, String> {
    s.parse().map_err(|e: zonecg_core::Error| e.to_string())
}

#[derive(Args, Clone, Debug, Default)]
pub struct CostArgs {
    /// Cost per unit of squared zone diameter
    #[arg(long, env = "ZONECG_ALPHA")]
    pub alpha: Option<f64>,
    /// Fixed cost per zone
    #[arg(long, env = "ZONECG_BETA")]
    pub beta: Option<f64>,
    /// Global budget B
    #[arg(long, env = "ZONECG_BUDGET")]
    pub budget: Option<f64>,
    /// Single-zone budget B0, or `none` to disable it
    #[arg(long, env = "ZONECG_ZONE_BUDGET", value_parser = parse_zone_budget)]
    pub zone_budget: Option<ZoneBudget>,
}

#[derive(Args, Clone, Debug, Default)]
pub struct SolveArgs {
    /// Heuristic runs per pricing round
    #[arg(long, env = "ZONECG_RUNS")]
    pub runs: Option<usize>,
    #[arg(long, env = "ZONECG_SEED")]
    pub seed: Option<u64>,
    /// exact, heuristic or hybrid
    #[arg(long, env = "ZONECG_PRICING", value_parser = parse_pricing)]
    pub pricing: Option<PricingMode>,
    /// Wall-clock limit for column generation, in seconds
    #[arg(long, env = "ZONECG_TIME_LIMIT")]
    pub time_limit: Option<f64>,
    /// Limit for a single pricing call, in seconds
    #[arg(long, env = "ZONECG_PRICING_TIME_LIMIT")]
    pub pricing_time_limit: Option<f64>,
    /// Limit for the final integer solve, in seconds
    #[arg(long, env = "ZONECG_MIP_TIME_LIMIT")]
    pub mip_time_limit: Option<f64>,
    /// Perturb the linking rows (default; also ZONECG_PERTURB)
    #[arg(long, overrides_with = "no_perturb")]
    pub perturb: bool,
    #[arg(long, overrides_with = "perturb")]
    pub no_perturb: bool,
    /// Replace wall-clock limits inside iterations by node and run limits
    /// and leave timings out of the output (also ZONECG_DETERMINISTIC)
    #[arg(long)]
    pub deterministic: bool,
}

/// Contents of the `--config` file. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub budget: Option<f64>,
    pub zone_budget: Option<ZoneBudget>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub pricing: Option<String>,
    pub time_limit: Option<f64>,
    pub pricing_time_limit: Option<f64>,
    pub mip_time_limit: Option<f64>,
    pub perturb: Option<bool>,
    pub deterministic: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

fn env_bool(name: &str) -> Result<Option<bool>> {
    match std::env::var(name) {
        Err(_) => Ok(None),
        Ok(v) => match v.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "on" => Ok(Some(true)),
            "0" | "false" | "no" | "off" => Ok(Some(false)),
            _ => bail!("{name}={v} is not a boolean"),
        },
    }
}

fn seconds(v: Option<f64>, what: &str) -> Result<Option<Duration>> {
    v.map(|s| Duration::try_from_secs_f64(s).with_context(|| format!("{what} = {s} is not a valid duration")))
        .transpose()
}

/// Overlays flags (already merged with the environment by clap) and the
/// config file on top of `base`.
pub fn cost_params(args: &CostArgs, file: &FileConfig, base: &CostParams) -> Result<CostParams> {
    let p = CostParams {
        alpha: args.alpha.or(file.alpha).unwrap_or(base.alpha),
        beta: args.beta.or(file.beta).unwrap_or(base.beta),
        budget: args.budget.or(file.budget).unwrap_or(base.budget),
        zone_budget: match args.zone_budget.or(file.zone_budget) {
            Some(z) => z.get(),
            None => base.zone_budget,
        },
        include_self_pairs: base.include_self_pairs,
    };
    p.validate()?;
    Ok(p)
}

pub fn cg_config(args: &SolveArgs, file: &FileConfig) -> Result<CgConfig> {
    let d = CgConfig::default();
    let pricing = match (args.pricing, &file.pricing) {
        (Some(p), _) => p,
        (None, Some(s)) => parse_pricing(s).map_err(anyhow::Error::msg)?,
        (None, None) => d.pricing,
    };
    let perturb = if args.perturb {
        true
    } else if args.no_perturb {
        false
    } else {
        env_bool("ZONECG_PERTURB")?.or(file.perturb).unwrap_or(d.perturb)
    };
    let deterministic = args.deterministic || env_bool("ZONECG_DETERMINISTIC")?.or(file.deterministic).unwrap_or(false);
    let time_limit = seconds(args.time_limit.or(file.time_limit), "time limit")?.or(d.time_limit);
    let pricing_time_limit =
        seconds(args.pricing_time_limit.or(file.pricing_time_limit), "pricing time limit")?.or(d.pricing_time_limit);
    let mip_time_limit = seconds(args.mip_time_limit.or(file.mip_time_limit), "MIP time limit")?.or(d.mip_time_limit);
    let cfg = CgConfig {
        pricing,
        time_limit,
        pricing_time_limit,
        mip_time_limit,
        runs: args.runs.or(file.runs).unwrap_or(d.runs),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
        perturb,
        deterministic,
        ..d
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_fills_gaps_left_by_flags() {
        let file: FileConfig = toml::from_str("alpha = 3.0\nbudget = 6\nzone_budget = \"none\"\nruns = 4").unwrap();
        let args = CostArgs {
            alpha: Some(7.0),
            ..CostArgs::default()
        };
        let p = cost_params(&args, &file, &CostParams::default()).unwrap();
        assert_eq!((p.alpha, p.beta, p.budget, p.zone_budget), (7.0, 1.0, 6.0, None));
        let cfg = cg_config(&SolveArgs::default(), &file).unwrap();
        assert_eq!(cfg.runs, 4);
        assert_eq!(cfg.pricing, PricingMode::Heuristic);
    }

    #[test]
    fn defaults_match_reference_parameters() {
        let file = FileConfig::default();
        let p = cost_params(&CostArgs::default(), &file, &CostParams::default()).unwrap();
        assert_eq!((p.budget, p.alpha, p.beta, p.zone_budget), (8.0, 5.0, 1.0, Some(2.0)));
        let cfg = cg_config(&SolveArgs::default(), &file).unwrap();
        assert_eq!(cfg.runs, 10);
        assert!(cfg.perturb);
    }

    #[test]
    fn zone_budget_values() {
        assert_eq!(parse_zone_budget("2.5").unwrap().get(), Some(2.5));
        assert_eq!(parse_zone_budget("None").unwrap().get(), None);
        assert!(parse_zone_budget("cheap").is_err());
        assert!(toml::from_str::<FileConfig>("zone_budget = \"cheap\"").is_err());
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
    }

    #[test]
    fn bad_durations_are_rejected() {
        let args = SolveArgs {
            time_limit: Some(-1.0),
            ..SolveArgs::default()
        };
        assert!(cg_config(&args, &FileConfig::default()).is_err());
    }
}
