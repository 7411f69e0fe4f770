use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use zonecg_core::ingest::load_instance;

fn zonecg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonecg"))
        .args(args)
        .current_dir(dir)
        .env_remove("ZONECG_BUDGET")
        .env_remove("ZONECG_CONFIG")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = zonecg(args, dir);
    assert!(
        out.status.success(),
        "zonecg {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn city(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let mut args = vec!["gen-synthetic", "-o", name];
    args.extend_from_slice(extra);
    ok(&args, dir);
    dir.join(name)
}

#[test]
fn tiny_grid_has_four_cells_and_demand() {
    let tmp = tempfile::tempdir().unwrap();
    let path = city(tmp.path(), "tiny.json", &["--rows", "2", "--cols", "2", "--hotspots", "1", "--trips", "300"]);
    let inst = load_instance(&path).unwrap();
    assert_eq!(inst.num_cells(), 4);
    assert!(inst.demand.total(false) > 0.0);
}

#[test]
fn generation_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = city(tmp.path(), "a.json", &["--seed", "9", "--layout", "hex"]);
    let b = city(tmp.path(), "b.json", &["--seed", "9", "--layout", "hex"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn spec_file_is_read_and_flags_override_it() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("spec.toml"), "rows = 3\ncols = 4\nhotspots = 1\ntrips = 200\n").unwrap();
    let path = city(tmp.path(), "c.json", &["--spec", "spec.toml", "--cols", "2"]);
    assert_eq!(load_instance(&path).unwrap().num_cells(), 6);
    fs::write(tmp.path().join("bad.toml"), "rows = 3\nflavour = 1\n").unwrap();
    assert!(!zonecg(&["gen-synthetic", "--spec", "bad.toml", "-o", "x.json"], tmp.path()).status.success());
}

fn raw_city(dir: &Path) -> PathBuf {
    ok(
        &["gen-synthetic", "--trips", "500", "--seed", "3", "-o", "gen.json", "--raw-dir", "raw"],
        dir,
    );
    dir.join("raw")
}

fn ingest_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "ingest",
        "--trips",
        "raw/trips.csv",
        "--nodes",
        "raw/nodes.csv",
        "--edges",
        "raw/edges.csv",
        "--cells",
        "raw/cells.csv",
        "-o",
        out,
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn ingest_reproduces_the_generator_and_is_stable() {
    let tmp = tempfile::tempdir().unwrap();
    raw_city(tmp.path());
    ok(&ingest_args("one.json", &["--cache-dir", "cache"]), tmp.path());
    ok(&ingest_args("two.json", &["--cache-dir", "cache"]), tmp.path());
    let one = load_instance(&tmp.path().join("one.json")).unwrap();
    let two = load_instance(&tmp.path().join("two.json")).unwrap();
    assert_eq!(one.num_cells(), 25);
    assert_eq!(one.digest().unwrap(), two.digest().unwrap());
    assert_eq!(fs::read(tmp.path().join("one.json")).unwrap(), fs::read(tmp.path().join("two.json")).unwrap());
    assert_eq!(fs::read_dir(tmp.path().join("cache")).unwrap().count(), 1);

    let generated = load_instance(&tmp.path().join("gen.json")).unwrap();
    assert_eq!(one.demand, generated.demand);
    assert_eq!(one.distances, generated.distances);
    assert_eq!(one.demand.total(true), one.provenance.trips_retained.unwrap());
    assert_eq!(one.provenance.sources.len(), 4);
}

#[test]
fn ingest_with_only_short_trips_warns() {
    let tmp = tempfile::tempdir().unwrap();
    raw_city(tmp.path());
    let out = zonecg(&ingest_args("short.json", &["--min-trip-m", "1e9"]), tmp.path());
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no trips left"));
    let inst = load_instance(&tmp.path().join("short.json")).unwrap();
    assert!(inst.demand.is_empty());
}

#[test]
fn minimal_two_cell_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::create_dir(d.join("raw")).unwrap();
    fs::write(d.join("raw/cells.csv"), "id,lat,lon\n0,35.0,-85.0\n1,35.0,-84.98\n").unwrap();
    fs::write(d.join("raw/nodes.csv"), "id,lat,lon\n10,35.0,-85.0\n11,35.0,-84.98\n").unwrap();
    fs::write(
        d.join("raw/edges.csv"),
        "from,to,travel_time_s\n10,11,120\n11,10,150\n",
    )
    .unwrap();
    fs::write(
        d.join("raw/trips.csv"),
        "origin_lat,origin_lon,dest_lat,dest_lon,count\n35.0,-85.0,35.0,-84.98,3\n35.0,-84.98,35.0,-85.0,2\n35.0,-85.0,35.0,-85.001,4\n",
    )
    .unwrap();
    ok(&ingest_args("two.json", &[]), d);
    let inst = load_instance(&d.join("two.json")).unwrap();
    assert_eq!(inst.num_cells(), 2);
    assert_eq!(inst.demand.get(0, 1), 3.0);
    assert_eq!(inst.demand.get(1, 0), 2.0);
    assert_eq!(inst.demand.total(true), 5.0);
    assert_eq!(inst.distances.get(0, 1), 0.8);
    assert_eq!(inst.distances.get(1, 0), 1.0);
}

#[test]
fn malformed_trips_name_file_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    raw_city(tmp.path());
    let trips = tmp.path().join("raw/trips.csv");
    let mut text = fs::read_to_string(&trips).unwrap();
    text.push_str("35.0,abc,35.0,-85.0,1\n");
    fs::write(&trips, text).unwrap();
    let out = zonecg(&ingest_args("bad.json", &[]), tmp.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trips.csv: trips line 502"), "{err}");
}

#[test]
fn solve_writes_all_outputs_and_evaluates_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    city(tmp.path(), "c.json", &[]);
    ok(&["solve", "c.json", "--out-dir", "out", "--lp-dump", "out/master.lp", "--time-limit", "20"], tmp.path());
    let sol = json(tmp.path().join("out/solution.json"));
    assert_eq!(sol["budget"], 8.0);
    assert_eq!(sol["method"], "cg-heuristic");
    let trace = fs::read_to_string(tmp.path().join("out/trace.jsonl")).unwrap();
    let records: Vec<Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len() as u64, sol["cg"]["iterations"].as_u64().unwrap());
    let geo = json(tmp.path().join("out/zones.geojson"));
    assert_eq!(geo["features"].as_array().unwrap().len(), sol["zones"].as_array().unwrap().len());
    assert!(fs::read_to_string(tmp.path().join("out/master.lp")).unwrap().starts_with("Maximize"));

    let report: Value = serde_json::from_str(&ok(&["evaluate", "c.json", "out/solution.json"], tmp.path())).unwrap();
    assert_eq!(report["covered_demand"], sol["covered_demand"]);
    assert_eq!(report["matches_reported"], true);
    assert_eq!(report["within_budget"], true);
}

#[test]
fn zero_time_limit_still_returns_a_solution() {
    let tmp = tempfile::tempdir().unwrap();
    city(tmp.path(), "c.json", &[]);
    ok(&["solve", "c.json", "--out-dir", "out", "--time-limit", "0"], tmp.path());
    let sol = json(tmp.path().join("out/solution.json"));
    assert_eq!(sol["cg"]["iterations"], 0);
    assert_eq!(sol["cg"]["termination"], "timeout");
    assert!(sol["covered_demand"].as_f64().unwrap() > 0.0);
    assert_eq!(fs::read_to_string(tmp.path().join("out/trace.jsonl")).unwrap(), "");
}

#[test]
fn same_seed_gives_identical_solution_files() {
    let tmp = tempfile::tempdir().unwrap();
    city(tmp.path(), "c.json", &["--rows", "4", "--cols", "4"]);
    for (mode, dirs) in [("exact", ["e1", "e2"]), ("hybrid", ["h1", "h2"])] {
        for d in dirs {
            ok(&["solve", "c.json", "--pricing", mode, "--seed", "5", "--deterministic", "--out-dir", d], tmp.path());
        }
        let read = |d: &str| fs::read(tmp.path().join(d).join("solution.json")).unwrap();
        assert_eq!(read(dirs[0]), read(dirs[1]));
    }
}

#[test]
fn flag_beats_env_beats_config() {
    let tmp = tempfile::tempdir().unwrap();
    city(tmp.path(), "c.json", &["--rows", "3", "--cols", "3"]);
    fs::write(tmp.path().join("cfg.toml"), "budget = 5.0\nruns = 3\ndeterministic = true\n").unwrap();
    let budget = |extra: &[&str], env: Option<&str>| -> f64 {
        let mut args = vec!["--config", "cfg.toml", "solve", "c.json", "--out-dir", "out"];
        args.extend_from_slice(extra);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_zonecg"));
        cmd.args(&args).current_dir(tmp.path()).env_remove("ZONECG_BUDGET");
        if let Some(v) = env {
            cmd.env("ZONECG_BUDGET", v);
        }
        assert!(cmd.output().unwrap().status.success());
        let sol = json(tmp.path().join("out/solution.json"));
        assert!(sol.get("timings").is_none());
        sol["budget"].as_f64().unwrap()
    };
    assert_eq!(budget(&[], None), 5.0);
    assert_eq!(budget(&[], Some("3")), 3.0);
    assert_eq!(budget(&["--budget", "4"], Some("3")), 4.0);
}

#[test]
fn oracle_matches_exact_cg_on_a_small_city() {
    let tmp = tempfile::tempdir().unwrap();
    city(tmp.path(), "c.json", &["--rows", "2", "--cols", "3", "--zone-budget", "3"]);
    ok(&["oracle", "c.json", "--out-dir", "oracle"], tmp.path());
    ok(&["solve", "c.json", "--pricing", "exact", "--deterministic", "--out-dir", "cg"], tmp.path());
    let best = json(tmp.path().join("oracle/solution.json"));
    let cg = json(tmp.path().join("cg/solution.json"));
    assert_eq!(best["method"], "oracle");
    assert!(cg["covered_demand"].as_f64().unwrap() <= best["covered_demand"].as_f64().unwrap() + 1e-9);
}

#[test]
fn diagnostics_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    city(tmp.path(), "c.json", &[]);
    let out = zonecg(&["solve", "c.json", "--zone-budget", "0.5", "--out-dir", "x"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("single-zone budget"));

    let out = zonecg(&["oracle", "c.json"], tmp.path());
    assert_eq!(out.status.code(), Some(4));

    fs::write(
        tmp.path().join("dangling.json"),
        r#"{"method":"x","status":"optimal","zones":[{"cells":[0,99],"diameter_sq":0,"cost":1,"demand":0}],
            "covered_demand":0,"total_demand":0,"coverage_pct":0,"budget":8,"budget_used":1,"mip_gap":0,"covered_pairs":[]}"#,
    )
    .unwrap();
    let out = zonecg(&["evaluate", "c.json", "dangling.json"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cell 99"));

    assert!(!zonecg(&["solve", "c.json", "--pricing", "greedy"], tmp.path()).status.success());
}
