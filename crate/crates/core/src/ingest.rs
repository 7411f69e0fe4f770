//! Reading trips, cells and road networks; trip filtering; aggregation of
//! trips into a demand matrix; the versioned instance file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geo::{haversine_m, Boundary};
use crate::model::{validate_cells, Cell, CellId, CostParams, DemandMatrix, DistanceMatrix, NodeId};
use crate::network::build_distance_matrix;

pub const INSTANCE_FORMAT: &str = "zonecg-instance";
pub const INSTANCE_VERSION: u32 = 1;

/// Trips shorter than this great-circle distance are dropped by default.
pub const DEFAULT_MIN_TRIP_M: f64 = 500.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripRecord {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub dest_lat: f64,
    pub dest_lon: f64,
    #[serde(default = "one")]
    pub count: f64,
}

fn one() -> f64 {
    1.0
}

impl TripRecord {
    pub fn new(origin: (f64, f64), dest: (f64, f64), count: f64) -> Self {
        TripRecord {
            origin_lat: origin.0,
            origin_lon: origin.1,
            dest_lat: dest.0,
            dest_lon: dest.1,
            count,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let coords = [self.origin_lat, self.origin_lon, self.dest_lat, self.dest_lon];
        if !coords.iter().all(|c| c.is_finite()) {
            return Err("coordinates must be finite".into());
        }
        if !(self.count.is_finite() && self.count > 0.0) {
            return Err(format!("count {} must be finite and > 0", self.count));
        }
        Ok(())
    }

    pub fn length_m(&self) -> f64 {
        haversine_m(self.origin_lat, self.origin_lon, self.dest_lat, self.dest_lon)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: NodeId,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub from: NodeId,
    pub to: NodeId,
    /// Nominal driving time in seconds.
    #[serde(rename = "travel_time_s")]
    pub weight: f64,
}

/// Directed road graph. Nodes are kept sorted by id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoadNetwork {
    nodes: Vec<NetworkNode>,
    edges: Vec<NetworkEdge>,
}

impl RoadNetwork {
    pub fn new(mut nodes: Vec<NetworkNode>, edges: Vec<NetworkEdge>) -> Result<Self> {
        nodes.sort_by_key(|n| n.id);
        for w in nodes.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::Validation(format!("duplicate network node id {}", w[0].id)));
            }
        }
        if let Some(n) = nodes.iter().find(|n| !n.lat.is_finite() || !n.lon.is_finite()) {
            return Err(Error::Validation(format!("node {} has non-finite coordinates", n.id)));
        }
        let net = RoadNetwork { nodes, edges };
        for (k, e) in net.edges.iter().enumerate() {
            if net.index_of(e.from).is_none() || net.index_of(e.to).is_none() {
                return Err(Error::Validation(format!(
                    "edge {k} ({} -> {}) references an unknown node",
                    e.from, e.to
                )));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::Validation(format!("edge {k} has weight {} (must be finite, >= 0)", e.weight)));
            }
        }
        Ok(net)
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Position of `id` in [`RoadNetwork::nodes`].
    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok()
    }

    /// Outgoing adjacency lists indexed by node position.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            let (u, v) = (self.index_of(e.from).unwrap(), self.index_of(e.to).unwrap());
            adj[u].push((v, e.weight));
        }
        adj
    }

    /// Stable content hash over nodes and edges.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for n in &self.nodes {
            h.update(n.id.to_le_bytes());
            h.update(n.lat.to_le_bytes());
            h.update(n.lon.to_le_bytes());
        }
        h.update(b"|");
        for e in &self.edges {
            h.update(e.from.to_le_bytes());
            h.update(e.to.to_le_bytes());
            h.update(e.weight.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn csv_records<T: for<'de> Deserialize<'de>>(reader: impl Read, what: &str) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (k, rec) in rdr.deserialize::<T>().enumerate() {
        out.push(rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(k as u64 + 2);
            Error::parse(format!("{what} line {line}"), e.to_string())
        })?);
    }
    Ok(out)
}

pub fn read_trips(reader: impl Read) -> Result<Vec<TripRecord>> {
    let trips: Vec<TripRecord> = csv_records(reader, "trips")?;
    for (k, t) in trips.iter().enumerate() {
        t.validate().map_err(|m| Error::parse(format!("trips line {}", k + 2), m))?;
    }
    Ok(trips)
}

pub fn read_trips_csv(path: &Path) -> Result<Vec<TripRecord>> {
    read_trips(fs::File::open(path)?)
}

#[derive(Deserialize)]
struct CellRow {
    id: CellId,
    lat: f64,
    lon: f64,
    #[serde(default)]
    tag: Option<String>,
}

/// Reads `id,lat,lon[,tag]`; rows may come in any order but ids must cover
/// `0..n` exactly once.
pub fn read_cells(reader: impl Read) -> Result<Vec<Cell>> {
    let rows: Vec<CellRow> = csv_records(reader, "cells")?;
    let mut cells: Vec<Cell> = rows
        .into_iter()
        .map(|r| Cell {
            id: r.id,
            lat: r.lat,
            lon: r.lon,
            node: None,
            tag: r.tag.filter(|t| !t.is_empty()),
        })
        .collect();
    cells.sort_by_key(|c| c.id);
    validate_cells(&cells)?;
    Ok(cells)
}

pub fn read_cells_csv(path: &Path) -> Result<Vec<Cell>> {
    read_cells(fs::File::open(path)?)
}

pub fn read_network(nodes: impl Read, edges: impl Read) -> Result<RoadNetwork> {
    RoadNetwork::new(csv_records(nodes, "nodes")?, csv_records(edges, "edges")?)
}

pub fn read_network_csv(nodes: &Path, edges: &Path) -> Result<RoadNetwork> {
    read_network(fs::File::open(nodes)?, fs::File::open(edges)?)
}

pub fn read_boundary(path: &Path) -> Result<(Value, Boundary)> {
    let value: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let boundary = Boundary::from_geojson(&value)?;
    Ok((value, boundary))
}

/// Keeps trips at least `min_distance_m` long whose endpoints both lie in
/// `boundary` (when one is given).
pub fn filter_trips(trips: &[TripRecord], boundary: Option<&Boundary>, min_distance_m: f64) -> Result<Vec<TripRecord>> {
    if !(min_distance_m.is_finite() && min_distance_m >= 0.0) {
        return Err(Error::Input(format!("minimum trip distance {min_distance_m} must be finite and >= 0")));
    }
    Ok(trips
        .iter()
        .filter(|t| trip_passes(t, boundary, min_distance_m))
        .cloned()
        .collect())
}

fn trip_passes(t: &TripRecord, boundary: Option<&Boundary>, min_distance_m: f64) -> bool {
    if t.length_m() < min_distance_m {
        return false;
    }
    boundary.is_none_or(|b| b.contains(t.origin_lat, t.origin_lon) && b.contains(t.dest_lat, t.dest_lon))
}

/// Index of the cell whose centroid is nearest by great-circle distance,
/// ties to the lowest id.
pub fn nearest_cell(cells: &[Cell], lat: f64, lon: f64) -> CellId {
    let mut best = (0, f64::INFINITY);
    for c in cells {
        let d = haversine_m(lat, lon, c.lat, c.lon);
        if d < best.1 {
            best = (c.id, d);
        }
    }
    best.0
}

const ASSIGN_CHUNK: usize = 4096;

fn assign_chunk(trips: &[TripRecord], cells: &[Cell]) -> BTreeMap<(CellId, CellId), f64> {
    let mut acc = BTreeMap::new();
    for t in trips {
        let i = nearest_cell(cells, t.origin_lat, t.origin_lon);
        let j = nearest_cell(cells, t.dest_lat, t.dest_lon);
        *acc.entry((i, j)).or_insert(0.0) += t.count;
    }
    acc
}

/// Aggregates trips into an origin-destination matrix over `cells`.
///
/// Work is split into fixed-size chunks that are merged in chunk order, so
/// the result does not depend on the number of worker threads.
pub fn assign_to_cells(trips: &[TripRecord], cells: &[Cell]) -> Result<DemandMatrix> {
    if cells.is_empty() {
        return Err(Error::Input("cannot assign trips to an empty cell set".into()));
    }
    validate_cells(cells)?;
    #[cfg(feature = "parallel")]
    let partials: Vec<_> = {
        use rayon::prelude::*;
        trips.par_chunks(ASSIGN_CHUNK).map(|c| assign_chunk(c, cells)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<_> = trips.chunks(ASSIGN_CHUNK).map(|c| assign_chunk(c, cells)).collect();

    let mut demand = DemandMatrix::new(cells.len());
    for part in partials {
        for ((i, j), v) in part {
            demand.add(i, j, v)?;
        }
    }
    Ok(demand)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceFile {
    pub role: String,
    pub name: String,
    pub sha256: String,
}

/// Where an instance came from and which filters were applied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Provenance {
    pub sources: Vec<SourceFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_trip_distance_m: Option<f64>,
    pub geofenced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trips_read: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trips_retained: Option<f64>,
    /// Free-form generator settings for synthetic instances.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<Value>,
}

/// The complete zoning input bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub cells: Vec<Cell>,
    pub demand: DemandMatrix,
    pub distances: DistanceMatrix,
    pub params: CostParams,
    /// Raw GeoJSON geo-fence, if one was applied.
    pub boundary: Option<Value>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    format: String,
    version: u32,
    cells: Vec<Cell>,
    demand: Vec<(CellId, CellId, f64)>,
    distances: DistancesFile,
    params: CostParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    boundary: Option<Value>,
    #[serde(default)]
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistancesFile {
    normalization_factor: f64,
    matrix: Vec<Vec<f64>>,
}

impl Instance {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn validate(&self) -> Result<()> {
        validate_cells(&self.cells)?;
        let n = self.cells.len();
        if self.distances.dim() != n {
            return Err(Error::Validation(format!(
                "distance matrix is {0}x{0} but there are {n} cells",
                self.distances.dim()
            )));
        }
        if self.demand.dim() != n {
            return Err(Error::Validation(format!(
                "demand matrix covers {} cells but there are {n}",
                self.demand.dim()
            )));
        }
        self.distances.validate()?;
        self.params.validate()?;
        if let Some(b) = &self.boundary {
            Boundary::from_geojson(b)?;
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = InstanceFile {
            format: INSTANCE_FORMAT.into(),
            version: INSTANCE_VERSION,
            cells: self.cells.clone(),
            demand: self.demand.iter().map(|((i, j), v)| (i, j, v)).collect(),
            distances: DistancesFile {
                normalization_factor: self.distances.normalization_factor,
                matrix: self.distances.rows(),
            },
            params: self.params.clone(),
            boundary: self.boundary.clone(),
            provenance: self.provenance.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json_str(text: &str) -> Result<Instance> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            Error::parse(field, e.into_inner().to_string())
        })?;
        if file.format != INSTANCE_FORMAT {
            return Err(Error::parse("format", format!("expected `{INSTANCE_FORMAT}`, found `{}`", file.format)));
        }
        if file.version != INSTANCE_VERSION {
            return Err(Error::parse(
                "version",
                format!("unsupported version {} (this build reads {INSTANCE_VERSION})", file.version),
            ));
        }
        let n = file.cells.len();
        let inst = Instance {
            demand: DemandMatrix::from_triples(n, file.demand)?,
            distances: DistanceMatrix::from_rows(file.distances.matrix, file.distances.normalization_factor)?,
            cells: file.cells,
            params: file.params,
            boundary: file.boundary,
            provenance: file.provenance,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> Result<String> {
        Ok(sha256_hex(self.to_json_string()?.as_bytes()))
    }
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    instance.validate()?;
    fs::write(path, instance.to_json_string()?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    Instance::from_json_str(&fs::read_to_string(path)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn source_file(role: &str, path: &Path) -> Result<SourceFile> {
    Ok(SourceFile {
        role: role.into(),
        name: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        sha256: sha256_hex(&fs::read(path)?),
    })
}

/// Input files for [`ingest_files`].
#[derive(Clone, Debug)]
pub struct IngestFiles {
    pub trips: PathBuf,
    pub nodes: PathBuf,
    pub edges: PathBuf,
    pub cells: PathBuf,
    pub boundary: Option<PathBuf>,
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { field, message } => Error::Parse {
            field: format!("{}: {field}", path.display()),
            message,
        },
        Error::Io(io) => Error::Input(format!("{}: {io}", path.display())),
        other => other,
    }
}

/// Reads every input, filters and aggregates the trips, computes network
/// distances and returns the validated instance.
pub fn ingest_files(
    files: &IngestFiles,
    params: CostParams,
    min_trip_m: f64,
    cache_dir: Option<&Path>,
) -> Result<Instance> {
    let trips = read_trips_csv(&files.trips).map_err(|e| in_file(&files.trips, e))?;
    let mut cells = read_cells_csv(&files.cells).map_err(|e| in_file(&files.cells, e))?;
    let open = |p: &Path| fs::File::open(p).map_err(|e| in_file(p, e.into()));
    let nodes = csv_records(open(&files.nodes)?, "nodes").map_err(|e| in_file(&files.nodes, e))?;
    let edges = csv_records(open(&files.edges)?, "edges").map_err(|e| in_file(&files.edges, e))?;
    let network = RoadNetwork::new(nodes, edges)?;
    let boundary = match &files.boundary {
        Some(p) => Some(read_boundary(p).map_err(|e| in_file(p, e))?),
        None => None,
    };
    let kept = filter_trips(&trips, boundary.as_ref().map(|b| &b.1), min_trip_m)?;
    if kept.is_empty() {
        log::warn!("no trips left after filtering {} records; demand is empty", trips.len());
    }
    let demand = assign_to_cells(&kept, &cells)?;
    let distances = build_distance_matrix(&mut cells, &network, cache_dir)?;
    let mut sources = vec![
        source_file("trips", &files.trips)?,
        source_file("nodes", &files.nodes)?,
        source_file("edges", &files.edges)?,
        source_file("cells", &files.cells)?,
    ];
    if let Some(p) = &files.boundary {
        sources.push(source_file("boundary", p)?);
    }
    let instance = Instance {
        cells,
        demand,
        distances,
        params,
        boundary: boundary.map(|b| b.0),
        provenance: Provenance {
            sources,
            min_trip_distance_m: Some(min_trip_m),
            geofenced: files.boundary.is_some(),
            trips_read: Some(trips.iter().map(|t| t.count).sum()),
            trips_retained: Some(kept.iter().map(|t| t.count).sum()),
            generator: None,
        },
    };
    instance.validate()?;
    Ok(instance)
}

pub fn write_trips_csv(path: &Path, trips: &[TripRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for t in trips {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cells_csv(path: &Path, cells: &[Cell]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "lat", "lon", "tag"])?;
    for c in cells {
        w.write_record([c.id.to_string(), c.lat.to_string(), c.lon.to_string(), c.tag.clone().unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_network_csv(nodes: &Path, edges: &Path, network: &RoadNetwork) -> Result<()> {
    let mut w = csv::Writer::from_path(nodes)?;
    for n in network.nodes() {
        w.serialize(n)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(edges)?;
    for e in network.edges() {
        w.serialize(e)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    fn grid_cells(side: usize, step: f64) -> Vec<Cell> {
        (0..side * side)
            .map(|k| Cell::new(k, 35.0 + (k / side) as f64 * step, -85.0 + (k % side) as f64 * step))
            .collect()
    }

    #[test]
    fn reads_trips_with_and_without_count() {
        let text = "origin_lat,origin_lon,dest_lat,dest_lon\n35.0,-85.0,35.1,-85.1\n";
        let t = read_trips(text.as_bytes()).unwrap();
        assert_eq!(t[0].count, 1.0);
        let text = "origin_lat,origin_lon,dest_lat,dest_lon,count\n35.0,-85.0,35.1,-85.1,3\n";
        assert_eq!(read_trips(text.as_bytes()).unwrap()[0].count, 3.0);
    }

    #[test]
    fn trip_parse_errors_name_the_line() {
        let text = "origin_lat,origin_lon,dest_lat,dest_lon,count\n35.0,-85.0,35.1,-85.1,1\n35.0,x,35.1,-85.1,1\n";
        match read_trips(text.as_bytes()) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "trips line 3"),
            other => panic!("{other:?}"),
        }
        let text = "origin_lat,origin_lon,dest_lat,dest_lon,count\n35.0,-85.0,35.1,-85.1,0\n";
        assert!(matches!(read_trips(text.as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn zero_length_trip_is_removed() {
        let t = TripRecord::new((35.0, -85.0), (35.0, -85.0), 1.0);
        assert!(filter_trips(&[t], None, 500.0).unwrap().is_empty());
        assert!(filter_trips(&[], None, -1.0).is_err());
    }

    #[test]
    fn trip_leaving_the_boundary_is_removed() {
        let b = Boundary::from_geojson(&json!({"type": "Polygon", "coordinates":
            [[[-86.0, 34.0], [-84.0, 34.0], [-84.0, 36.0], [-86.0, 36.0], [-86.0, 34.0]]]}))
        .unwrap();
        let inside = TripRecord::new((35.0, -85.0), (35.1, -85.1), 1.0);
        let outside = TripRecord::new((35.0, -85.0), (37.0, -85.0), 1.0);
        let kept = filter_trips(&[inside.clone(), outside], Some(&b), 500.0).unwrap();
        assert_eq!(kept, vec![inside]);
    }

    #[test]
    fn filter_matches_per_record_check_and_is_idempotent() {
        let b = Boundary::from_geojson(&json!({"type": "Polygon", "coordinates":
            [[[-85.05, 34.95], [-84.95, 34.95], [-84.95, 35.05], [-85.05, 35.05], [-85.05, 34.95]]]}))
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trips: Vec<TripRecord> = (0..100)
            .map(|_| {
                let o = (35.0 + rng.random_range(-0.06..0.06), -85.0 + rng.random_range(-0.06..0.06));
                let d = if rng.random_bool(0.2) {
                    (o.0 + rng.random_range(-0.002..0.002), o.1)
                } else {
                    (35.0 + rng.random_range(-0.06..0.06), -85.0 + rng.random_range(-0.06..0.06))
                };
                TripRecord::new(o, d, 1.0)
            })
            .collect();
        let kept = filter_trips(&trips, Some(&b), 500.0).unwrap();
        let mut expected = 0;
        for t in &trips {
            let inside = |lat: f64, lon: f64| (34.95..=35.05).contains(&lat) && (-85.05..=-84.95).contains(&lon);
            if inside(t.origin_lat, t.origin_lon) && inside(t.dest_lat, t.dest_lon) && t.length_m() >= 500.0 {
                expected += 1;
            }
        }
        assert_eq!(kept.len(), expected);
        assert!(expected > 0 && expected < 100);
        assert_eq!(filter_trips(&kept, Some(&b), 500.0).unwrap(), kept);
    }

    #[test]
    fn assignment_of_exact_and_repeated_trips() {
        let cells = grid_cells(3, 0.01);
        let c2 = &cells[2];
        let c7 = &cells[7];
        let t = TripRecord::new((c2.lat, c2.lon), (c7.lat, c7.lon), 1.0);
        let d = assign_to_cells(&[t.clone(), t], &cells).unwrap();
        assert_eq!(d.get(2, 7), 2.0);
        assert_eq!(d.len(), 1);
        assert!(assign_to_cells(&[], &[]).is_err());
    }

    #[test]
    fn assignment_matches_brute_force_scan() {
        let cells = grid_cells(3, 0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trips: Vec<TripRecord> = (0..50)
            .map(|_| {
                TripRecord::new(
                    (35.0 + rng.random_range(-0.005..0.025), -85.0 + rng.random_range(-0.005..0.025)),
                    (35.0 + rng.random_range(-0.005..0.025), -85.0 + rng.random_range(-0.005..0.025)),
                    rng.random_range(1..4) as f64,
                )
            })
            .collect();
        let d = assign_to_cells(&trips, &cells).unwrap();
        let mut dense = vec![0.0; 81];
        for t in &trips {
            let near = |lat: f64, lon: f64| {
                let dists: Vec<f64> = cells.iter().map(|c| haversine_m(lat, lon, c.lat, c.lon)).collect();
                let m = dists.iter().cloned().fold(f64::INFINITY, f64::min);
                dists.iter().position(|&x| x == m).unwrap()
            };
            dense[near(t.origin_lat, t.origin_lon) * 9 + near(t.dest_lat, t.dest_lon)] += t.count;
        }
        assert_eq!(d.to_dense(), dense);
        let total: f64 = trips.iter().map(|t| t.count).sum();
        assert_eq!(d.total(true), total);
    }

    #[test]
    fn ties_go_to_the_lowest_cell() {
        let cells = vec![Cell::new(0, 0.0, 1.0), Cell::new(1, 0.0, -1.0)];
        assert_eq!(nearest_cell(&cells, 0.0, 0.0), 0);
    }

    #[test]
    fn cells_and_network_csv() {
        let cells = read_cells("id,lat,lon,tag\n1,35.1,-85.0,b\n0,35.0,-85.0,\n".as_bytes()).unwrap();
        assert_eq!(cells[0].id, 0);
        assert_eq!(cells[0].tag, None);
        assert_eq!(cells[1].tag.as_deref(), Some("b"));
        assert!(read_cells("id,lat,lon\n0,1,1\n2,1,1\n".as_bytes()).is_err());

        let net = read_network(
            "id,lat,lon\n5,35.0,-85.0\n2,35.1,-85.0\n".as_bytes(),
            "from,to,travel_time_s\n5,2,30\n2,5,45.5\n".as_bytes(),
        )
        .unwrap();
        assert_eq!(net.nodes()[0].id, 2);
        assert_eq!(net.adjacency()[1], vec![(0, 30.0)]);
        let bad = read_network("id,lat,lon\n1,0,0\n".as_bytes(), "from,to,travel_time_s\n1,9,3\n".as_bytes());
        assert!(matches!(bad, Err(Error::Validation(_))));
        let neg = read_network("id,lat,lon\n1,0,0\n".as_bytes(), "from,to,travel_time_s\n1,1,-3\n".as_bytes());
        assert!(neg.is_err());
    }

    fn small_instance() -> Instance {
        let cells = grid_cells(2, 0.01);
        let demand = DemandMatrix::from_triples(4, [(0, 1, 3.0), (1, 0, 2.5), (2, 3, 1.0)]).unwrap();
        let distances = DistanceMatrix::from_rows(
            vec![
                vec![0.0, 0.1, 0.2, 0.3],
                vec![0.15, 0.0, 0.25, 0.2],
                vec![0.2, 0.3, 0.0, 0.1],
                vec![0.3, 0.2, 0.1, 0.0],
            ],
            412.5,
        )
        .unwrap();
        Instance {
            cells,
            demand,
            distances,
            params: CostParams::default(),
            boundary: None,
            provenance: Provenance::default(),
        }
    }

    #[test]
    fn instance_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let mut inst = small_instance();
        inst.distances.normalization_factor = 1.0 / 3.0;
        inst.boundary = Some(json!({"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 0]]]}));
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);
    }

    #[test]
    fn negative_demand_is_a_validation_error() {
        let text = small_instance().to_json_string().unwrap().replace("[0,1,3.0]", "[0,1,-3.0]");
        assert!(matches!(Instance::from_json_str(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn schema_errors_name_the_field() {
        let text = small_instance().to_json_string().unwrap().replace("\"alpha\":5.0", "\"alpha\":\"five\"");
        match Instance::from_json_str(&text) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "params.alpha"),
            other => panic!("{other:?}"),
        }
        let text = small_instance().to_json_string().unwrap().replace("\"version\":1", "\"version\":9");
        assert!(matches!(Instance::from_json_str(&text), Err(Error::Parse { field, .. }) if field == "version"));
    }

    #[test]
    fn dimension_mismatch_is_a_validation_error() {
        let mut inst = small_instance();
        inst.cells.pop();
        assert!(matches!(inst.validate(), Err(Error::Validation(_))));
    }
}
