//! Cell-to-cell shortest-path travel times over the road network.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geo::haversine_m;
use crate::ingest::RoadNetwork;
use crate::model::{Cell, DistanceMatrix, NodeId};

/// Snaps every cell centroid to its nearest network node (great-circle),
/// ties to the lowest node id.
pub fn map_cells_to_nodes(cells: &[Cell], network: &RoadNetwork) -> Result<Vec<NodeId>> {
    if network.is_empty() {
        return Err(Error::Input("road network has no nodes".into()));
    }
    Ok(cells
        .iter()
        .map(|c| {
            let mut best = (network.nodes()[0].id, f64::INFINITY);
            for n in network.nodes() {
                let d = haversine_m(c.lat, c.lon, n.lat, n.lon);
                if d < best.1 {
                    best = (n.id, d);
                }
            }
            best.0
        })
        .collect())
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    dist
}

/// Raw travel times between the given nodes: entry `[i][j]` is the shortest
/// path from `sources[i]` to `sources[j]`. Any unreachable pair is an error
/// listing every such (i, j).
pub fn shortest_path_matrix(network: &RoadNetwork, sources: &[NodeId]) -> Result<Vec<Vec<f64>>> {
    let idx: Vec<usize> = sources
        .iter()
        .map(|&s| {
            network
                .index_of(s)
                .ok_or_else(|| Error::Input(format!("node {s} is not in the road network")))
        })
        .collect::<Result<_>>()?;
    let adj = network.adjacency();
    let row = |&s: &usize| {
        let all = dijkstra(&adj, s);
        idx.iter().map(|&t| all[t]).collect::<Vec<f64>>()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        idx.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = idx.iter().map(row).collect();

    let mut missing = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            if !v.is_finite() {
                missing.push((i, j));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Disconnected { pairs: missing });
    }
    Ok(rows)
}

/// Divides by the largest entry so the maximum becomes exactly 1. An
/// all-zero matrix is returned unchanged with factor 1.
pub fn normalize(raw: Vec<Vec<f64>>) -> Result<DistanceMatrix> {
    let max = raw.iter().flatten().copied().fold(0.0, f64::max);
    if raw.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Input("distance matrix has non-finite entries".into()));
    }
    if max == 0.0 {
        return DistanceMatrix::from_rows(raw, 1.0);
    }
    let scaled = raw.into_iter().map(|r| r.into_iter().map(|v| v / max).collect()).collect();
    DistanceMatrix::from_rows(scaled, max)
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: String,
    matrix: Vec<Vec<f64>>,
}

/// Key for the raw matrix cache: network content plus the snapped nodes.
pub fn cache_key(network: &RoadNetwork, nodes: &[NodeId]) -> String {
    let mut h = Sha256::new();
    h.update(network.digest().as_bytes());
    for n in nodes {
        h.update(n.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("distances-{}.json", &key[..16]))
}

pub fn load_cached(dir: &Path, key: &str) -> Option<Vec<Vec<f64>>> {
    let text = fs::read_to_string(cache_path(dir, key)).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    (file.key == key).then_some(file.matrix)
}

pub fn store_cached(dir: &Path, key: &str, matrix: &[Vec<f64>]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let file = CacheFile {
        key: key.to_string(),
        matrix: matrix.to_vec(),
    };
    fs::write(cache_path(dir, key), serde_json::to_string(&file)?)?;
    Ok(())
}

/// Snaps cells to nodes (recording the node on each cell), computes the raw
/// matrix (through the cache when a directory is given) and normalizes it.
pub fn build_distance_matrix(cells: &mut [Cell], network: &RoadNetwork, cache_dir: Option<&Path>) -> Result<DistanceMatrix> {
    let nodes = map_cells_to_nodes(cells, network)?;
    for (c, &n) in cells.iter_mut().zip(&nodes) {
        c.node = Some(n);
    }
    let key = cache_key(network, &nodes);
    if let Some(raw) = cache_dir.and_then(|d| load_cached(d, &key)) {
        log::debug!("distance cache hit {}", &key[..16]);
        return normalize(raw);
    }
    let raw = shortest_path_matrix(network, &nodes)?;
    if let Some(dir) = cache_dir {
        store_cached(dir, &key, &raw)?;
    }
    normalize(raw)
}
