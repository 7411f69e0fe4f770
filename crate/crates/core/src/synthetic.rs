//! Seeded synthetic cities: a grid of cells, a grid road network with
//! jittered speeds, and hotspot-driven trips pushed through the regular
//! ingest pipeline.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::haversine_m;
use crate::ingest::{
    assign_to_cells, filter_trips, Instance, NetworkEdge, NetworkNode, Provenance, RoadNetwork, TripRecord,
    DEFAULT_MIN_TRIP_M,
};
use crate::model::{Cell, CostParams};
use crate::network::build_distance_matrix;

const M_PER_DEG_LAT: f64 = 111_195.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Square,
    /// Odd rows shifted by half a cell; six neighbours per cell.
    Hex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cols: usize,
    pub layout: Layout,
    pub spacing_m: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub hotspots: usize,
    /// Peak attractiveness of a hotspot relative to the background.
    pub intensity: f64,
    pub decay_radius_m: f64,
    pub trips: usize,
    pub speed_mps: f64,
    /// Relative speed jitter; each directed edge draws from 1 ± jitter.
    pub speed_jitter: f64,
    pub min_trip_m: f64,
    pub params: CostParams,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            rows: 5,
            cols: 5,
            layout: Layout::Square,
            spacing_m: 400.0,
            origin_lat: 35.0,
            origin_lon: -85.3,
            hotspots: 2,
            intensity: 8.0,
            decay_radius_m: 500.0,
            trips: 800,
            speed_mps: 9.0,
            speed_jitter: 0.25,
            min_trip_m: DEFAULT_MIN_TRIP_M,
            params: CostParams::default(),
            seed: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::Input(format!("grid {}x{} must be at least 2x2", self.rows, self.cols)));
        }
        let positive = [self.spacing_m, self.decay_radius_m, self.speed_mps];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Input("spacing, decay radius and speed must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.speed_jitter) {
            return Err(Error::Input(format!("speed jitter {} must be in [0, 1)", self.speed_jitter)));
        }
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(Error::Input("intensity must be finite and >= 0".into()));
        }
        if self.hotspots > self.rows * self.cols {
            return Err(Error::Input("more hotspots than cells".into()));
        }
        self.params.validate()
    }

    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }
}

/// Everything generated for a spec, including the raw inputs.
#[derive(Clone, Debug)]
pub struct SyntheticCity {
    pub instance: Instance,
    pub network: RoadNetwork,
    pub trips: Vec<TripRecord>,
}

fn offset(spec: &SyntheticSpec, dx: f64, dy: f64) -> (f64, f64) {
    let lat = spec.origin_lat + dy / M_PER_DEG_LAT;
    let lon = spec.origin_lon + dx / (M_PER_DEG_LAT * spec.origin_lat.to_radians().cos());
    (lat, lon)
}

fn centroid_xy(spec: &SyntheticSpec, r: usize, c: usize) -> (f64, f64) {
    let s = spec.spacing_m;
    match spec.layout {
        Layout::Square => (c as f64 * s, r as f64 * s),
        Layout::Hex => {
            let shift = if r % 2 == 1 { s / 2.0 } else { 0.0 };
            (c as f64 * s + shift, r as f64 * s * 3f64.sqrt() / 2.0)
        }
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCity> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.num_cells();
    let xy: Vec<(f64, f64)> = (0..n).map(|k| centroid_xy(spec, k / spec.cols, k % spec.cols)).collect();
    let mut cells: Vec<Cell> = xy
        .iter()
        .enumerate()
        .map(|(k, &(x, y))| {
            let (lat, lon) = offset(spec, x, y);
            let mut cell = Cell::new(k, lat, lon);
            cell.tag = Some(format!("r{}c{}", k / spec.cols, k % spec.cols));
            cell
        })
        .collect();

    let nodes: Vec<NetworkNode> = cells
        .iter()
        .map(|c| NetworkNode {
            id: c.id as u64,
            lat: c.lat,
            lon: c.lon,
        })
        .collect();
    let mut edges = Vec::new();
    let reach = spec.spacing_m * 1.01;
    for u in 0..n {
        for v in 0..n {
            let d = ((xy[u].0 - xy[v].0).powi(2) + (xy[u].1 - xy[v].1).powi(2)).sqrt();
            if u != v && d <= reach {
                let speed = spec.speed_mps * rng.random_range(1.0 - spec.speed_jitter..=1.0 + spec.speed_jitter);
                let meters = haversine_m(cells[u].lat, cells[u].lon, cells[v].lat, cells[v].lon);
                edges.push(NetworkEdge {
                    from: u as u64,
                    to: v as u64,
                    weight: meters / speed,
                });
            }
        }
    }
    let network = RoadNetwork::new(nodes, edges)?;

    let mut hot: Vec<usize> = Vec::new();
    while hot.len() < spec.hotspots {
        let k = rng.random_range(0..n);
        if !hot.contains(&k) {
            hot.push(k);
        }
    }
    let hot_weight: Vec<f64> = hot.iter().map(|_| rng.random_range(0.5..1.5) * spec.intensity).collect();
    let meters = |a: usize, b: usize| ((xy[a].0 - xy[b].0).powi(2) + (xy[a].1 - xy[b].1).powi(2)).sqrt();
    let attract: Vec<f64> = (0..n)
        .map(|k| {
            0.05 + hot
                .iter()
                .zip(&hot_weight)
                .map(|(&h, w)| w * (-meters(k, h) / spec.decay_radius_m).exp())
                .sum::<f64>()
        })
        .collect();
    let origin_dist = WeightedIndex::new(&attract).map_err(|e| Error::Input(e.to_string()))?;
    let dest_dists: Vec<WeightedIndex<f64>> = (0..n)
        .map(|o| {
            let w: Vec<f64> = (0..n)
                .map(|d| attract[d] * (-meters(o, d) / (3.0 * spec.decay_radius_m)).exp())
                .collect();
            WeightedIndex::new(&w).map_err(|e| Error::Input(e.to_string()))
        })
        .collect::<Result<_>>()?;
    let half = spec.spacing_m * 0.45;
    let mut trips = Vec::with_capacity(spec.trips);
    for _ in 0..spec.trips {
        let o = origin_dist.sample(&mut rng);
        let d = dest_dists[o].sample(&mut rng);
        let mut point = |k: usize| {
            let dx = rng.random_range(-half..half);
            let dy = rng.random_range(-half..half);
            offset(spec, xy[k].0 + dx, xy[k].1 + dy)
        };
        let (op, dp) = (point(o), point(d));
        trips.push(TripRecord::new(op, dp, 1.0));
    }

    let kept = filter_trips(&trips, None, spec.min_trip_m)?;
    let demand = assign_to_cells(&kept, &cells)?;
    let distances = build_distance_matrix(&mut cells, &network, None)?;
    let provenance = Provenance {
        sources: Vec::new(),
        min_trip_distance_m: Some(spec.min_trip_m),
        geofenced: false,
        trips_read: Some(trips.len() as f64),
        trips_retained: Some(kept.len() as f64),
        generator: Some(serde_json::to_value(spec)?),
    };
    let instance = Instance {
        cells,
        demand,
        distances,
        params: spec.params.clone(),
        boundary: None,
        provenance,
    };
    instance.validate()?;
    Ok(SyntheticCity {
        instance,
        network,
        trips,
    })
}

/// Shorthand for [`generate`] when only the instance is needed.
pub fn generate_instance(spec: &SyntheticSpec) -> Result<Instance> {
    Ok(generate(spec)?.instance)
}
