//! GeoJSON export of selected zones.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::convex_hull;
use crate::ingest::Instance;
use crate::solution::Solution;

/// Half-width in degrees of the octagon drawn around a point when a zone's
/// hull would be degenerate.
pub const POINT_BUFFER_DEG: f64 = 0.0008;

fn buffered(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(points.len() * 8);
    for &(x, y) in points {
        for k in 0..8 {
            let a = std::f64::consts::PI * (2 * k + 1) as f64 / 8.0;
            out.push((x + POINT_BUFFER_DEG * a.cos(), y + POINT_BUFFER_DEG * a.sin()));
        }
    }
    out
}

fn twice_area(ring: &[(f64, f64)]) -> f64 {
    (0..ring.len())
        .map(|k| {
            let (a, b) = (ring[k], ring[(k + 1) % ring.len()]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum()
}

/// Closed (lon, lat) ring of the convex hull of the given points, widened
/// when fewer than three non-collinear points are available.
pub fn hull_ring(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull = convex_hull(points);
    if hull.len() < 3 || twice_area(&hull).abs() < 1e-14 {
        hull = convex_hull(&buffered(points));
    }
    let first = hull[0];
    hull.push(first);
    hull
}

/// One Polygon feature per selected zone.
pub fn zones_geojson(instance: &Instance, solution: &Solution) -> Result<Value> {
    let n = instance.num_cells();
    let mut features = Vec::with_capacity(solution.zones.len());
    for (k, z) in solution.zones.iter().enumerate() {
        if z.cells.is_empty() {
            return Err(Error::Validation(format!("zone {k} is empty")));
        }
        if let Some(&bad) = z.cells.iter().find(|&&c| c >= n) {
            return Err(Error::Validation(format!("zone {k} references cell {bad}")));
        }
        let pts: Vec<(f64, f64)> = z.cells.iter().map(|&c| (instance.cells[c].lon, instance.cells[c].lat)).collect();
        let ring: Vec<[f64; 2]> = hull_ring(&pts).into_iter().map(|(x, y)| [x, y]).collect();
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {
                "zone": k,
                "cells": z.cells,
                "tags": z.tags,
                "cost": z.cost,
                "diameter_sq": z.diameter_sq,
                "demand": z.demand,
            }
        }));
    }
    Ok(json!({"type": "FeatureCollection", "features": features}))
}
