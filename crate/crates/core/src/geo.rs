//! Small spherical and planar geometry helpers.

use serde_json::Value;

use crate::error::{Error, Result};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Great-circle distance in meters between two (lat, lon) points in degrees.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

/// A polygon with an outer ring and optional holes, in (lon, lat) order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<(f64, f64)>,
    pub holes: Vec<Vec<(f64, f64)>>,
}

impl Polygon {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        ring_contains(&self.exterior, lon, lat) && !self.holes.iter().any(|h| ring_contains(h, lon, lat))
    }
}

/// Geo-fence made of one or more polygons; a point is inside if any polygon
/// contains it.
#[derive(Clone, Debug, PartialEq)]
pub struct Boundary {
    pub polygons: Vec<Polygon>,
}

impl Boundary {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        self.polygons.iter().any(|p| p.contains(lat, lon))
    }

    /// Accepts a GeoJSON `Polygon`, `MultiPolygon`, `Feature` or
    /// `FeatureCollection` whose features are polygons.
    pub fn from_geojson(value: &Value) -> Result<Boundary> {
        let mut polygons = Vec::new();
        collect_polygons(value, &mut polygons)?;
        if polygons.is_empty() {
            return Err(Error::Input("boundary contains no polygon".into()));
        }
        Ok(Boundary { polygons })
    }

    pub fn from_geojson_str(text: &str) -> Result<Boundary> {
        let value: Value = serde_json::from_str(text)?;
        Boundary::from_geojson(&value)
    }
}

fn collect_polygons(value: &Value, out: &mut Vec<Polygon>) -> Result<()> {
    let kind = value
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Input("GeoJSON object without a `type`".into()))?;
    match kind {
        "Polygon" => out.push(parse_polygon(coordinates(value)?)?),
        "MultiPolygon" => {
            let polys = coordinates(value)?
                .as_array()
                .ok_or_else(|| Error::Input("MultiPolygon coordinates must be an array".into()))?;
            for p in polys {
                out.push(parse_polygon(p)?);
            }
        }
        "Feature" => {
            let geom = value
                .get("geometry")
                .ok_or_else(|| Error::Input("Feature without geometry".into()))?;
            collect_polygons(geom, out)?;
        }
        "FeatureCollection" => {
            let features = value
                .get("features")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Input("FeatureCollection without features".into()))?;
            for f in features {
                collect_polygons(f, out)?;
            }
        }
        other => return Err(Error::Input(format!("unsupported boundary geometry `{other}`"))),
    }
    Ok(())
}

fn coordinates(value: &Value) -> Result<&Value> {
    value
        .get("coordinates")
        .ok_or_else(|| Error::Input("geometry without coordinates".into()))
}

fn parse_polygon(value: &Value) -> Result<Polygon> {
    let rings = value
        .as_array()
        .ok_or_else(|| Error::Input("polygon coordinates must be an array of rings".into()))?;
    if rings.is_empty() {
        return Err(Error::Input("polygon has no rings".into()));
    }
    let mut parsed = Vec::with_capacity(rings.len());
    for (k, ring) in rings.iter().enumerate() {
        parsed.push(parse_ring(ring).map_err(|e| Error::Input(format!("ring {k}: {e}")))?);
    }
    let exterior = parsed.remove(0);
    Ok(Polygon {
        exterior,
        holes: parsed,
    })
}

fn parse_ring(value: &Value) -> std::result::Result<Vec<(f64, f64)>, String> {
    let positions = value.as_array().ok_or("ring must be an array of positions")?;
    let mut ring = Vec::with_capacity(positions.len());
    for p in positions {
        let xy = p.as_array().ok_or("position must be an array")?;
        if xy.len() < 2 {
            return Err("position needs at least two numbers".into());
        }
        let x = xy[0].as_f64().ok_or("longitude is not a number")?;
        let y = xy[1].as_f64().ok_or("latitude is not a number")?;
        if !x.is_finite() || !y.is_finite() {
            return Err("non-finite coordinate".into());
        }
        ring.push((x, y));
    }
    if ring.len() < 4 {
        return Err(format!("ring has {} positions, at least 4 required", ring.len()));
    }
    if ring.first() != ring.last() {
        return Err("ring is not closed".into());
    }
    Ok(ring)
}

/// Even-odd ray casting on a closed ring.
fn ring_contains(ring: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (xi, yi) = w[0];
        let (xj, yj) = w[1];
        if (yi > y) != (yj > y) {
            let cross = xi + (y - yi) / (yj - yi) * (xj - xi);
            if x < cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Convex hull by the monotone chain method, counter-clockwise, without the
/// closing point. Collinear boundary points are dropped.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn haversine_known_values() {
        assert_eq!(haversine_m(35.0, -85.0, 35.0, -85.0), 0.0);
        // one degree of latitude is about 111.2 km
        let d = haversine_m(0.0, 0.0, 1.0, 0.0);
        assert!((d - 111_195.0).abs() < 10.0, "{d}");
        assert!((haversine_m(10.0, 20.0, 11.0, 21.5) - haversine_m(11.0, 21.5, 10.0, 20.0)).abs() < 1e-9);
    }

    fn square() -> Value {
        json!({"type": "Polygon", "coordinates": [[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]]})
    }

    #[test]
    fn polygon_membership() {
        let b = Boundary::from_geojson(&square()).unwrap();
        assert!(b.contains(0.5, 0.5));
        assert!(!b.contains(1.5, 0.5));
        assert!(!b.contains(0.5, -0.1));
    }

    #[test]
    fn holes_and_collections() {
        let holed = json!({"type": "Feature", "properties": {}, "geometry": {"type": "Polygon", "coordinates": [
            [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0], [0.0, 0.0]],
            [[1.0, 1.0], [3.0, 1.0], [3.0, 3.0], [1.0, 3.0], [1.0, 1.0]]
        ]}});
        let fc = json!({"type": "FeatureCollection", "features": [holed, {"type": "Feature", "geometry": {
            "type": "MultiPolygon", "coordinates": [[[[10.0, 10.0], [11.0, 10.0], [11.0, 11.0], [10.0, 10.0]]]]}}]});
        let b = Boundary::from_geojson(&fc).unwrap();
        assert_eq!(b.polygons.len(), 2);
        assert!(b.contains(0.5, 0.5));
        assert!(!b.contains(2.0, 2.0));
        assert!(b.contains(10.2, 10.8));
    }

    #[test]
    fn malformed_polygons_are_rejected() {
        let open = json!({"type": "Polygon", "coordinates": [[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]]});
        assert!(matches!(Boundary::from_geojson(&open), Err(Error::Input(_))));
        let short = json!({"type": "Polygon", "coordinates": [[[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]]]});
        assert!(Boundary::from_geojson(&short).is_err());
        let text = json!({"type": "Polygon", "coordinates": [[["a", 0.0], [1.0, 0.0], [1.0, 1.0], ["a", 0.0]]]});
        assert!(Boundary::from_geojson(&text).is_err());
        assert!(Boundary::from_geojson(&json!({"type": "Point", "coordinates": [0.0, 0.0]})).is_err());
        assert!(Boundary::from_geojson_str("{not json").is_err());
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0), (1.0, 1.0), (1.0, 0.0), (0.5, 1.5)];
        let hull = convex_hull(&pts);
        assert_eq!(hull, vec![(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]);
        assert_eq!(convex_hull(&[(1.0, 1.0), (1.0, 1.0)]), vec![(1.0, 1.0)]);
    }
}
