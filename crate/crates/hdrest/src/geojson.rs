//! GeoJSON export of estimated regions and import of polygon files.

use hdrest_core::contour::{PolygonSet, Ring};
use hdrest_core::geometry::{BoundaryLoop, RConvexHull};
use hdrest_core::hdr::{HdrEstimate, Method, Region};
use hdrest_core::Point;
use serde_json::{json, Map, Value};

use crate::AppError;

/// Outer ring followed by its holes, each closed (first vertex repeated).
pub type PolygonRings = Vec<Vec<Point>>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoJsonOptions {
    /// Maximum sagitta of the chords replacing circular arcs, in output units.
    pub arc_tolerance: f64,
    /// Longitudes were multiplied by this factor before estimation; output
    /// coordinates are divided by it.
    pub x_scale: f64,
}

impl Default for GeoJsonOptions {
    fn default() -> Self {
        GeoJsonOptions {
            arc_tolerance: 1e-3,
            x_scale: 1.0,
        }
    }
}

fn close(mut ring: Vec<Point>) -> Vec<Point> {
    if let (Some(&first), Some(&last)) = (ring.first(), ring.last()) {
        if first != last {
            ring.push(first);
        }
    }
    ring
}

fn ring_area(ring: &[Point]) -> f64 {
    ring.windows(2).map(|w| w[0].cross(w[1])).sum::<f64>() * 0.5
}

fn hull_polygons(hull: &RConvexHull, tolerance: f64) -> Vec<PolygonRings> {
    let boundary = hull.boundary();
    let rings: Vec<(usize, Vec<Point>)> = boundary
        .loops
        .iter()
        .map(|l: &BoundaryLoop| (l.component, close(l.to_ring(tolerance))))
        .filter(|(_, r)| r.len() >= 4)
        .collect();
    let mut polys: Vec<(usize, PolygonRings)> = rings
        .iter()
        .filter(|(_, r)| ring_area(r) > 0.0)
        .map(|(c, r)| (*c, vec![r.clone()]))
        .collect();
    for (c, hole) in rings.iter().filter(|(_, r)| ring_area(r) <= 0.0) {
        let probe = hole[0];
        let owner = polys
            .iter_mut()
            .filter(|(pc, p)| pc == c && Ring { points: p[0].clone() }.contains(probe))
            .min_by(|a, b| ring_area(&a.1[0]).total_cmp(&ring_area(&b.1[0])));
        if let Some((_, p)) = owner {
            p.push(hole.clone());
        } else if let Some((_, p)) = polys.iter_mut().find(|(pc, _)| pc == c) {
            p.push(hole.clone());
        }
    }
    polys.into_iter().map(|(_, p)| p).collect()
}

fn contour_polygons(set: &PolygonSet) -> Vec<PolygonRings> {
    set.polygons()
        .into_iter()
        .map(|(outer, holes)| {
            let mut rings = vec![close(outer.points.clone())];
            rings.extend(holes.into_iter().map(|h| close(h.points.clone())));
            rings
        })
        .collect()
}

/// Polygons of a region in output coordinates. Arcs are flattened so that no
/// chord strays more than `arc_tolerance` from its arc after unscaling.
pub fn region_polygons(region: &Region, opts: &GeoJsonOptions) -> Vec<PolygonRings> {
    let s = opts.x_scale;
    let polys = match region {
        Region::Hull(h) => hull_polygons(h, opts.arc_tolerance * s.min(1.0)),
        Region::Contour(c) => contour_polygons(c),
    };
    if s == 1.0 {
        return polys;
    }
    polys
        .into_iter()
        .map(|p| p.into_iter().map(|r| r.into_iter().map(|q| Point::new(q.x / s, q.y)).collect()).collect())
        .collect()
}

fn coords(polys: &[PolygonRings]) -> Vec<Value> {
    polys
        .iter()
        .map(|p| {
            Value::Array(
                p.iter()
                    .map(|r| Value::Array(r.iter().map(|q| json!([q.x, q.y])).collect()))
                    .collect(),
            )
        })
        .collect()
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// One feature for an estimate: a `Polygon` when the region has exactly one
/// polygon, a `MultiPolygon` otherwise.
pub fn estimate_feature(est: &HdrEstimate, opts: &GeoJsonOptions, week: Option<usize>) -> Value {
    let polys = region_polygons(&est.region, opts);
    let geometry = if polys.len() == 1 {
        json!({"type": "Polygon", "coordinates": coords(&polys)[0]})
    } else {
        json!({"type": "MultiPolygon", "coordinates": coords(&polys)})
    };
    let mut props = Map::new();
    props.insert("method".into(), json!(match est.method {
        Method::Hybrid => "hybrid",
        Method::Plugin => "plugin",
    }));
    props.insert("tau".into(), json!(est.tau));
    props.insert("tau_bar".into(), json!(est.tau_bar));
    props.insert("coverage".into(), json!(est.coverage));
    props.insert("components".into(), json!(est.components));
    props.insert("week".into(), week.map_or(Value::Null, |w| json!(w)));
    props.insert("level".into(), json!(est.thresholds.level));
    props.insert("radius".into(), est.radius.map_or(Value::Null, finite));
    props.insert("converged".into(), json!(est.converged));
    props.insert("arc_tolerance".into(), json!(opts.arc_tolerance));
    json!({"type": "Feature", "geometry": geometry, "properties": props})
}

pub fn feature_collection(features: Vec<Value>) -> Value {
    json!({"type": "FeatureCollection", "features": features})
}

/// A `FeatureCollection` holding the feature of one estimate.
pub fn emit_geojson(est: &HdrEstimate, opts: &GeoJsonOptions, week: Option<usize>) -> Value {
    feature_collection(vec![estimate_feature(est, opts, week)])
}

fn parse_ring(v: &Value) -> Result<Vec<Point>, AppError> {
    let bad = || AppError::Validation("malformed GeoJSON ring".into());
    let mut pts: Vec<Point> = v
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|c| {
            let c = c.as_array().filter(|c| c.len() >= 2).ok_or_else(bad)?;
            Ok(Point::new(c[0].as_f64().ok_or_else(bad)?, c[1].as_f64().ok_or_else(bad)?))
        })
        .collect::<Result<_, AppError>>()?;
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    Ok(pts)
}

fn push_polygon(v: &Value, out: &mut Vec<Ring>) -> Result<(), AppError> {
    let rings = v.as_array().ok_or_else(|| AppError::Validation("malformed GeoJSON polygon".into()))?;
    for (k, r) in rings.iter().enumerate() {
        let mut ring = Ring { points: parse_ring(r)? };
        let outer = k == 0;
        if (ring.signed_area() > 0.0) != outer {
            ring.points.reverse();
        }
        out.push(ring);
    }
    Ok(())
}

fn push_geometry(g: &Value, out: &mut Vec<Ring>) -> Result<(), AppError> {
    match g.get("type").and_then(Value::as_str) {
        Some("Polygon") => push_polygon(&g["coordinates"], out),
        Some("MultiPolygon") => {
            for p in g["coordinates"].as_array().into_iter().flatten() {
                push_polygon(p, out)?;
            }
            Ok(())
        }
        Some("GeometryCollection") => {
            for sub in g["geometries"].as_array().into_iter().flatten() {
                push_geometry(sub, out)?;
            }
            Ok(())
        }
        _ => Err(AppError::Validation("expected Polygon or MultiPolygon geometry".into())),
    }
}

/// Polygons of a GeoJSON document. For a `FeatureCollection`, `feature`
/// selects one feature; otherwise all features are merged.
pub fn read_polygons(doc: &Value, feature: Option<usize>) -> Result<PolygonSet, AppError> {
    let mut rings = Vec::new();
    match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            let features = doc["features"].as_array().cloned().unwrap_or_default();
            let chosen: Vec<&Value> = match feature {
                Some(i) => vec![features
                    .get(i)
                    .ok_or_else(|| AppError::Validation(format!("no feature {i} in the collection")))?],
                None => features.iter().collect(),
            };
            for f in chosen {
                push_geometry(&f["geometry"], &mut rings)?;
            }
        }
        Some("Feature") => push_geometry(&doc["geometry"], &mut rings)?,
        _ => push_geometry(doc, &mut rings)?,
    }
    Ok(PolygonSet::from_rings(rings))
}
