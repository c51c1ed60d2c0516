// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::{check_positive, MultilayerError};
use crate::geo::{haversine_m, GeoPoint, LocalProjection};
use crate::ingest::RoutePolyline;

/// Stop-to-stop segment along a route. Stop indices refer to the input slice.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteSegment {
    pub route_id: String,
    pub from_stop: usize,
    pub to_stop: usize,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransitEdges {
    pub segments: Vec<RouteSegment>,
    /// Routes with fewer than two snapped stops.
    pub warnings: usize,
}

/// Snaps stops within `snap_tolerance_m` of each route, orders them by arc
/// length and joins consecutive ones. A stop pair already joined by an
/// earlier route (in either direction) is skipped.
pub fn transit_route_edges(stops: &[GeoPoint], routes: &[RoutePolyline], snap_tolerance_m: f64) -> Result<TransitEdges, MultilayerError> {
    check_positive("snap tolerance", snap_tolerance_m)?;
    let mut out = TransitEdges::default();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for route in routes {
        let snapped = snap_stops(stops, &route.points, snap_tolerance_m);
        if snapped.len() < 2 {
            out.warnings += 1;
            continue;
        }
        for w in snapped.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            out.segments.push(RouteSegment { route_id: route.route_id.clone(), from_stop: a, to_stop: b, length_m: w[1].0 - w[0].0 });
        }
    }
    Ok(out)
}

/// (arc-length parameter, stop index) for every stop within tolerance,
/// sorted by parameter then index.
fn snap_stops(stops: &[GeoPoint], line: &[GeoPoint], tol: f64) -> Vec<(f64, usize)> {
    if line.len() < 2 {
        return Vec::new();
    }
    let proj = LocalProjection::new(line[0]);
    let pts: Vec<(f64, f64)> = line.iter().map(|p| proj.project(*p)).collect();
    let mut cumulative = Vec::with_capacity(line.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in line.windows(2) {
        acc += haversine_m(w[0], w[1]);
        cumulative.push(acc);
    }
    // cheap prefilter on a lat/lon box around the line
    let pad_lat = (tol / crate::geo::EARTH_RADIUS_M).to_degrees() * 1.01;
    let max_lat = line.iter().map(|p| p.lat().abs()).fold(0.0, f64::max) + pad_lat;
    let pad_lon = if max_lat < 89.0 { pad_lat / max_lat.to_radians().cos() } else { 360.0 };
    let min_lat = line.iter().map(|p| p.lat()).fold(f64::INFINITY, f64::min) - pad_lat;
    let top_lat = line.iter().map(|p| p.lat()).fold(f64::NEG_INFINITY, f64::max) + pad_lat;
    let min_lon = line.iter().map(|p| p.lon()).fold(f64::INFINITY, f64::min) - pad_lon;
    let max_lon = line.iter().map(|p| p.lon()).fold(f64::NEG_INFINITY, f64::max) + pad_lon;
    let crosses_antimeridian = max_lon - min_lon > 180.0;

    let mut out = Vec::new();
    for (i, s) in stops.iter().enumerate() {
        if s.lat() < min_lat || s.lat() > top_lat || (!crosses_antimeridian && (s.lon() < min_lon || s.lon() > max_lon)) {
            continue;
        }
        let q = proj.project(*s);
        let mut best: Option<(f64, f64)> = None;
        for k in 0..pts.len() - 1 {
            let (ax, ay) = pts[k];
            let (bx, by) = pts[k + 1];
            let (dx, dy) = (bx - ax, by - ay);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 { (((q.0 - ax) * dx + (q.1 - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let d = ((ax + t * dx - q.0).powi(2) + (ay + t * dy - q.1).powi(2)).sqrt();
            let param = cumulative[k] + t * (cumulative[k + 1] - cumulative[k]);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, param));
            }
        }
        if let Some((d, param)) = best {
            if d <= tol {
                out.push((param, i));
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    fn route(id: &str, points: Vec<GeoPoint>) -> RoutePolyline {
        RoutePolyline { route_id: id.into(), points }
    }

    /// Meters per degree of latitude.
    const M_PER_DEG: f64 = 111_194.926_644_558_74;

    #[test]
    fn orders_stops_along_a_straight_route() {
        // stops given out of order; C, A, B along the line northwards are A(0), B(1), C(2)
        let stops = vec![pt(0.002, 0.0), pt(0.0, 0.0), pt(0.001, 0.0)];
        let r = transit_route_edges(&stops, &[route("1", vec![pt(-0.001, 0.0), pt(0.003, 0.0)])], 50.0).unwrap();
        let pairs: Vec<(usize, usize)> = r.segments.iter().map(|s| (s.from_stop, s.to_stop)).collect();
        assert_eq!(pairs, vec![(1, 2), (2, 0)]);
        for s in &r.segments {
            assert!((s.length_m - 0.001 * M_PER_DEG).abs() < 1e-3);
        }
        assert_eq!(r.warnings, 0);
    }

    #[test]
    fn off_line_stop_is_excluded() {
        let off = 60.0 / M_PER_DEG;
        let stops = vec![pt(0.0, 0.0), pt(0.001, off), pt(0.002, 0.0)];
        let r = transit_route_edges(&stops, &[route("1", vec![pt(0.0, 0.0), pt(0.002, 0.0)])], 50.0).unwrap();
        let pairs: Vec<(usize, usize)> = r.segments.iter().map(|s| (s.from_stop, s.to_stop)).collect();
        assert_eq!(pairs, vec![(0, 2)]);
    }

    #[test]
    fn shared_segments_are_deduplicated() {
        let stops = vec![pt(0.0, 0.0), pt(0.001, 0.0), pt(0.001, 0.001)];
        let routes = vec![
            route("1", vec![pt(0.0, 0.0), pt(0.001, 0.0)]),
            route("2", vec![pt(0.001, 0.0), pt(0.0, 0.0)]),
            route("3", vec![pt(0.0, 0.0), pt(0.001, 0.0), pt(0.001, 0.001)]),
        ];
        let r = transit_route_edges(&stops, &routes, 50.0).unwrap();
        assert_eq!(r.segments.len(), 2);
        assert_eq!(r.segments[0].route_id, "1");
        assert_eq!((r.segments[1].from_stop, r.segments[1].to_stop), (1, 2));
    }

    #[test]
    fn routes_with_fewer_than_two_stops_warn() {
        let stops = vec![pt(0.0, 0.0)];
        let r = transit_route_edges(&stops, &[route("1", vec![pt(0.0, 0.0), pt(0.01, 0.0)]), route("2", vec![pt(1.0, 1.0)])], 50.0).unwrap();
        assert!(r.segments.is_empty());
        assert_eq!(r.warnings, 2);
        assert!(transit_route_edges(&stops, &[], -1.0).is_err());
    }
}
