// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{check_positive, MultilayerError};
use crate::geo::GeoPoint;
use crate::spatial::GridIndex;

/// A POI joined to its nearest stop. Indices refer to the input slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoiLink {
    pub poi: usize,
    pub stop: usize,
    pub distance_m: f64,
}

/// Links each POI to its nearest stop when that stop is within `radius_m`
/// (inclusive). Ties go to the lowest stop index. Output is in POI order.
pub fn link_pois_to_stops(pois: &[GeoPoint], stops: &[GeoPoint], radius_m: f64) -> Result<Vec<PoiLink>, MultilayerError> {
    check_positive("link radius", radius_m)?;
    if stops.is_empty() || pois.is_empty() {
        return Ok(Vec::new());
    }
    let max_lat = pois.iter().map(|p| p.lat().abs()).fold(0.0, f64::max);
    let index = GridIndex::new(stops, radius_m, max_lat);
    let nearest = crate::par::map_slice(pois, |p| index.nearest_within(*p, radius_m));
    Ok(nearest
        .into_iter()
        .enumerate()
        .filter_map(|(poi, hit)| hit.map(|(stop, distance_m)| PoiLink { poi, stop, distance_m }))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::haversine_m;

    /// Point `meters` north of `p`.
    fn north(p: GeoPoint, meters: f64) -> GeoPoint {
        GeoPoint::new(p.lat() + (meters / crate::geo::EARTH_RADIUS_M).to_degrees(), p.lon()).unwrap()
    }

    #[test]
    fn picks_nearest_within_radius() {
        let poi = GeoPoint::new(10.0, 20.0).unwrap();
        let a = north(poi, 100.0);
        let b = north(poi, -600.0);
        let links = link_pois_to_stops(&[poi], &[b, a], 500.0).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].stop, 1);
        assert!((links[0].distance_m - 100.0).abs() < 1e-6);
    }

    #[test]
    fn only_the_nearest_of_several() {
        let poi = GeoPoint::new(10.0, 20.0).unwrap();
        let links = link_pois_to_stops(&[poi], &[north(poi, 300.0), north(poi, -200.0)], 500.0).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].stop, 1);
    }

    #[test]
    fn beyond_radius_is_isolated() {
        let poi = GeoPoint::new(10.0, 20.0).unwrap();
        let stop = north(poi, 501.0);
        assert!(haversine_m(poi, stop) > 500.0);
        assert!(link_pois_to_stops(&[poi], &[stop], 500.0).unwrap().is_empty());
        assert!(link_pois_to_stops(&[poi], &[], 500.0).unwrap().is_empty());
    }

    #[test]
    fn equidistant_stops_go_to_lowest_index() {
        let poi = GeoPoint::new(0.0, 0.0).unwrap();
        let links = link_pois_to_stops(&[poi], &[north(poi, 50.0), north(poi, -50.0)], 500.0).unwrap();
        assert_eq!(links[0].stop, 0);
    }

    #[test]
    fn rejects_non_positive_radius() {
        assert!(link_pois_to_stops(&[], &[], 0.0).is_err());
    }
}
