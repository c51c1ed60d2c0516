// SPDX-License-Identifier: Apache-2.0

//! WGS84 points, great-circle distance and area filters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in meters used by every distance computation.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("invalid coordinate (lat {lat}, lon {lon}): must be finite with lat in [-90, 90] and lon in [-180, 180]")]
    OutOfRange { lat: f64, lon: f64 },
    #[error("degenerate area: {0}")]
    DegenerateArea(&'static str),
}

/// A WGS84 position in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawPoint> for GeoPoint {
    type Error = GeoError;
    fn try_from(raw: RawPoint) -> Result<Self, GeoError> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl From<GeoPoint> for RawPoint {
    fn from(p: GeoPoint) -> Self {
        RawPoint { lat: p.lat, lon: p.lon }
    }
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if lat.is_finite() && lon.is_finite() && (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) {
            Ok(GeoPoint { lat, lon })
        } else {
            Err(GeoError::OutOfRange { lat, lon })
        }
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    /// Great-circle distance in meters.
    pub fn distance_m(&self, other: &GeoPoint) -> f64 {
        haversine_m(*self, *other)
    }
}

/// Haversine great-circle distance in meters on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let phi1 = a.lat.to_radians();
    let phi2 = b.lat.to_radians();
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    // clamp guards against h drifting past 1 for antipodal points
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Midpoint of the great-circle segment between `a` and `b`.
pub fn great_circle_midpoint(a: GeoPoint, b: GeoPoint) -> GeoPoint {
    if a == b {
        return a;
    }
    let (phi1, l1) = (a.lat.to_radians(), a.lon.to_radians());
    let (phi2, l2) = (b.lat.to_radians(), b.lon.to_radians());
    let dl = l2 - l1;
    let bx = phi2.cos() * dl.cos();
    let by = phi2.cos() * dl.sin();
    let phi = (phi1.sin() + phi2.sin()).atan2(((phi1.cos() + bx).powi(2) + by * by).sqrt());
    let mut lon = (l1 + by.atan2(phi1.cos() + bx)).to_degrees();
    if lon > 180.0 {
        lon -= 360.0;
    } else if lon < -180.0 {
        lon += 360.0;
    }
    GeoPoint { lat: phi.to_degrees().clamp(-90.0, 90.0), lon: lon.clamp(-180.0, 180.0) }
}

/// A region used to select nodes or edges: a lat/lon box or a simple polygon ring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AreaFilter {
    BoundingBox { south_west: GeoPoint, north_east: GeoPoint },
    Polygon { ring: Vec<GeoPoint> },
}

impl AreaFilter {
    pub fn bbox(south_west: GeoPoint, north_east: GeoPoint) -> Result<Self, GeoError> {
        if south_west.lat >= north_east.lat || south_west.lon >= north_east.lon {
            return Err(GeoError::DegenerateArea("bounding box must have south-west strictly below and left of north-east"));
        }
        Ok(AreaFilter::BoundingBox { south_west, north_east })
    }

    /// Builds a polygon filter. A closing vertex equal to the first one is dropped.
    pub fn polygon(mut ring: Vec<GeoPoint>) -> Result<Self, GeoError> {
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeoError::DegenerateArea("polygon needs at least three distinct vertices"));
        }
        let twice_area: f64 = ring
            .iter()
            .zip(ring.iter().cycle().skip(1))
            .map(|(p, q)| p.lon * q.lat - q.lon * p.lat)
            .sum();
        if twice_area.abs() <= f64::EPSILON {
            return Err(GeoError::DegenerateArea("polygon has zero area"));
        }
        Ok(AreaFilter::Polygon { ring })
    }

    /// Inclusive on the box edges; even-odd rule for polygons (planar in lon/lat).
    pub fn contains(&self, p: GeoPoint) -> bool {
        match self {
            AreaFilter::BoundingBox { south_west, north_east } => {
                p.lat >= south_west.lat && p.lat <= north_east.lat && p.lon >= south_west.lon && p.lon <= north_east.lon
            }
            AreaFilter::Polygon { ring } => {
                let mut inside = false;
                let n = ring.len();
                let mut j = n - 1;
                for i in 0..n {
                    let (xi, yi) = (ring[i].lon, ring[i].lat);
                    let (xj, yj) = (ring[j].lon, ring[j].lat);
                    if (yi > p.lat) != (yj > p.lat) && p.lon < (xj - xi) * (p.lat - yi) / (yj - yi) + xi {
                        inside = !inside;
                    }
                    j = i;
                }
                inside
            }
        }
    }
}

/// Local equirectangular projection to meters around a reference point.
/// Accurate to well under a meter at city scale.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalProjection {
    origin: GeoPoint,
    cos_lat: f64,
}

impl LocalProjection {
    pub(crate) fn new(origin: GeoPoint) -> Self {
        LocalProjection { origin, cos_lat: origin.lat.to_radians().cos() }
    }

    pub(crate) fn project(&self, p: GeoPoint) -> (f64, f64) {
        let x = (p.lon - self.origin.lon).to_radians() * self.cos_lat * EARTH_RADIUS_M;
        let y = (p.lat - self.origin.lat).to_radians() * EARTH_RADIUS_M;
        (x, y)
    }
}
