// SPDX-License-Identifier: Apache-2.0

//! Uniform-cell lat/lon grid for radius queries.
//!
//! Cells are `dlat x dlon` degrees where both spans are chosen so that any
//! two points within `radius` meters lie in the same or adjacent cells. The
//! longitude span uses the largest absolute latitude among the indexed points
//! and the query points, so queries must stay within that latitude band.

use std::collections::HashMap;

use crate::geo::{haversine_m, GeoPoint, EARTH_RADIUS_M};

#[derive(Debug, Clone)]
pub struct GridIndex {
    radius_m: f64,
    dlat: f64,
    dlon: f64,
    lon_columns: i64,
    max_abs_lat: f64,
    points: Vec<GeoPoint>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl GridIndex {
    /// Indexes `points` for queries of at most `radius_m` whose query points
    /// have |lat| ≤ `query_max_abs_lat`.
    pub fn new(points: &[GeoPoint], radius_m: f64, query_max_abs_lat: f64) -> Self {
        assert!(radius_m > 0.0 && radius_m.is_finite(), "grid radius must be positive");
        let max_abs_lat = points.iter().map(|p| p.lat().abs()).fold(query_max_abs_lat.abs(), f64::max).min(90.0);
        let angle = radius_m / EARTH_RADIUS_M;
        let dlat = angle.to_degrees().min(180.0);
        // hav(dlon) <= hav(r/R) / cos^2(lat_max) bounds the longitude gap of any pair within r
        let cos_max = max_abs_lat.to_radians().cos();
        let ratio = if cos_max > 0.0 { (angle / 2.0).sin() / cos_max } else { f64::INFINITY };
        let dlon = if ratio >= 1.0 { 360.0 } else { (2.0 * ratio.asin()).to_degrees() };
        let lon_columns = ((360.0 / dlon).ceil() as i64).max(1);
        let dlon = 360.0 / lon_columns as f64;
        let mut index = GridIndex {
            radius_m,
            dlat,
            dlon,
            lon_columns,
            max_abs_lat,
            points: points.to_vec(),
            cells: HashMap::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let cell = index.cell_of(*p);
            index.cells.entry(cell).or_default().push(i);
        }
        index
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    fn cell_of(&self, p: GeoPoint) -> (i64, i64) {
        let row = ((p.lat() + 90.0) / self.dlat).floor() as i64;
        let col = (((p.lon() + 180.0) / self.dlon).floor() as i64).rem_euclid(self.lon_columns);
        (row, col)
    }

    fn neighbour_cells(&self, p: GeoPoint) -> Vec<(i64, i64)> {
        let (row, col) = self.cell_of(p);
        let mut cols: Vec<i64> = (-1..=1).map(|d| (col + d).rem_euclid(self.lon_columns)).collect();
        cols.sort_unstable();
        cols.dedup();
        let mut out = Vec::with_capacity(9);
        for r in row - 1..=row + 1 {
            for &c in &cols {
                out.push((r, c));
            }
        }
        out
    }

    /// Indices and distances of points within `radius` (inclusive), sorted by
    /// (distance, index). `radius` must not exceed the build radius.
    pub fn within(&self, p: GeoPoint, radius: f64) -> Vec<(usize, f64)> {
        debug_assert!(radius <= self.radius_m);
        debug_assert!(p.lat().abs() <= self.max_abs_lat + 1e-9 || self.dlon >= 360.0);
        let mut hits = Vec::new();
        for cell in self.neighbour_cells(p) {
            if let Some(members) = self.cells.get(&cell) {
                for &i in members {
                    let d = haversine_m(p, self.points[i]);
                    if d <= radius {
                        hits.push((i, d));
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        hits
    }

    /// Nearest point within `radius` (inclusive); ties go to the smallest index.
    pub fn nearest_within(&self, p: GeoPoint, radius: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for cell in self.neighbour_cells(p) {
            if let Some(members) = self.cells.get(&cell) {
                for &i in members {
                    let d = haversine_m(p, self.points[i]);
                    if d > radius {
                        continue;
                    }
                    best = match best {
                        Some((bi, bd)) if bd < d || (bd == d && bi < i) => Some((bi, bd)),
                        _ => Some((i, d)),
                    };
                }
            }
        }
        best
    }
}
