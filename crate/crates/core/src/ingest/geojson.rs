// SPDX-License-Identifier: Apache-2.0

//! GeoJSON FeatureCollections of POIs, stops and route lines.
//!
//! JSON tokenizing is done by `serde_json`; the GeoJSON structure
//! (RFC 7946, `[lon, lat]` order) is interpreted here.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::IngestError;
use crate::geo::GeoPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub point: GeoPoint,
    pub category: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopRecord {
    pub point: GeoPoint,
    pub stop_id: String,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePolyline {
    pub route_id: String,
    pub points: Vec<GeoPoint>,
}

/// Parsed records plus the number of features skipped for having an
/// unsupported geometry type.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub skipped: usize,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Parsed { records: Vec::new(), skipped: 0 }
    }
}

const CATEGORY_KEYS: [&str; 4] = ["amenity", "shop", "leisure", "tourism"];

pub(crate) fn features(document: &[u8]) -> Result<Vec<Value>, IngestError> {
    let root: Value = serde_json::from_slice(document).map_err(|e| IngestError::Json(e.to_string()))?;
    let obj = root.as_object().ok_or_else(|| IngestError::GeoJson("top level is not an object".into()))?;
    if obj.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(IngestError::GeoJson("top level is not a FeatureCollection".into()));
    }
    match obj.get("features") {
        Some(Value::Array(items)) => Ok(items.clone()),
        _ => Err(IngestError::GeoJson("FeatureCollection without a `features` array".into())),
    }
}

pub(crate) struct Feature<'a> {
    pub geometry_type: &'a str,
    pub coordinates: &'a Value,
    pub properties: Option<&'a Map<String, Value>>,
    pub id: Option<String>,
}

pub(crate) fn feature(index: usize, value: &Value) -> Result<Feature<'_>, IngestError> {
    let bad = |message: &str| IngestError::Feature { index, message: message.to_string() };
    let obj = value.as_object().ok_or_else(|| bad("feature is not an object"))?;
    if obj.get("type").and_then(Value::as_str) != Some("Feature") {
        return Err(bad("object is not a Feature"));
    }
    let geometry = obj.get("geometry").and_then(Value::as_object).ok_or_else(|| bad("feature has no geometry"))?;
    let geometry_type = geometry.get("type").and_then(Value::as_str).ok_or_else(|| bad("geometry has no type"))?;
    let coordinates = geometry.get("coordinates").ok_or_else(|| bad("geometry has no coordinates"))?;
    let properties = obj.get("properties").and_then(Value::as_object);
    let id = obj.get("id").and_then(scalar_string);
    Ok(Feature { geometry_type, coordinates, properties, id })
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

impl Feature<'_> {
    pub(crate) fn property(&self, key: &str) -> Option<String> {
        self.properties.and_then(|p| p.get(key)).and_then(scalar_string)
    }

    pub(crate) fn first_property(&self, keys: &[&str]) -> Option<String> {
        keys.iter().find_map(|k| self.property(k))
    }
}

pub(crate) fn position(index: usize, v: &Value) -> Result<GeoPoint, IngestError> {
    let bad = |message: String| IngestError::Feature { index, message };
    let arr = v.as_array().ok_or_else(|| bad("position is not an array".into()))?;
    if arr.len() < 2 {
        return Err(bad("position needs [lon, lat]".into()));
    }
    let lon = arr[0].as_f64().ok_or_else(|| bad("longitude is not a number".into()))?;
    let lat = arr[1].as_f64().ok_or_else(|| bad("latitude is not a number".into()))?;
    GeoPoint::new(lat, lon).map_err(|e| bad(e.to_string()))
}

pub(crate) fn line(index: usize, v: &Value) -> Result<Vec<GeoPoint>, IngestError> {
    let arr = v.as_array().ok_or_else(|| IngestError::Feature { index, message: "line coordinates are not an array".into() })?;
    let points = arr.iter().map(|p| position(index, p)).collect::<Result<Vec<_>, _>>()?;
    if points.len() < 2 {
        return Err(IngestError::Feature { index, message: format!("line has {} position(s), needs at least 2", points.len()) });
    }
    Ok(points)
}

/// One record per Point feature; other geometries are counted as skipped.
pub fn parse_pois_geojson(document: &[u8]) -> Result<Parsed<PoiRecord>, IngestError> {
    let mut out = Parsed { records: Vec::new(), skipped: 0 };
    for (index, value) in features(document)?.iter().enumerate() {
        let f = feature(index, value)?;
        if f.geometry_type != "Point" {
            out.skipped += 1;
            continue;
        }
        out.records.push(PoiRecord {
            point: position(index, f.coordinates)?,
            category: f.first_property(&CATEGORY_KEYS).unwrap_or_else(|| "unknown".to_string()),
            name: f.property("name"),
        });
    }
    Ok(out)
}

/// Stops from Point features. The id comes from `stop_id`, `id`, the
/// feature id, or the feature index, in that order.
pub fn parse_stops_geojson(document: &[u8]) -> Result<Parsed<StopRecord>, IngestError> {
    let mut out = Parsed { records: Vec::new(), skipped: 0 };
    let mut seen = BTreeSet::new();
    for (index, value) in features(document)?.iter().enumerate() {
        let f = feature(index, value)?;
        if f.geometry_type != "Point" {
            out.skipped += 1;
            continue;
        }
        let stop_id = f.first_property(&["stop_id", "id"]).or_else(|| f.id.clone()).unwrap_or_else(|| index.to_string());
        if !seen.insert(stop_id.clone()) {
            return Err(IngestError::DuplicateId { index, id: stop_id });
        }
        out.records.push(StopRecord {
            point: position(index, f.coordinates)?,
            stop_id,
            name: f.first_property(&["name", "stop_name"]),
        });
    }
    Ok(out)
}

/// Route lines from LineString and MultiLineString features. Each part of
/// a MultiLineString becomes its own polyline with `:<part>` appended to
/// the route id.
pub fn parse_routes_geojson(document: &[u8]) -> Result<Parsed<RoutePolyline>, IngestError> {
    let mut out = Parsed { records: Vec::new(), skipped: 0 };
    let mut seen = BTreeSet::new();
    for (index, value) in features(document)?.iter().enumerate() {
        let f = feature(index, value)?;
        let route_id = f.first_property(&["route_id", "id"]).or_else(|| f.id.clone()).unwrap_or_else(|| index.to_string());
        let parts: Vec<(String, Vec<GeoPoint>)> = match f.geometry_type {
            "LineString" => vec![(route_id, line(index, f.coordinates)?)],
            "MultiLineString" => {
                let arr = f
                    .coordinates
                    .as_array()
                    .ok_or_else(|| IngestError::Feature { index, message: "MultiLineString coordinates are not an array".into() })?;
                arr.iter().enumerate().map(|(part, c)| Ok((format!("{route_id}:{part}"), line(index, c)?))).collect::<Result<_, IngestError>>()?
            }
            _ => {
                out.skipped += 1;
                continue;
            }
        };
        for (id, points) in parts {
            if !seen.insert(id.clone()) {
                return Err(IngestError::DuplicateId { index, id });
            }
            out.records.push(RoutePolyline { route_id: id, points });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn poi_category_and_geometry_filter() {
        let doc = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[-117.23,32.88]},"properties":{"amenity":"cafe","name":"Bean"}},
            {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]},"properties":{}},
            {"type":"Feature","geometry":{"type":"Point","coordinates":[-117.2,32.9]},"properties":null}
        ]}"#;
        let parsed = parse_pois_geojson(doc).unwrap();
        assert_eq!(parsed.skipped, 1);
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.records[0].category, "cafe");
        assert_eq!(parsed.records[0].point.lat(), 32.88);
        assert_eq!(parsed.records[1].category, "unknown");
    }

    #[test]
    fn category_precedence() {
        let doc = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{"tourism":"museum","shop":"books"}}]}"#;
        assert_eq!(parse_pois_geojson(doc).unwrap().records[0].category, "books");
    }

    #[test]
    fn empty_collection() {
        let parsed = parse_pois_geojson(br#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        assert!(parsed.records.is_empty());
    }

    #[test]
    fn invalid_documents() {
        assert!(matches!(parse_pois_geojson(b"{not json"), Err(IngestError::Json(_))));
        assert!(matches!(parse_pois_geojson(br#"{"type":"Feature"}"#), Err(IngestError::GeoJson(_))));
        let doc = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]},"properties":{}},
            {"type":"Feature","geometry":{"type":"Point","coordinates":[200,0]},"properties":{}}]}"#;
        assert!(matches!(parse_pois_geojson(doc), Err(IngestError::Feature { index: 1, .. })));
    }

    #[test]
    fn routes_split_and_validate() {
        let doc = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[0,1],[0,2],[0,3]]},"properties":{"route_id":"30"}},
            {"type":"Feature","geometry":{"type":"MultiLineString","coordinates":[[[1,0],[1,1]],[[2,0],[2,1]]]},"properties":{"route_id":"201"}}]}"#;
        let parsed = parse_routes_geojson(doc).unwrap();
        assert_eq!(parsed.records.len(), 3);
        assert_eq!(parsed.records[0].points.len(), 4);
        assert_eq!(parsed.records[1].route_id, "201:0");
        assert_eq!(parsed.records[2].route_id, "201:1");

        let degenerate = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0]]},"properties":{}}]}"#;
        assert!(matches!(parse_routes_geojson(degenerate), Err(IngestError::Feature { index: 0, .. })));
    }

    #[test]
    fn stop_ids_unique() {
        let doc = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","id":7,"geometry":{"type":"Point","coordinates":[0,0]},"properties":{"name":"A"}},
            {"type":"Feature","geometry":{"type":"Point","coordinates":[0,0.001]},"properties":{"stop_id":"7"}}]}"#;
        assert!(matches!(parse_stops_geojson(doc), Err(IngestError::DuplicateId { index: 1, .. })));
        let ok = br#"{"type":"FeatureCollection","features":[
            {"type":"Feature","id":7,"geometry":{"type":"Point","coordinates":[0,0]},"properties":{"stop_name":"A"}}]}"#;
        let stops = parse_stops_geojson(ok).unwrap().records;
        assert_eq!(stops[0].stop_id, "7");
        assert_eq!(stops[0].name.as_deref(), Some("A"));
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            let _ = parse_pois_geojson(&bytes);
            let _ = parse_stops_geojson(&bytes);
            let _ = parse_routes_geojson(&bytes);
        }
    }
}
