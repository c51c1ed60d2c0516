// SPDX-License-Identifier: Apache-2.0

//! GeoJSON and CSV renderings of graphs and analysis results.
//!
//! Floats are rounded to 9 significant digits. Object keys come out sorted,
//! so equal inputs give byte-identical text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::centrality::{EdgeCentralityMap, NodeCentralityMap};
use crate::communities::CommunityAssignment;
use crate::geo::GeoPoint;
use crate::graph::{EdgeKind, LayerId, MultilayerGraph, NetEdge, NetNode, NodeId, NodeKind};
use crate::ingest::{feature, features, line, position, IngestError};
use crate::multilayer::PoiTransitNetwork;
use crate::routing::{RouteComparison, RouteResult};

/// `x` rounded to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(sig9(x)).map_or(Value::Null, Value::Number)
}

fn coord(p: GeoPoint) -> Value {
    json!([num(p.lon()), num(p.lat())])
}

fn feature_value(geometry: Value, properties: Map<String, Value>) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

fn collection(features: Vec<Value>, extra: Map<String, Value>) -> Value {
    let mut obj = extra;
    obj.insert("type".into(), "FeatureCollection".into());
    obj.insert("features".into(), Value::Array(features));
    Value::Object(obj)
}

fn line_string(points: impl IntoIterator<Item = GeoPoint>) -> Value {
    json!({ "type": "LineString", "coordinates": points.into_iter().map(coord).collect::<Vec<_>>() })
}

fn point(p: GeoPoint) -> Value {
    json!({ "type": "Point", "coordinates": coord(p) })
}

fn props(pairs: impl IntoIterator<Item = (&'static str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Rounds every float inside `v` to 9 significant digits. Integers are kept.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// Pretty JSON text with a trailing newline.
pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// One LineString per edge carrying its centrality value.
pub fn heatmap_geojson(map: &EdgeCentralityMap) -> Value {
    let features = map
        .entries
        .iter()
        .map(|e| {
            let p = props([
                ("from", json!(e.key.from)),
                ("to", json!(e.key.to)),
                ("key", json!(e.key.key)),
                ("value", num(e.value)),
            ]);
            feature_value(line_string([e.from_point, e.to_point]), p)
        })
        .collect();
    let meta = props([
        ("metric", json!(map.metric)),
        ("provenance", json!(map.provenance)),
        ("normalized", json!(map.normalized)),
    ]);
    collection(features, meta)
}

/// `node_id,lat,lon,value` rows in node id order.
pub fn node_centrality_csv(map: &NodeCentralityMap, g: &MultilayerGraph) -> String {
    let mut out = String::from("node_id,lat,lon,value\n");
    for (id, v) in &map.values {
        let p = g.node(*id).map(|n| n.point);
        let (lat, lon) = p.map_or((f64::NAN, f64::NAN), |p| (p.lat(), p.lon()));
        writeln!(out, "{id},{},{},{}", sig9(lat), sig9(lon), sig9(*v)).expect("writing to a String");
    }
    out
}

fn route_feature(r: &RouteResult, g: &MultilayerGraph) -> Value {
    let points = r.nodes.iter().filter_map(|id| g.node(*id).map(|n| n.point));
    let p = props([
        ("objective", json!(r.objective.name())),
        ("cost", num(r.cost)),
        ("length_m", num(r.length_m)),
        ("travel_time_s", r.travel_time_s.map_or(Value::Null, num)),
        ("nodes", json!(r.nodes)),
    ]);
    let geometry = if r.nodes.len() == 1 { point(g.node(r.nodes[0]).expect("route nodes exist").point) } else { line_string(points) };
    feature_value(geometry, p)
}

pub fn route_geojson(r: &RouteResult, g: &MultilayerGraph) -> Value {
    collection(vec![route_feature(r, g)], Map::new())
}

pub fn route_comparison_geojson(c: &RouteComparison, g: &MultilayerGraph) -> Value {
    let features = vec![route_feature(&c.by_distance, g), route_feature(&c.by_time, g)];
    collection(features, props([("overlap", num(c.overlap))]))
}

/// Point per node with its community label.
pub fn communities_geojson(a: &CommunityAssignment, g: &MultilayerGraph) -> Value {
    let features = a
        .communities
        .iter()
        .filter_map(|(id, c)| g.node(*id).map(|n| feature_value(point(n.point), props([("id", json!(id)), ("community", json!(c))]))))
        .collect();
    let meta = props([
        ("gamma", num(a.gamma)),
        ("modularity", num(a.modularity)),
        ("seed", json!(a.seed)),
        ("weight", json!(a.weight.as_str())),
        ("community_count", json!(a.community_count())),
    ]);
    collection(features, meta)
}

/// POI-to-stop links as LineStrings.
pub fn links_geojson(net: &PoiTransitNetwork) -> Value {
    let features = net
        .links
        .iter()
        .map(|l| {
            let poi = net.graph.node(net.poi_nodes[l.poi]).expect("linked POI exists");
            let stop = net.graph.node(net.stop_nodes[l.stop]).expect("linked stop exists");
            let p = props([("poi", json!(poi.id)), ("stop", json!(stop.id)), ("distance_m", num(l.distance_m))]);
            feature_value(line_string([poi.point, stop.point]), p)
        })
        .collect();
    collection(features, Map::new())
}

/// Nodes as Points, then edges as LineStrings, each tagged with layer and kind.
pub fn graph_geojson(g: &MultilayerGraph) -> Value {
    let mut features = Vec::with_capacity(g.node_count() + g.edge_count());
    for n in g.nodes() {
        let mut p = props([("id", json!(n.id)), ("layer", json!(n.layer)), ("kind", json!(n.kind))]);
        if !n.tags.is_empty() {
            p.insert("tags".into(), json!(n.tags));
        }
        features.push(feature_value(point(n.point), p));
    }
    for e in g.edges() {
        let a = g.node(e.from).expect("edge endpoints exist").point;
        let b = g.node(e.to).expect("edge endpoints exist").point;
        let mut p = props([
            ("from", json!(e.from)),
            ("to", json!(e.to)),
            ("key", json!(e.key)),
            ("layer", json!(e.layer)),
            ("kind", json!(e.kind)),
            ("length_m", num(e.length_m)),
        ]);
        if let Some(s) = e.speed_mps {
            p.insert("speed_mps".into(), num(s));
        }
        if let Some(t) = e.travel_time_s {
            p.insert("travel_time_s".into(), num(t));
        }
        if let Some(h) = &e.highway {
            p.insert("highway".into(), json!(h));
        }
        if !e.attrs.is_empty() {
            let attrs: Map<String, Value> = e.attrs.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
            p.insert("attrs".into(), Value::Object(attrs));
        }
        features.push(feature_value(line_string([a, b]), p));
    }
    collection(features, Map::new())
}

/// Reads a document written by [`graph_geojson`].
pub fn parse_graph_geojson(document: &[u8]) -> Result<MultilayerGraph, IngestError> {
    let items = features(document)?;
    let mut g = MultilayerGraph::new();
    let mut edges = Vec::new();
    for (index, item) in items.iter().enumerate() {
        let f = feature(index, item)?;
        let bad = |message: String| IngestError::Feature { index, message };
        let p = f.properties.ok_or_else(|| bad("feature has no properties".into()))?;
        let get = |k: &str| p.get(k).cloned().ok_or_else(|| bad(format!("missing property {k}")));
        match f.geometry_type {
            "Point" => {
                let id: NodeId = from_value(get("id")?, index)?;
                let layer: LayerId = from_value(get("layer")?, index)?;
                let kind: NodeKind = from_value(get("kind")?, index)?;
                let mut node = NetNode::new(id, position(index, f.coordinates)?, layer, kind);
                if let Some(tags) = p.get("tags") {
                    node.tags = from_value::<BTreeMap<String, String>>(tags.clone(), index)?;
                }
                g.add_node(node)?;
            }
            "LineString" => {
                line(index, f.coordinates)?;
                edges.push((index, p));
            }
            other => return Err(bad(format!("unexpected geometry {other}"))),
        }
    }
    for (index, p) in edges {
        let field = |k: &str| p.get(k).cloned().ok_or_else(|| IngestError::Feature { index, message: format!("missing property {k}") });
        let number = |k: &str| p.get(k).and_then(Value::as_f64);
        let kind: EdgeKind = from_value(field("kind")?, index)?;
        let mut edge = NetEdge::new(
            from_value(field("from")?, index)?,
            from_value(field("to")?, index)?,
            from_value(field("layer")?, index)?,
            kind,
            number("length_m").ok_or_else(|| IngestError::Feature { index, message: "length_m is not a number".into() })?,
        );
        edge.key = from_value(field("key")?, index)?;
        edge.speed_mps = number("speed_mps");
        edge.travel_time_s = number("travel_time_s");
        edge.highway = p.get("highway").and_then(Value::as_str).map(str::to_string);
        if let Some(attrs) = p.get("attrs") {
            edge.attrs = from_value(attrs.clone(), index)?;
        }
        g.add_edge_with_key(edge)?;
    }
    Ok(g)
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, index: usize) -> Result<T, IngestError> {
    serde_json::from_value(v).map_err(|e| IngestError::Feature { index, message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn round_floats_leaves_integers_alone() {
        let v = round_floats(json!({"a": [1, 2.123456789123], "b": {"c": 7}}));
        assert_eq!(v, json!({"a": [1, 2.12345679], "b": {"c": 7}}));
    }

    #[test]
    fn sig9_rounds_to_nine_digits() {
        assert_eq!(sig9(123.456_789_123_4), 123.456_789);
        assert_eq!(sig9(-0.000_123_456_789_99), -0.000_123_456_79);
        assert_eq!(sig9(0.0), 0.0);
        assert_eq!(sig9(1e300), 1e300);
    }

    fn sample() -> MultilayerGraph {
        let mut g = MultilayerGraph::new();
        g.add_node(NetNode::new(NodeId(1), pt(32.7, -117.16), LayerId::Transit, NodeKind::Stop)).unwrap();
        let mut poi = NetNode::new(NodeId(2), pt(32.701, -117.161), LayerId::Poi, NodeKind::Poi);
        poi.tags.insert("category".into(), "cafe".into());
        g.add_node(poi).unwrap();
        g.add_node(NetNode::new(NodeId(3), pt(32.702, -117.16), LayerId::Walk, NodeKind::Intersection)).unwrap();
        g.add_edge(NetEdge::new(NodeId(2), NodeId(1), LayerId::Poi, EdgeKind::Interlayer, 141.2).with_speed(1.4)).unwrap();
        let mut street = NetEdge::new(NodeId(3), NodeId(3), LayerId::Walk, EdgeKind::Street, 30.0).with_time(21.0);
        street.highway = Some("footway".into());
        street.attrs.insert("lanes".into(), 1.0);
        g.add_edge(street.clone()).unwrap();
        g.add_edge(street).unwrap();
        g
    }

    #[test]
    fn graph_round_trips_through_geojson() {
        let g = sample();
        let text = to_json_text(&graph_geojson(&g));
        let back = parse_graph_geojson(text.as_bytes()).unwrap();
        assert_eq!(back.node_count(), g.node_count());
        assert_eq!(back.edge_count(), g.edge_count());
        for (a, b) in g.nodes().iter().zip(back.nodes()) {
            assert_eq!((a.id, a.layer, a.kind, &a.tags), (b.id, b.layer, b.kind, &b.tags));
            assert!((a.point.lat() - b.point.lat()).abs() < 1e-6);
        }
        for (a, b) in g.edges().iter().zip(back.edges()) {
            assert_eq!((a.edge_key(), a.layer, a.kind, &a.highway, &a.attrs), (b.edge_key(), b.layer, b.kind, &b.highway, &b.attrs));
            assert_eq!(sig9(a.length_m), b.length_m);
            assert_eq!(a.travel_time_s.map(sig9), b.travel_time_s);
        }
        back.check_invariants().unwrap();
        assert_eq!(to_json_text(&graph_geojson(&back)), text);
    }

    #[test]
    fn malformed_graph_documents_are_rejected() {
        assert!(parse_graph_geojson(b"{}").is_err());
        let no_props = br#"{"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]}}]}"#;
        assert!(matches!(parse_graph_geojson(no_props), Err(IngestError::Feature { index: 0, .. })));
    }

    #[test]
    fn csv_lists_nodes_in_id_order() {
        let g = sample();
        let m = NodeCentralityMap {
            metric: crate::centrality::Metric::Degree,
            normalized: true,
            values: [(NodeId(2), 0.5), (NodeId(1), 0.25)].into_iter().collect(),
        };
        let csv = node_centrality_csv(&m, &g);
        assert_eq!(csv, "node_id,lat,lon,value\n1,32.7,-117.16,0.25\n2,32.701,-117.161,0.5\n");
    }
}
