// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::xml::{XmlEvent, XmlReader};
use super::IngestError;
use crate::geo::{haversine_m, GeoPoint};
use crate::graph::{EdgeKind, LayerId, MultilayerGraph, NetEdge, NetNode, NodeId, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Drive,
    Walk,
    Bike,
}

impl Profile {
    pub fn layer(&self) -> LayerId {
        match self {
            Profile::Drive => LayerId::Drive,
            Profile::Walk => LayerId::Walk,
            Profile::Bike => LayerId::Bike,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "drive" => Ok(Profile::Drive),
            "walk" => Ok(Profile::Walk),
            "bike" => Ok(Profile::Bike),
            other => Err(format!("unknown profile `{other}` (expected drive, walk or bike)")),
        }
    }
}

const DRIVE_CLASSES: &[&str] = &[
    "motorway",
    "motorway_link",
    "trunk",
    "trunk_link",
    "primary",
    "primary_link",
    "secondary",
    "secondary_link",
    "tertiary",
    "tertiary_link",
    "unclassified",
    "residential",
    "service",
];

const WALK_EXTRA: &[&str] = &["footway", "path", "pedestrian", "steps", "living_street", "track"];

const BIKE_CLASSES: &[&str] = &["cycleway", "path", "residential", "tertiary", "secondary", "service", "track", "unclassified"];

/// Which ways a street layer keeps and whether `oneway` is honoured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighwayProfile {
    pub profile: Profile,
    pub whitelist: BTreeSet<String>,
    pub respect_oneway: bool,
}

impl HighwayProfile {
    pub fn drive() -> Self {
        HighwayProfile { profile: Profile::Drive, whitelist: DRIVE_CLASSES.iter().map(|s| s.to_string()).collect(), respect_oneway: true }
    }

    /// Pedestrian classes plus every drive class except motorways.
    pub fn walk() -> Self {
        let whitelist = DRIVE_CLASSES
            .iter()
            .chain(WALK_EXTRA)
            .filter(|c| !c.starts_with("motorway"))
            .map(|s| s.to_string())
            .collect();
        HighwayProfile { profile: Profile::Walk, whitelist, respect_oneway: false }
    }

    pub fn bike() -> Self {
        HighwayProfile { profile: Profile::Bike, whitelist: BIKE_CLASSES.iter().map(|s| s.to_string()).collect(), respect_oneway: false }
    }

    pub fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Drive => Self::drive(),
            Profile::Walk => Self::walk(),
            Profile::Bike => Self::bike(),
        }
    }

    pub fn allows(&self, highway: &str) -> bool {
        self.whitelist.contains(highway)
    }
}

struct RawWay {
    id: i64,
    refs: Vec<i64>,
    highway: Option<String>,
    oneway: Option<String>,
}

fn attr<'a>(attrs: &'a [(&str, String)], key: &str) -> Option<&'a str> {
    attrs.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
}

fn required<'a>(attrs: &'a [(&str, String)], key: &str, element: &str, offset: usize) -> Result<&'a str, IngestError> {
    attr(attrs, key).ok_or_else(|| IngestError::Osm { offset, message: format!("<{element}> without `{key}` attribute") })
}

fn number<T: std::str::FromStr>(raw: &str, what: &str, offset: usize) -> Result<T, IngestError> {
    raw.trim().parse().map_err(|_| IngestError::Osm { offset, message: format!("invalid {what} `{raw}`") })
}

/// Parses the `node`/`way`/`nd`/`tag` subset of an OSM XML document into a
/// street layer for `profile`. Relations and all other elements are ignored.
pub fn parse_osm_xml(document: &[u8], profile: &HighwayProfile) -> Result<MultilayerGraph, IngestError> {
    let mut reader = XmlReader::new(document);
    let mut nodes: HashMap<i64, GeoPoint> = HashMap::new();
    let mut node_order: Vec<i64> = Vec::new();
    let mut ways: Vec<RawWay> = Vec::new();
    let mut current_way: Option<RawWay> = None;
    let mut depth = 0usize;

    while let Some(event) = reader.next_event()? {
        match event {
            XmlEvent::Start { name, attrs, offset } => {
                depth += 1;
                match name {
                    "node" if depth == 2 => {
                        let id: i64 = number(required(&attrs, "id", "node", offset)?, "node id", offset)?;
                        let lat: f64 = number(required(&attrs, "lat", "node", offset)?, "latitude", offset)?;
                        let lon: f64 = number(required(&attrs, "lon", "node", offset)?, "longitude", offset)?;
                        let point = GeoPoint::new(lat, lon).map_err(|e| IngestError::Osm { offset, message: format!("node {id}: {e}") })?;
                        if nodes.insert(id, point).is_some() {
                            return Err(IngestError::Osm { offset, message: format!("duplicate node id {id}") });
                        }
                        node_order.push(id);
                    }
                    "way" if depth == 2 => {
                        let id: i64 = number(required(&attrs, "id", "way", offset)?, "way id", offset)?;
                        current_way = Some(RawWay { id, refs: Vec::new(), highway: None, oneway: None });
                    }
                    "nd" if depth == 3 => {
                        if let Some(way) = current_way.as_mut() {
                            way.refs.push(number(required(&attrs, "ref", "nd", offset)?, "node reference", offset)?);
                        }
                    }
                    "tag" if depth == 3 => {
                        if let Some(way) = current_way.as_mut() {
                            let k = required(&attrs, "k", "tag", offset)?;
                            let v = required(&attrs, "v", "tag", offset)?;
                            match k {
                                "highway" => way.highway = Some(v.to_string()),
                                "oneway" => way.oneway = Some(v.to_string()),
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
            }
            XmlEvent::End { name } => {
                if name == "way" && depth == 2 {
                    if let Some(way) = current_way.take() {
                        ways.push(way);
                    }
                }
                depth -= 1;
            }
        }
    }

    let layer = profile.profile.layer();
    let mut segments: Vec<(i64, i64, String)> = Vec::new();
    for way in &ways {
        for r in &way.refs {
            if !nodes.contains_key(r) {
                return Err(IngestError::UndeclaredNode { way: way.id, node: *r });
            }
        }
        let Some(highway) = way.highway.as_deref().filter(|h| profile.allows(h)) else { continue };
        let direction = if profile.respect_oneway {
            match way.oneway.as_deref() {
                Some("yes" | "true" | "1") => Direction::Forward,
                Some("-1" | "reverse") => Direction::Backward,
                _ => Direction::Both,
            }
        } else {
            Direction::Both
        };
        for pair in way.refs.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if matches!(direction, Direction::Forward | Direction::Both) {
                segments.push((a, b, highway.to_string()));
            }
            if matches!(direction, Direction::Backward | Direction::Both) {
                segments.push((b, a, highway.to_string()));
            }
        }
    }

    let used: BTreeSet<i64> = segments.iter().flat_map(|(a, b, _)| [*a, *b]).collect();
    let mut g = MultilayerGraph::new();
    for id in node_order.into_iter().filter(|id| used.contains(id)) {
        g.add_node(NetNode::new(NodeId(id), nodes[&id], layer, NodeKind::Intersection))?;
    }
    for (a, b, highway) in segments {
        let length = haversine_m(nodes[&a], nodes[&b]);
        let mut edge = NetEdge::new(NodeId(a), NodeId(b), layer, EdgeKind::Street, length);
        edge.highway = Some(highway);
        g.add_edge(edge)?;
    }
    Ok(g)
}

enum Direction {
    Forward,
    Backward,
    Both,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(tags: &str) -> String {
        format!(
            r#"<?xml version="1.0" encoding="UTF-8"?>
<osm version="0.6">
  <node id="1" lat="32.8800" lon="-117.2340"/>
  <node id="2" lat="32.8810" lon="-117.2340"/>
  <node id="3" lat="32.9000" lon="-117.2000"/>
  <way id="10">
    <nd ref="1"/>
    <nd ref="2"/>
    {tags}
  </way>
  <relation id="5"><member type="way" ref="10" role=""/></relation>
</osm>"#
        )
    }

    #[test]
    fn residential_way_is_bidirectional_for_drive() {
        let g = parse_osm_xml(doc(r#"<tag k="highway" v="residential"/>"#).as_bytes(), &HighwayProfile::drive()).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 2));
        let e = &g.edges()[0];
        assert_eq!(e.highway.as_deref(), Some("residential"));
        let expected = haversine_m(GeoPoint::new(32.88, -117.234).unwrap(), GeoPoint::new(32.881, -117.234).unwrap());
        assert_eq!(e.length_m, expected);
        assert!(!g.contains_node(NodeId(3)));
    }

    #[test]
    fn oneway_emits_single_edge() {
        let tags = r#"<tag k="highway" v="residential"/><tag k="oneway" v="yes"/>"#;
        let g = parse_osm_xml(doc(tags).as_bytes(), &HighwayProfile::drive()).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!((g.edges()[0].from, g.edges()[0].to), (NodeId(1), NodeId(2)));
        // walk ignores oneway
        let g = parse_osm_xml(doc(tags).as_bytes(), &HighwayProfile::walk()).unwrap();
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn whitelist_filters_ways() {
        let g = parse_osm_xml(doc(r#"<tag k="highway" v="footway"/>"#).as_bytes(), &HighwayProfile::drive()).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (0, 0));
        let g = parse_osm_xml(doc(r#"<tag k="highway" v="footway"/>"#).as_bytes(), &HighwayProfile::walk()).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(!HighwayProfile::walk().allows("motorway"));
        assert!(HighwayProfile::walk().allows("primary"));
    }

    #[test]
    fn undeclared_node_is_named() {
        let src = r#"<osm><node id="1" lat="0" lon="0"/><way id="7"><nd ref="1"/><nd ref="99"/><tag k="highway" v="path"/></way></osm>"#;
        let err = parse_osm_xml(src.as_bytes(), &HighwayProfile::walk()).unwrap_err();
        assert_eq!(err, IngestError::UndeclaredNode { way: 7, node: 99 });
    }

    #[test]
    fn malformed_xml_carries_offset() {
        let err = parse_osm_xml(b"<osm><node id=\"1\" lat=\"0\" lon=\"0\"></osm>", &HighwayProfile::walk()).unwrap_err();
        assert!(matches!(err, IngestError::Xml(ref e) if e.offset == 34), "{err:?}");
        let err = parse_osm_xml(b"<osm><node id=\"1\" lat=\"95\" lon=\"0\"/></osm>", &HighwayProfile::walk()).unwrap_err();
        assert!(matches!(err, IngestError::Osm { offset: 5, .. }));
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
            let _ = parse_osm_xml(&bytes, &HighwayProfile::drive());
        }

        #[test]
        fn retained_edges_respect_whitelist(class in prop::sample::select(vec!["motorway", "footway", "cycleway", "residential", "steps", "track", "bus_stop"])) {
            let tags = format!(r#"<tag k="highway" v="{class}"/>"#);
            for profile in [HighwayProfile::drive(), HighwayProfile::walk(), HighwayProfile::bike()] {
                let g = parse_osm_xml(doc(&tags).as_bytes(), &profile).unwrap();
                for e in g.edges() {
                    prop_assert!(profile.allows(e.highway.as_deref().unwrap()));
                }
                prop_assert_eq!(g.edge_count() > 0, profile.allows(class));
            }
        }
    }
}
