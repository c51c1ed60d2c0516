// SPDX-License-Identifier: Apache-2.0

//! The POI–transit network and the analyses built on top of it: linking,
//! route edges, layer merges, bus-time graphs, the accessibility report and
//! the walkability score.

mod bus;
mod link;
mod merge;
mod stats;
mod transit;
mod walkability;

use thiserror::Error;

pub use self::bus::{bus_time_graph, StopTimetable, MIN_BUS_TIME_S};
pub use self::link::{link_pois_to_stops, PoiLink};
pub use self::merge::{merge_nearby_stops, merge_walk_priority, MergeSummary};
pub use self::stats::{network_stats, AccessibilityReport, ReportInputs};
pub use self::transit::{transit_route_edges, RouteSegment, TransitEdges};
pub use self::walkability::{walkability_score, Walkability, WalkabilityScore};

use crate::centrality::CentralityError;
use crate::geo::GeoPoint;
use crate::graph::{EdgeKind, GraphError, LayerId, MultilayerGraph, NetEdge, NetNode, NodeId, NodeKind};
use crate::ingest::{PoiRecord, RoutePolyline, StopRecord, WALK_SPEED_MPS};

pub const DEFAULT_LINK_RADIUS_M: f64 = 500.0;
pub const DEFAULT_SNAP_TOLERANCE_M: f64 = 50.0;
pub const DEFAULT_TRANSFER_THRESHOLD_M: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MultilayerError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("edge {0} has no travel_time_s")]
    UnannotatedEdge(crate::graph::EdgeKey),
    #[error("route {route}: arrival at position {position} ({minute} min) is earlier than the previous stop ({previous} min)")]
    DecreasingArrival { route: String, position: usize, minute: i64, previous: i64 },
    #[error("route {route}: unknown stop id {stop:?} at position {position}")]
    UnknownStop { route: String, position: usize, stop: String },
    #[error("graph has no POI nodes, connected percentage is undefined")]
    NoPois,
    #[error("report identity violated: {0}")]
    Identity(String),
    #[error("walkability is undefined: {0}")]
    UndefinedScore(&'static str),
    #[error("edge maps disagree: {0}")]
    MapMismatch(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
}

pub(crate) fn check_positive(name: &str, value: f64) -> Result<(), MultilayerError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(MultilayerError::InvalidParameter(format!("{name} must be positive and finite, got {value}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub link_radius_m: f64,
    pub snap_tolerance_m: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { link_radius_m: DEFAULT_LINK_RADIUS_M, snap_tolerance_m: DEFAULT_SNAP_TOLERANCE_M }
    }
}

/// POI and transit layers joined by interlayer links.
#[derive(Debug, Clone)]
pub struct PoiTransitNetwork {
    pub graph: MultilayerGraph,
    /// Node id of each input stop, in input order.
    pub stop_nodes: Vec<NodeId>,
    /// Node id of each input POI, in input order.
    pub poi_nodes: Vec<NodeId>,
    pub links: Vec<PoiLink>,
    /// Routes that snapped fewer than two stops.
    pub route_warnings: usize,
}

/// Builds the POI–transit network. Stops get ids `1..=S`, POIs `S+1..`.
/// Interlayer links run POI to stop and carry a walking time.
pub fn build_poi_transit_network(
    pois: &[PoiRecord],
    stops: &[StopRecord],
    routes: &[RoutePolyline],
    options: BuildOptions,
) -> Result<PoiTransitNetwork, MultilayerError> {
    check_positive("link radius", options.link_radius_m)?;
    check_positive("snap tolerance", options.snap_tolerance_m)?;
    let mut g = MultilayerGraph::new();
    let mut stop_nodes = Vec::with_capacity(stops.len());
    for (i, s) in stops.iter().enumerate() {
        let id = NodeId(i as i64 + 1);
        let mut node = NetNode::new(id, s.point, LayerId::Transit, NodeKind::Stop);
        node.tags.insert("stop_id".into(), s.stop_id.clone());
        if let Some(name) = &s.name {
            node.tags.insert("name".into(), name.clone());
        }
        g.add_node(node)?;
        stop_nodes.push(id);
    }
    let mut poi_nodes = Vec::with_capacity(pois.len());
    for (i, p) in pois.iter().enumerate() {
        let id = NodeId((stops.len() + i) as i64 + 1);
        let mut node = NetNode::new(id, p.point, LayerId::Poi, NodeKind::Poi);
        node.tags.insert("category".into(), p.category.clone());
        if let Some(name) = &p.name {
            node.tags.insert("name".into(), name.clone());
        }
        g.add_node(node)?;
        poi_nodes.push(id);
    }

    let stop_points: Vec<GeoPoint> = stops.iter().map(|s| s.point).collect();
    let poi_points: Vec<GeoPoint> = pois.iter().map(|p| p.point).collect();
    let links = link_pois_to_stops(&poi_points, &stop_points, options.link_radius_m)?;
    for l in &links {
        let edge = NetEdge::new(poi_nodes[l.poi], stop_nodes[l.stop], LayerId::Poi, EdgeKind::Interlayer, l.distance_m)
            .with_speed(WALK_SPEED_MPS);
        g.add_edge(edge)?;
    }

    let transit = transit_route_edges(&stop_points, routes, options.snap_tolerance_m)?;
    for s in &transit.segments {
        let edge = NetEdge::new(stop_nodes[s.from_stop], stop_nodes[s.to_stop], LayerId::Transit, EdgeKind::TransitRoute, s.length_m);
        g.add_edge(edge)?;
    }

    Ok(PoiTransitNetwork { graph: g, stop_nodes, poi_nodes, links, route_warnings: transit.warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn builds_three_poi_fixture() {
        // one degree of latitude is ~111.195 km, 0.001 deg ~111 m
        let stops = vec![
            StopRecord { point: pt(32.700, -117.160), stop_id: "A".into(), name: None },
            StopRecord { point: pt(32.702, -117.160), stop_id: "B".into(), name: None },
        ];
        let pois = vec![
            PoiRecord { point: pt(32.7005, -117.160), category: "cafe".into(), name: None },
            PoiRecord { point: pt(32.7021, -117.160), category: "shop".into(), name: None },
            PoiRecord { point: pt(32.800, -117.160), category: "park".into(), name: None },
        ];
        let routes = vec![RoutePolyline { route_id: "r1".into(), points: vec![pt(32.699, -117.160), pt(32.703, -117.160)] }];
        let net = build_poi_transit_network(&pois, &stops, &routes, BuildOptions::default()).unwrap();
        assert_eq!(net.graph.node_count(), 5);
        assert_eq!(net.links.len(), 2);
        assert_eq!(net.graph.layer_edge_count(LayerId::Transit), 1);
        let report = network_stats(&net.graph, None, 1.5).unwrap();
        assert_eq!(report.connected_poi_count, 2);
        assert_eq!(report.isolated_poi_count, 1);
        assert_eq!(report.connected_percentage, 66.7);
        net.graph.check_invariants().unwrap();
    }

    #[test]
    fn rejects_bad_options() {
        let err = build_poi_transit_network(&[], &[], &[], BuildOptions { link_radius_m: 0.0, ..Default::default() });
        assert!(matches!(err, Err(MultilayerError::InvalidParameter(_))));
    }
}
