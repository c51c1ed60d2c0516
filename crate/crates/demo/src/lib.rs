// SPDX-License-Identifier: Apache-2.0

//! Synthetic grid city for the browser demo. Every operation returns a JSON
//! string so the same calls work from JavaScript and from host tests.

use serde_json::{json, Value};
use urbanmesh::centrality::{edge_centrality, Metric, Provenance};
use urbanmesh::communities::detect_communities;
use urbanmesh::export::{communities_geojson, graph_geojson, heatmap_geojson, round_floats, route_comparison_geojson};
use urbanmesh::routing::{compare_routes, nearest_node};
use urbanmesh::{EdgeKind, GeoPoint, LayerId, MultilayerGraph, NetEdge, NetNode, NodeId, NodeKind, UndirectedView, WeightAttr};

#[cfg(target_arch = "wasm32")]
mod wasm;

const BLOCK_DEG: f64 = 0.001;
const ORIGIN: (f64, f64) = (32.70, -117.17);
/// Every fourth street is an arterial.
const ARTERIAL_EVERY: usize = 4;
const ARTERIAL_MPS: f64 = 15.6;
const LOCAL_MPS: f64 = 8.3;

pub struct City {
    side: usize,
    graph: MultilayerGraph,
}

fn error_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

fn text(v: Value) -> String {
    round_floats(v).to_string()
}

impl City {
    /// `side` x `side` intersections with two-way streets. Arterials are
    /// faster but every block carries a small detour so distance and time
    /// routes can disagree.
    pub fn grid(side: usize) -> Result<City, String> {
        if !(2..=60).contains(&side) {
            return Err(format!("side must be between 2 and 60, got {side}"));
        }
        let mut g = MultilayerGraph::new();
        let id = |r: usize, c: usize| NodeId((r * side + c) as i64);
        for r in 0..side {
            for c in 0..side {
                let p = GeoPoint::new(ORIGIN.0 + r as f64 * BLOCK_DEG, ORIGIN.1 + c as f64 * BLOCK_DEG).map_err(|e| e.to_string())?;
                g.add_node(NetNode::new(id(r, c), p, LayerId::Drive, NodeKind::Intersection)).map_err(|e| e.to_string())?;
            }
        }
        let mut street = |a: NodeId, b: NodeId, arterial: bool| -> Result<(), String> {
            let len = urbanmesh::haversine_m(g.node(a).unwrap().point, g.node(b).unwrap().point);
            let speed = if arterial { ARTERIAL_MPS } else { LOCAL_MPS };
            for (from, to) in [(a, b), (b, a)] {
                let e = NetEdge::new(from, to, LayerId::Drive, EdgeKind::Street, len).with_speed(speed);
                g.add_edge(e).map_err(|e| e.to_string())?;
            }
            Ok(())
        };
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    street(id(r, c), id(r, c + 1), r % ARTERIAL_EVERY == 0)?;
                }
                if r + 1 < side {
                    street(id(r, c), id(r + 1, c), c % ARTERIAL_EVERY == 0)?;
                }
            }
        }
        Ok(City { side, graph: g })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn graph(&self) -> &MultilayerGraph {
        &self.graph
    }

    /// Streets as a GeoJSON FeatureCollection.
    pub fn network_json(&self) -> String {
        text(graph_geojson(&self.graph))
    }

    /// Nearest intersection to a clicked point, `{"node": id}`.
    pub fn nearest_json(&self, lat: f64, lon: f64) -> String {
        let p = match GeoPoint::new(lat, lon) {
            Ok(p) => p,
            Err(e) => return error_json(e),
        };
        match nearest_node(&self.graph, p, LayerId::Drive) {
            Ok(n) => json!({ "node": n.0 }).to_string(),
            Err(e) => error_json(e),
        }
    }

    /// Shortest-distance and shortest-time routes with their overlap.
    pub fn compare_routes_json(&self, from: i64, to: i64) -> String {
        match compare_routes(&self.graph, NodeId(from), NodeId(to)) {
            Ok(c) => text(route_comparison_geojson(&c, &self.graph)),
            Err(e) => error_json(e),
        }
    }

    /// Edge heatmap from the line graph; `metric` is "betweenness" or "closeness".
    pub fn heatmap_json(&self, metric: &str) -> String {
        let metric = match metric {
            "betweenness" => Metric::Betweenness,
            "closeness" => Metric::Closeness,
            other => return error_json(format!("unsupported metric {other}")),
        };
        match edge_centrality(&self.graph, WeightAttr::Length, None, metric, Provenance::Inversion, true) {
            Ok(m) => text(heatmap_geojson(&m)),
            Err(e) => error_json(e),
        }
    }

    /// Louvain communities at resolution `gamma`.
    pub fn communities_json(&self, gamma: f64, seed: u64) -> String {
        let view = match UndirectedView::build(&self.graph, WeightAttr::Length, None) {
            Ok(v) => v,
            Err(e) => return error_json(e),
        };
        match detect_communities(&view, gamma, seed) {
            Ok(a) => text(communities_geojson(&a, &self.graph)),
            Err(e) => error_json(e),
        }
    }
}
