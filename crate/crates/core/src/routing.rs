// SPDX-License-Identifier: Apache-2.0

//! Single-source shortest paths over the directed multigraph with a
//! pluggable edge objective.
//!
//! Among equal-cost paths the one with the lexicographically smallest
//! node-id sequence wins, so results are reproducible. Ties are resolved on
//! the subgraph of "tight" edges (`dist[u] + cost == dist[v]`) after a
//! plain Dijkstra pass.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_m, GeoPoint};
use crate::graph::{EdgeKey, LayerId, MultilayerGraph, NetEdge, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `length_m`
    Distance,
    /// `travel_time_s`
    Time,
    /// A named entry of [`NetEdge::attrs`].
    Custom(String),
}

impl Objective {
    pub fn name(&self) -> &str {
        match self {
            Objective::Distance => "length_m",
            Objective::Time => "travel_time_s",
            Objective::Custom(name) => name,
        }
    }

    pub fn cost(&self, edge: &NetEdge) -> Option<f64> {
        match self {
            Objective::Distance => Some(edge.length_m),
            Objective::Time => edge.travel_time_s,
            Objective::Custom(name) => edge.attrs.get(name).copied(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("edge {edge} has negative {attr} {value}")]
    NegativeCost { edge: EdgeKey, attr: String, value: f64 },
    #[error("edge {edge} has no {attr} attribute")]
    MissingAttribute { edge: EdgeKey, attr: String },
    #[error("no path: destination unreachable ({reached} nodes reached from source)")]
    NoPath { reached: usize },
    #[error("layer {0} has no nodes")]
    EmptyLayer(LayerId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    pub objective: Objective,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeKey>,
    /// Sum of objective costs along the path.
    pub cost: f64,
    pub length_m: f64,
    /// `None` when some edge on the path has no travel time.
    pub travel_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouteOutcome {
    Found(RouteResult),
    /// The destination is unreachable; `reached` counts nodes settled from the source.
    NoPath { reached: usize },
}

impl RouteOutcome {
    pub fn into_result(self) -> Result<RouteResult, RoutingError> {
        match self {
            RouteOutcome::Found(r) => Ok(r),
            RouteOutcome::NoPath { reached } => Err(RoutingError::NoPath { reached }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn edge_costs(g: &MultilayerGraph, objective: &Objective) -> Result<Vec<f64>, RoutingError> {
    g.edges()
        .iter()
        .map(|e| {
            let c = objective
                .cost(e)
                .ok_or_else(|| RoutingError::MissingAttribute { edge: e.edge_key(), attr: objective.name().to_string() })?;
            if !(c >= 0.0) || !c.is_finite() {
                return Err(RoutingError::NegativeCost { edge: e.edge_key(), attr: objective.name().to_string(), value: c });
            }
            Ok(c)
        })
        .collect()
}

/// Cost-minimal directed path from `src` to `dst` under `objective`.
///
/// Every edge of the graph must carry a finite, non-negative cost for the
/// objective; this is checked before the search starts.
pub fn shortest_path(g: &MultilayerGraph, src: NodeId, dst: NodeId, objective: &Objective) -> Result<RouteOutcome, RoutingError> {
    let s = g.node_index(src).ok_or(RoutingError::UnknownNode(src))?;
    let t = g.node_index(dst).ok_or(RoutingError::UnknownNode(dst))?;
    let costs = edge_costs(g, objective)?;

    let n = g.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut reached = 0usize;
    let mut heap = BinaryHeap::new();
    dist[s] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: s });
    while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
        if settled[u] || d > dist[u] {
            continue;
        }
        // everything tied with the target must be settled for tie-breaking
        if d > dist[t] {
            break;
        }
        settled[u] = true;
        reached += 1;
        for &e in g.out_edge_indices(u) {
            let v = g.node_index(g.edges()[e].to).expect("edge endpoints exist");
            let nd = d + costs[e];
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(HeapEntry { dist: nd, node: v });
            }
        }
    }
    if !settled[t] {
        return Ok(RouteOutcome::NoPath { reached });
    }

    let tight: Vec<bool> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let u = g.node_index(edge.from).expect("edge endpoints exist");
            let v = g.node_index(edge.to).expect("edge endpoints exist");
            settled[u] && settled[v] && dist[u] + costs[e] == dist[v]
        })
        .collect();
    let has_zero_cost = tight.iter().zip(&costs).any(|(&t, &c)| t && c == 0.0);

    let path_nodes = lexicographic_tight_path(g, s, t, &tight, has_zero_cost);
    let mut edges = Vec::with_capacity(path_nodes.len().saturating_sub(1));
    let mut cost = 0.0;
    let mut length_m = 0.0;
    let mut travel_time_s = Some(0.0);
    for pair in path_nodes.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        let e = g
            .out_edge_indices(u)
            .iter()
            .copied()
            .filter(|&e| tight[e] && g.node_index(g.edges()[e].to) == Some(v))
            .min_by_key(|&e| g.edges()[e].key)
            .expect("consecutive path nodes joined by a tight edge");
        let edge = &g.edges()[e];
        edges.push(edge.edge_key());
        cost += costs[e];
        length_m += edge.length_m;
        travel_time_s = travel_time_s.zip(edge.travel_time_s).map(|(a, b)| a + b);
    }
    debug_assert_eq!(cost, dist[t]);
    Ok(RouteOutcome::Found(RouteResult {
        objective: objective.clone(),
        nodes: path_nodes.iter().map(|&i| g.nodes()[i].id).collect(),
        edges,
        cost,
        length_m,
        travel_time_s,
    }))
}

/// Greedy walk over tight edges always stepping to the smallest node id that
/// can still reach `t` without revisiting a node. Without zero-cost tight
/// edges the tight subgraph is acyclic and reachability is computed once.
fn lexicographic_tight_path(g: &MultilayerGraph, s: usize, t: usize, tight: &[bool], has_zero_cost: bool) -> Vec<usize> {
    let n = g.node_count();
    let mut tight_in: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in g.edges().iter().enumerate() {
        if tight[e] {
            let u = g.node_index(edge.from).expect("edge endpoints exist");
            let v = g.node_index(edge.to).expect("edge endpoints exist");
            tight_in[v].push(u);
        }
    }

    let reach_avoiding = |visited: &[bool]| -> Vec<bool> {
        let mut reach = vec![false; n];
        let mut queue = VecDeque::new();
        reach[t] = true;
        queue.push_back(t);
        while let Some(v) = queue.pop_front() {
            for &u in &tight_in[v] {
                if !reach[u] && !visited[u] {
                    reach[u] = true;
                    queue.push_back(u);
                }
            }
        }
        reach
    };

    let mut visited = vec![false; n];
    let mut path = vec![s];
    visited[s] = true;
    let mut reach = reach_avoiding(&visited);
    let mut u = s;
    while u != t {
        if has_zero_cost {
            reach = reach_avoiding(&visited);
        }
        let next = g
            .out_edge_indices(u)
            .iter()
            .copied()
            .filter(|&e| tight[e])
            .map(|e| g.node_index(g.edges()[e].to).expect("edge endpoints exist"))
            .filter(|&v| !visited[v] && reach[v])
            .min_by_key(|&v| g.nodes()[v].id)
            .expect("a tight successor reaches the target");
        visited[next] = true;
        path.push(next);
        u = next;
    }
    path
}

/// Node of `layer` closest to `p`; distances within 1e-12 m count as ties
/// and go to the smallest id.
pub fn nearest_node(g: &MultilayerGraph, p: GeoPoint, layer: LayerId) -> Result<NodeId, RoutingError> {
    let mut best: Option<(f64, NodeId)> = None;
    for node in g.nodes().iter().filter(|n| n.layer == layer) {
        let d = haversine_m(p, node.point);
        best = match best {
            None => Some((d, node.id)),
            Some((bd, bid)) => {
                if d < bd - 1e-12 || ((d - bd).abs() <= 1e-12 && node.id < bid) {
                    Some((d, node.id))
                } else {
                    Some((bd, bid))
                }
            }
        };
    }
    best.map(|(_, id)| id).ok_or(RoutingError::EmptyLayer(layer))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteComparison {
    pub by_distance: RouteResult,
    pub by_time: RouteResult,
    /// Shared edge length over the longer route's length; 1.0 when both are empty.
    pub overlap: f64,
}

/// Shortest-distance and shortest-time routes between the same endpoints.
pub fn compare_routes(g: &MultilayerGraph, src: NodeId, dst: NodeId) -> Result<RouteComparison, RoutingError> {
    let by_distance = shortest_path(g, src, dst, &Objective::Distance)?.into_result()?;
    let by_time = shortest_path(g, src, dst, &Objective::Time)?.into_result()?;
    let in_time: HashSet<EdgeKey> = by_time.edges.iter().copied().collect();
    let shared: f64 = by_distance
        .edges
        .iter()
        .filter(|k| in_time.contains(k))
        .map(|k| g.edge(*k).expect("route edges exist").length_m)
        .sum();
    let longest = by_distance.length_m.max(by_time.length_m);
    let overlap = if longest > 0.0 { shared / longest } else { 1.0 };
    Ok(RouteComparison { by_distance, by_time, overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeKind, NetNode, NodeKind};

    fn node(g: &mut MultilayerGraph, id: i64, lat: f64, lon: f64) {
        g.add_node(NetNode::new(NodeId(id), GeoPoint::new(lat, lon).unwrap(), LayerId::Drive, NodeKind::Intersection)).unwrap();
    }

    fn link(g: &mut MultilayerGraph, a: i64, b: i64, len: f64, speed: f64) {
        g.add_edge(NetEdge::new(NodeId(a), NodeId(b), LayerId::Drive, EdgeKind::Street, len).with_speed(speed)).unwrap();
        g.add_edge(NetEdge::new(NodeId(b), NodeId(a), LayerId::Drive, EdgeKind::Street, len).with_speed(speed)).unwrap();
    }

    fn triangle() -> MultilayerGraph {
        let mut g = MultilayerGraph::new();
        node(&mut g, 1, 0.0, 0.0);
        node(&mut g, 2, 0.0, 0.001);
        node(&mut g, 3, 0.0, 0.002);
        link(&mut g, 1, 2, 1.0, 1.0);
        link(&mut g, 2, 3, 1.0, 1.0);
        link(&mut g, 1, 3, 3.0, 1.0);
        g
    }

    /// Two corridors from 1 to 4: a 100 m footpath via 2 and a 150 m road via 3.
    fn two_corridors() -> MultilayerGraph {
        let mut g = MultilayerGraph::new();
        node(&mut g, 1, 0.0, 0.0);
        node(&mut g, 2, 0.0005, 0.0005);
        node(&mut g, 3, -0.0005, 0.0005);
        node(&mut g, 4, 0.0, 0.001);
        link(&mut g, 1, 2, 50.0, 1.4);
        link(&mut g, 2, 4, 50.0, 1.4);
        link(&mut g, 1, 3, 75.0, 13.9);
        link(&mut g, 3, 4, 75.0, 13.9);
        g
    }

    fn found(o: RouteOutcome) -> RouteResult {
        match o {
            RouteOutcome::Found(r) => r,
            other => panic!("expected a route, got {other:?}"),
        }
    }

    #[test]
    fn triangle_prefers_two_hops() {
        let r = found(shortest_path(&triangle(), NodeId(1), NodeId(3), &Objective::Distance).unwrap());
        assert_eq!(r.nodes, vec![NodeId(1), NodeId(2), NodeId(3)]);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn same_source_and_target() {
        let r = found(shortest_path(&triangle(), NodeId(2), NodeId(2), &Objective::Time).unwrap());
        assert_eq!(r.nodes, vec![NodeId(2)]);
        assert!(r.edges.is_empty());
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn distance_and_time_diverge() {
        let g = two_corridors();
        let d = found(shortest_path(&g, NodeId(1), NodeId(4), &Objective::Distance).unwrap());
        let t = found(shortest_path(&g, NodeId(1), NodeId(4), &Objective::Time).unwrap());
        assert_eq!(d.nodes, vec![NodeId(1), NodeId(2), NodeId(4)]);
        assert_eq!(t.nodes, vec![NodeId(1), NodeId(3), NodeId(4)]);
        assert!((t.cost - 150.0 / 13.9).abs() < 1e-12);
        assert!((d.travel_time_s.unwrap() - 100.0 / 1.4).abs() < 1e-9);
        let cmp = compare_routes(&g, NodeId(1), NodeId(4)).unwrap();
        assert_eq!(cmp.overlap, 0.0);
    }

    #[test]
    fn overlap_is_one_when_routes_agree() {
        let g = triangle();
        assert_eq!(compare_routes(&g, NodeId(1), NodeId(3)).unwrap().overlap, 1.0);
        assert_eq!(compare_routes(&g, NodeId(1), NodeId(1)).unwrap().overlap, 1.0);
    }

    #[test]
    fn equal_cost_ties_pick_smallest_ids() {
        // 1 -> {5, 3} -> 9, both cost 2
        let mut g = MultilayerGraph::new();
        for id in [1, 3, 5, 9] {
            node(&mut g, id, 0.0, id as f64 * 0.001);
        }
        for (a, b) in [(1, 5), (5, 9), (1, 3), (3, 9)] {
            g.add_edge(NetEdge::new(NodeId(a), NodeId(b), LayerId::Drive, EdgeKind::Street, 1.0)).unwrap();
        }
        let r = found(shortest_path(&g, NodeId(1), NodeId(9), &Objective::Distance).unwrap());
        assert_eq!(r.nodes, vec![NodeId(1), NodeId(3), NodeId(9)]);
    }

    #[test]
    fn zero_cost_cycles_do_not_trap_the_walk() {
        // 1 -> 2 (0), 2 <-> 3 (0), 3 -> 4 (1); 2's smallest tight successor is... only 3
        // 1 -> 3 also 0, so the greedy walk picks 2 first and must still finish.
        let mut g = MultilayerGraph::new();
        for id in 1..=4 {
            node(&mut g, id, 0.0, id as f64 * 0.001);
        }
        for (a, b, w) in [(1, 2, 0.0), (2, 3, 0.0), (3, 2, 0.0), (1, 3, 0.0), (3, 4, 1.0)] {
            g.add_edge(NetEdge::new(NodeId(a), NodeId(b), LayerId::Drive, EdgeKind::Street, w)).unwrap();
        }
        let r = found(shortest_path(&g, NodeId(1), NodeId(4), &Objective::Distance).unwrap());
        assert_eq!(r.nodes, vec![NodeId(1), NodeId(2), NodeId(3), NodeId(4)]);
        assert_eq!(r.cost, 1.0);
    }

    #[test]
    fn direction_is_respected_and_unreachable_reported() {
        let mut g = MultilayerGraph::new();
        node(&mut g, 1, 0.0, 0.0);
        node(&mut g, 2, 0.0, 0.001);
        node(&mut g, 3, 0.0, 0.002);
        g.add_edge(NetEdge::new(NodeId(1), NodeId(2), LayerId::Drive, EdgeKind::Street, 1.0)).unwrap();
        assert_eq!(shortest_path(&g, NodeId(2), NodeId(1), &Objective::Distance).unwrap(), RouteOutcome::NoPath { reached: 1 });
        assert_eq!(shortest_path(&g, NodeId(1), NodeId(3), &Objective::Distance).unwrap(), RouteOutcome::NoPath { reached: 2 });
    }

    #[test]
    fn attribute_errors_come_before_search() {
        let mut g = triangle();
        node(&mut g, 4, 0.0, 0.003);
        g.add_edge(NetEdge::new(NodeId(3), NodeId(4), LayerId::Drive, EdgeKind::Street, 1.0)).unwrap();
        let err = shortest_path(&g, NodeId(1), NodeId(2), &Objective::Time).unwrap_err();
        assert!(matches!(err, RoutingError::MissingAttribute { .. }));
        let err = shortest_path(&g, NodeId(1), NodeId(2), &Objective::Custom("turns".into())).unwrap_err();
        assert!(matches!(err, RoutingError::MissingAttribute { .. }));
        assert_eq!(shortest_path(&g, NodeId(1), NodeId(99), &Objective::Distance).unwrap_err(), RoutingError::UnknownNode(NodeId(99)));
    }

    #[test]
    fn custom_objective_and_negative_costs() {
        let mut g = MultilayerGraph::new();
        node(&mut g, 1, 0.0, 0.0);
        node(&mut g, 2, 0.0, 0.001);
        let mut e = NetEdge::new(NodeId(1), NodeId(2), LayerId::Drive, EdgeKind::Street, 1.0);
        e.attrs.insert("turns".into(), 2.0);
        g.add_edge(e.clone()).unwrap();
        let r = found(shortest_path(&g, NodeId(1), NodeId(2), &Objective::Custom("turns".into())).unwrap());
        assert_eq!(r.cost, 2.0);
        e.attrs.insert("turns".into(), -1.0);
        g.add_edge(e).unwrap();
        assert!(matches!(
            shortest_path(&g, NodeId(1), NodeId(2), &Objective::Custom("turns".into())),
            Err(RoutingError::NegativeCost { .. })
        ));
    }

    #[test]
    fn nearest_node_rules() {
        let mut g = MultilayerGraph::new();
        node(&mut g, 9, 0.0, 0.001);
        node(&mut g, 7, 0.0, -0.001);
        node(&mut g, 3, 1.0, 1.0);
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        assert_eq!(nearest_node(&g, p, LayerId::Drive).unwrap(), NodeId(7));
        assert_eq!(nearest_node(&g, GeoPoint::new(1.0, 1.0).unwrap(), LayerId::Drive).unwrap(), NodeId(3));
        assert_eq!(nearest_node(&g, p, LayerId::Walk).unwrap_err(), RoutingError::EmptyLayer(LayerId::Walk));
    }
}
