// SPDX-License-Identifier: Apache-2.0

//! The multilayer graph: typed nodes and edges tagged with a transport layer.
//!
//! Storage is index based. Node ids are opaque `i64`s (OSM ids for street
//! nodes, allocated ids for POIs and stops) mapped to dense indices. Edges
//! live in one vector with out/in adjacency lists of edge indices, so
//! parallel edges and self-loops are both representable. Parallel edges
//! between the same ordered pair are told apart by `key`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_m, GeoPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub i64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerId {
    Drive,
    Walk,
    Bike,
    Transit,
    Poi,
}

impl LayerId {
    pub const ALL: [LayerId; 5] = [LayerId::Drive, LayerId::Walk, LayerId::Bike, LayerId::Transit, LayerId::Poi];

    pub fn as_str(&self) -> &'static str {
        match self {
            LayerId::Drive => "drive",
            LayerId::Walk => "walk",
            LayerId::Bike => "bike",
            LayerId::Transit => "transit",
            LayerId::Poi => "poi",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for LayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LayerId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        LayerId::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| format!("unknown layer `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Intersection,
    Stop,
    Poi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Street,
    TransitRoute,
    Interlayer,
    WalkTransfer,
}

impl EdgeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeKind::Street => "street",
            EdgeKind::TransitRoute => "transit_route",
            EdgeKind::Interlayer => "interlayer",
            EdgeKind::WalkTransfer => "walk_transfer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetNode {
    pub id: NodeId,
    pub point: GeoPoint,
    pub layer: LayerId,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tags: BTreeMap<String, String>,
}

impl NetNode {
    pub fn new(id: NodeId, point: GeoPoint, layer: LayerId, kind: NodeKind) -> Self {
        NetNode { id, point, layer, kind, tags: BTreeMap::new() }
    }
}

/// Identifies one directed edge of the multigraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub from: NodeId,
    pub to: NodeId,
    pub key: u32,
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}#{}", self.from, self.to, self.key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub key: u32,
    pub layer: LayerId,
    pub kind: EdgeKind,
    pub length_m: f64,
    pub speed_mps: Option<f64>,
    pub travel_time_s: Option<f64>,
    /// OSM highway class for street edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub highway: Option<String>,
    /// Extra numeric attributes usable as routing objectives.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, f64>,
}

impl NetEdge {
    /// An edge with no speed or time yet; `key` is assigned on insertion.
    pub fn new(from: NodeId, to: NodeId, layer: LayerId, kind: EdgeKind, length_m: f64) -> Self {
        NetEdge {
            from,
            to,
            key: 0,
            layer,
            kind,
            length_m,
            speed_mps: None,
            travel_time_s: None,
            highway: None,
            attrs: BTreeMap::new(),
        }
    }

    pub fn edge_key(&self) -> EdgeKey {
        EdgeKey { from: self.from, to: self.to, key: self.key }
    }

    pub fn with_time(mut self, travel_time_s: f64) -> Self {
        self.travel_time_s = Some(travel_time_s);
        self
    }

    pub fn with_speed(mut self, speed_mps: f64) -> Self {
        self.speed_mps = Some(speed_mps);
        self.travel_time_s = Some(self.length_m / speed_mps);
        self
    }

    pub fn weight(&self, attr: WeightAttr) -> Option<f64> {
        match attr {
            WeightAttr::Length => Some(self.length_m),
            WeightAttr::TravelTime => self.travel_time_s,
        }
    }
}

/// Numeric edge attribute used as a weight by undirected analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightAttr {
    Length,
    TravelTime,
}

impl WeightAttr {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightAttr::Length => "length_m",
            WeightAttr::TravelTime => "travel_time_s",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("node {id}: kind {kind:?} is not allowed on layer {layer}")]
    KindLayerMismatch { id: NodeId, kind: NodeKind, layer: LayerId },
    #[error("edge {0}: interlayer edge must join nodes of different layers")]
    InterlayerSameLayer(EdgeKey),
    #[error("edge {edge}: invalid {field} {value}")]
    InvalidAttribute { edge: EdgeKey, field: &'static str, value: f64 },
    #[error("edge {edge} has no {attr} attribute")]
    MissingWeight { edge: EdgeKey, attr: &'static str },
    #[error("invalid window: radius must be > 0 and buffer >= 0 (radius {radius}, buffer {buffer})")]
    InvalidWindow { radius: f64, buffer: f64 },
}

/// Radius window applied by [`MultilayerGraph::induced_subgraph_by_radius`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: GeoPoint,
    pub radius_m: f64,
    pub buffer_m: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MultilayerGraph {
    nodes: Vec<NetNode>,
    index: HashMap<NodeId, usize>,
    edges: Vec<NetEdge>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    parallel: HashMap<(NodeId, NodeId), u32>,
    edge_index: HashMap<EdgeKey, usize>,
    layer_nodes: [usize; 5],
    layer_edges: [usize; 5],
    window: Option<Window>,
}

impl MultilayerGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn layer_node_count(&self, layer: LayerId) -> usize {
        self.layer_nodes[layer.slot()]
    }

    pub fn layer_edge_count(&self, layer: LayerId) -> usize {
        self.layer_edges[layer.slot()]
    }

    pub fn window(&self) -> Option<Window> {
        self.window
    }

    pub fn set_window(&mut self, window: Option<Window>) {
        self.window = window;
    }

    /// Nodes in insertion order.
    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> &[NetEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&NetNode> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&NetEdge> {
        self.edge_index.get(&key).map(|&i| &self.edges[i])
    }

    /// Outgoing edges of a node, in insertion order.
    pub fn out_edges(&self, id: NodeId) -> impl Iterator<Item = &NetEdge> + '_ {
        self.index.get(&id).into_iter().flat_map(move |&i| self.out_adj[i].iter().map(move |&e| &self.edges[e]))
    }

    pub fn in_edges(&self, id: NodeId) -> impl Iterator<Item = &NetEdge> + '_ {
        self.index.get(&id).into_iter().flat_map(move |&i| self.in_adj[i].iter().map(move |&e| &self.edges[e]))
    }

    pub(crate) fn out_edge_indices(&self, node_index: usize) -> &[usize] {
        &self.out_adj[node_index]
    }

    /// Largest node id plus one, or 1 for an empty graph.
    pub fn next_free_id(&self) -> NodeId {
        NodeId(self.nodes.iter().map(|n| n.id.0).max().map_or(1, |m| m + 1))
    }

    pub fn add_node(&mut self, node: NetNode) -> Result<(), GraphError> {
        if self.index.contains_key(&node.id) {
            return Err(GraphError::DuplicateNode(node.id));
        }
        match (node.kind, node.layer) {
            (NodeKind::Stop, LayerId::Transit) | (NodeKind::Poi, LayerId::Poi) | (NodeKind::Intersection, _) => {}
            (kind, layer) => return Err(GraphError::KindLayerMismatch { id: node.id, kind, layer }),
        }
        self.index.insert(node.id, self.nodes.len());
        self.layer_nodes[node.layer.slot()] += 1;
        self.nodes.push(node);
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        self.debug_check_counts();
        Ok(())
    }

    /// Inserts an edge, assigning the next free key for its ordered endpoint pair.
    pub fn add_edge(&mut self, mut edge: NetEdge) -> Result<EdgeKey, GraphError> {
        let next = self.parallel.get(&(edge.from, edge.to)).copied().unwrap_or(0);
        edge.key = next;
        self.insert_edge(edge)
    }

    /// Inserts an edge keeping its `key`; fails if that key is already taken.
    pub fn add_edge_with_key(&mut self, edge: NetEdge) -> Result<EdgeKey, GraphError> {
        if self.edge_index.contains_key(&edge.edge_key()) {
            return Err(GraphError::InvalidAttribute { edge: edge.edge_key(), field: "key", value: edge.key as f64 });
        }
        self.insert_edge(edge)
    }

    fn insert_edge(&mut self, edge: NetEdge) -> Result<EdgeKey, GraphError> {
        let ek = edge.edge_key();
        let from = *self.index.get(&edge.from).ok_or(GraphError::UnknownNode(edge.from))?;
        let to = *self.index.get(&edge.to).ok_or(GraphError::UnknownNode(edge.to))?;
        if edge.kind == EdgeKind::Interlayer && self.nodes[from].layer == self.nodes[to].layer {
            return Err(GraphError::InterlayerSameLayer(ek));
        }
        validate_edge_numbers(&edge)?;
        let slot = self.parallel.entry((edge.from, edge.to)).or_insert(0);
        *slot = (*slot).max(edge.key + 1);
        let e = self.edges.len();
        self.layer_edges[edge.layer.slot()] += 1;
        self.edge_index.insert(ek, e);
        self.edges.push(edge);
        self.out_adj[from].push(e);
        self.in_adj[to].push(e);
        self.debug_check_counts();
        Ok(ek)
    }

    /// Mutable access to edge attributes. Endpoints and key are not changeable.
    pub fn update_edges<F>(&mut self, mut f: F) -> Result<(), GraphError>
    where
        F: FnMut(&mut EdgeAttrs<'_>),
    {
        for edge in &mut self.edges {
            let mut attrs = EdgeAttrs {
                layer: edge.layer,
                kind: edge.kind,
                highway: edge.highway.as_deref(),
                length_m: &mut edge.length_m,
                speed_mps: &mut edge.speed_mps,
                travel_time_s: &mut edge.travel_time_s,
            };
            f(&mut attrs);
            validate_edge_numbers(edge)?;
        }
        Ok(())
    }

    fn debug_check_counts(&self) {
        debug_assert_eq!(self.layer_nodes.iter().sum::<usize>(), self.nodes.len());
        debug_assert_eq!(self.layer_edges.iter().sum::<usize>(), self.edges.len());
    }

    /// Verifies every structural invariant. Used by tests and after deserialization.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.layer_nodes.iter().sum::<usize>() != self.nodes.len() {
            return Err("per-layer node counts do not sum to total".into());
        }
        if self.layer_edges.iter().sum::<usize>() != self.edges.len() {
            return Err("per-layer edge counts do not sum to total".into());
        }
        let out_total: usize = self.out_adj.iter().map(Vec::len).sum();
        let in_total: usize = self.in_adj.iter().map(Vec::len).sum();
        if out_total != self.edges.len() || in_total != self.edges.len() {
            return Err("adjacency views disagree with edge list".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            for &e in &self.out_adj[i] {
                let edge = &self.edges[e];
                if edge.from != node.id {
                    return Err(format!("out-adjacency of {} holds edge {}", node.id, edge.edge_key()));
                }
                let to = self.index[&edge.to];
                if !self.in_adj[to].contains(&e) {
                    return Err(format!("edge {} missing from in-adjacency", edge.edge_key()));
                }
            }
        }
        for edge in &self.edges {
            if edge.kind == EdgeKind::Street {
                if let (Some(s), Some(t)) = (edge.speed_mps, edge.travel_time_s) {
                    let expected = edge.length_m / s;
                    if (t - expected).abs() > 1e-9 * expected.abs().max(1.0) {
                        return Err(format!("edge {}: travel time {t} != length/speed {expected}", edge.edge_key()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Nodes within `radius + buffer` meters of `center` (inclusive) and the
    /// edges whose endpoints both survive. Attributes are copied unchanged.
    /// The result remembers the window so [`Self::is_core`] can separate the
    /// core disc from the buffer ring.
    pub fn induced_subgraph_by_radius(&self, center: GeoPoint, radius: f64, buffer: f64) -> Result<MultilayerGraph, GraphError> {
        if !(radius > 0.0) || !(buffer >= 0.0) || !radius.is_finite() || !buffer.is_finite() {
            return Err(GraphError::InvalidWindow { radius, buffer });
        }
        let limit = radius + buffer;
        let mut out = MultilayerGraph::new();
        for node in &self.nodes {
            if haversine_m(center, node.point) <= limit {
                out.add_node(node.clone())?;
            }
        }
        for edge in &self.edges {
            if out.contains_node(edge.from) && out.contains_node(edge.to) {
                out.add_edge_with_key(edge.clone())?;
            }
        }
        out.window = Some(Window { center, radius_m: radius, buffer_m: buffer });
        Ok(out)
    }

    /// True when the node lies inside the core disc of the window, or when
    /// the graph has no window at all.
    pub fn is_core(&self, id: NodeId) -> bool {
        match (self.window, self.node(id)) {
            (None, Some(_)) => true,
            (Some(w), Some(n)) => haversine_m(w.center, n.point) <= w.radius_m,
            (_, None) => false,
        }
    }

    /// True for nodes kept only because of the buffer ring.
    pub fn is_buffer_zone(&self, id: NodeId) -> bool {
        self.window.is_some() && self.contains_node(id) && !self.is_core(id)
    }

    /// Nodes of the given layers and the edges among them.
    pub fn layer_subgraph(&self, layers: &[LayerId]) -> MultilayerGraph {
        let mut out = MultilayerGraph::new();
        for node in self.nodes.iter().filter(|n| layers.contains(&n.layer)) {
            out.add_node(node.clone()).expect("ids unique in source graph");
        }
        for edge in &self.edges {
            if out.contains_node(edge.from) && out.contains_node(edge.to) {
                out.add_edge_with_key(edge.clone()).expect("edges valid in source graph");
            }
        }
        out.window = self.window;
        out
    }
}

/// Mutable view of an edge's numeric attributes handed out by
/// [`MultilayerGraph::update_edges`].
pub struct EdgeAttrs<'a> {
    pub layer: LayerId,
    pub kind: EdgeKind,
    pub highway: Option<&'a str>,
    pub length_m: &'a mut f64,
    pub speed_mps: &'a mut Option<f64>,
    pub travel_time_s: &'a mut Option<f64>,
}

fn validate_edge_numbers(edge: &NetEdge) -> Result<(), GraphError> {
    let ek = edge.edge_key();
    if !(edge.length_m >= 0.0) || !edge.length_m.is_finite() {
        return Err(GraphError::InvalidAttribute { edge: ek, field: "length_m", value: edge.length_m });
    }
    if let Some(s) = edge.speed_mps {
        if !(s > 0.0) || !s.is_finite() {
            return Err(GraphError::InvalidAttribute { edge: ek, field: "speed_mps", value: s });
        }
    }
    if let Some(t) = edge.travel_time_s {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(GraphError::InvalidAttribute { edge: ek, field: "travel_time_s", value: t });
        }
    }
    Ok(())
}
