// SPDX-License-Identifier: Apache-2.0

//! Simple undirected weighted graphs derived from a [`MultilayerGraph`].

use std::collections::BTreeMap;

use crate::graph::{EdgeKey, GraphError, LayerId, MultilayerGraph, NodeId, WeightAttr};

/// Index-based simple undirected graph. Node `i` is identified only by its
/// position; edges are stored once with `a < b`. Self-loops are kept apart
/// because centrality ignores them while modularity counts them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    edges: Vec<(usize, usize, f64)>,
    self_loops: Vec<f64>,
}

impl WeightedGraph {
    pub fn with_nodes(n: usize) -> Self {
        WeightedGraph { adjacency: vec![Vec::new(); n], edges: Vec::new(), self_loops: vec![0.0; n] }
    }

    /// Builds from an edge list; duplicate pairs collapse to their minimum weight.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut best: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut loops: BTreeMap<usize, f64> = BTreeMap::new();
        for (a, b, w) in edges {
            assert!(a < n && b < n, "edge endpoint out of range");
            if a == b {
                let slot = loops.entry(a).or_insert(w);
                *slot = slot.min(w);
            } else {
                let slot = best.entry((a.min(b), a.max(b))).or_insert(w);
                *slot = slot.min(w);
            }
        }
        let mut g = WeightedGraph::with_nodes(n);
        for ((a, b), w) in best {
            g.push_edge(a, b, w);
        }
        for (a, w) in loops {
            g.self_loops[a] = w;
        }
        g
    }

    fn push_edge(&mut self, a: usize, b: usize, w: f64) {
        self.edges.push((a, b, w));
        self.adjacency[a].push((b, w));
        self.adjacency[b].push((a, w));
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Number of non-loop edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Non-loop edges as `(a, b, weight)` with `a < b`, sorted by `(a, b)`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Self-loop weight per node, 0 when absent.
    pub fn self_loops(&self) -> &[f64] {
        &self.self_loops
    }

    pub(crate) fn set_self_loop(&mut self, v: usize, w: f64) {
        self.self_loops[v] = w;
    }

    pub(crate) fn add_edge_unchecked(&mut self, a: usize, b: usize, w: f64) {
        debug_assert!(a != b);
        self.push_edge(a.min(b), a.max(b), w);
    }

    /// Fails on the first non-positive or non-finite edge weight.
    pub fn require_positive_weights(&self) -> Result<(), (usize, usize, f64)> {
        match self.edges.iter().find(|(_, _, w)| !(*w > 0.0) || !w.is_finite()) {
            Some(&e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Undirected min-weight view of a multigraph, remembering which node id
/// each index stands for and which directed edge supplied each weight.
#[derive(Debug, Clone)]
pub struct UndirectedView {
    pub graph: WeightedGraph,
    pub node_ids: Vec<NodeId>,
    /// Directed edge carrying the minimum weight, parallel to `graph.edges()`.
    pub edge_sources: Vec<EdgeKey>,
    pub weight: WeightAttr,
}

impl UndirectedView {
    /// Collapses every parallel and reverse directed edge to one undirected
    /// edge carrying the minimum weight. Ties keep the smallest [`EdgeKey`].
    /// When `layers` is given, only nodes of those layers (and edges among
    /// them) are included.
    pub fn build(g: &MultilayerGraph, weight: WeightAttr, layers: Option<&[LayerId]>) -> Result<Self, GraphError> {
        let selected: Vec<usize> = (0..g.node_count())
            .filter(|&i| layers.map_or(true, |ls| ls.contains(&g.nodes()[i].layer)))
            .collect();
        let mut dense = vec![usize::MAX; g.node_count()];
        for (d, &i) in selected.iter().enumerate() {
            dense[i] = d;
        }
        let node_ids: Vec<NodeId> = selected.iter().map(|&i| g.nodes()[i].id).collect();

        let mut pairs: BTreeMap<(usize, usize), (f64, EdgeKey)> = BTreeMap::new();
        let mut loops: BTreeMap<usize, (f64, EdgeKey)> = BTreeMap::new();
        for edge in g.edges() {
            let a = dense[g.node_index(edge.from).expect("edge endpoints exist")];
            let b = dense[g.node_index(edge.to).expect("edge endpoints exist")];
            if a == usize::MAX || b == usize::MAX {
                continue;
            }
            let w = edge.weight(weight).ok_or(GraphError::MissingWeight { edge: edge.edge_key(), attr: weight.as_str() })?;
            let candidate = (w, edge.edge_key());
            let slot = if a == b { loops.entry(a).or_insert(candidate) } else { pairs.entry((a.min(b), a.max(b))).or_insert(candidate) };
            if candidate.0 < slot.0 || (candidate.0 == slot.0 && candidate.1 < slot.1) {
                *slot = candidate;
            }
        }

        let mut graph = WeightedGraph::with_nodes(node_ids.len());
        let mut edge_sources = Vec::with_capacity(pairs.len());
        for ((a, b), (w, key)) in pairs {
            graph.push_edge(a, b, w);
            edge_sources.push(key);
        }
        for (a, (w, _)) in loops {
            graph.set_self_loop(a, w);
        }
        Ok(UndirectedView { graph, node_ids, edge_sources, weight })
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.node_ids.iter().position(|&n| n == id)
    }
}
