// SPDX-License-Identifier: Apache-2.0

//! Node centrality (closeness, betweenness, degree) and edge centrality
//! obtained by running a node measure on the line graph.
//!
//! Closeness uses the component-corrected form: for a node reaching `r`
//! nodes (itself included) out of `N`,
//! `C(x) = (r-1)/sum_y d(x,y) * (r-1)/(N-1)`, and 0 for isolated nodes.
//! Betweenness is Brandes' accumulation over unordered pairs of the
//! undirected weighted graph.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::graph::{EdgeKey, GraphError, LayerId, MultilayerGraph, NodeId, WeightAttr};
use crate::view::{UndirectedView, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Closeness,
    Betweenness,
    Degree,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Closeness => "closeness",
            Metric::Betweenness => "betweenness",
            Metric::Degree => "degree",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Node measure computed on the line graph.
    Inversion,
    /// Mean of the endpoint node values.
    EndpointMean,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CentralityError {
    #[error("edge between node indices {a} and {b} has non-positive weight {weight}")]
    NonPositiveWeight { a: usize, b: usize, weight: f64 },
    #[error("degree centrality needs at least 2 nodes, graph has {0}")]
    TooFewNodes(usize),
    #[error("degree is not an edge metric")]
    UnsupportedEdgeMetric,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCentralityMap {
    pub metric: Metric,
    pub normalized: bool,
    pub values: BTreeMap<NodeId, f64>,
}

impl NodeCentralityMap {
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.values().sum::<f64>() / self.values.len() as f64
        }
    }

    pub fn max(&self) -> f64 {
        self.values.values().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCentrality {
    pub key: EdgeKey,
    pub from_point: GeoPoint,
    pub to_point: GeoPoint,
    pub value: f64,
}

/// Edge values sorted by [`EdgeKey`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCentralityMap {
    pub metric: Metric,
    pub provenance: Provenance,
    pub normalized: bool,
    pub entries: Vec<EdgeCentrality>,
}

impl EdgeCentralityMap {
    pub fn get(&self, key: EdgeKey) -> Option<f64> {
        self.entries.binary_search_by(|e| e.key.cmp(&key)).ok().map(|i| self.entries[i].value)
    }

    pub fn keys(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.entries.iter().map(|e| e.key)
    }
}

fn check_weights(g: &WeightedGraph) -> Result<(), CentralityError> {
    g.require_positive_weights().map_err(|(a, b, weight)| CentralityError::NonPositiveWeight { a, b, weight })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Closeness per node index.
pub fn closeness_values(g: &WeightedGraph) -> Result<Vec<f64>, CentralityError> {
    check_weights(g)?;
    let n = g.node_count();
    let per_node = |x: usize| -> f64 {
        if n < 2 {
            return 0.0;
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[x] = 0.0;
        heap.push(Entry { dist: 0.0, node: x });
        let mut reached = 0usize;
        let mut total = 0.0;
        while let Some(Entry { dist: d, node: v }) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            reached += 1;
            total += d;
            for &(w, wt) in g.neighbors(v) {
                let nd = d + wt;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Entry { dist: nd, node: w });
                }
            }
        }
        if reached <= 1 || total == 0.0 {
            return 0.0;
        }
        let r1 = (reached - 1) as f64;
        (r1 / total) * (r1 / (n - 1) as f64)
    };
    Ok(crate::par::map_range(n, per_node))
}

/// Sources handled per partial sum. Fixed so the floating-point reduction
/// order never depends on the thread count.
const SOURCE_CHUNK: usize = 32;

/// Betweenness per node index, over unordered pairs. `normalized` divides by
/// `(N-1)(N-2)/2`.
pub fn betweenness_values(g: &WeightedGraph, normalized: bool) -> Result<Vec<f64>, CentralityError> {
    check_weights(g)?;
    let n = g.node_count();
    let chunks: Vec<(usize, usize)> = (0..n).step_by(SOURCE_CHUNK).map(|s| (s, (s + SOURCE_CHUNK).min(n))).collect();
    let partials = crate::par::map_slice(&chunks, |&(lo, hi)| {
        let mut scratch = BrandesScratch::new(n);
        let mut acc = vec![0.0; n];
        for s in lo..hi {
            scratch.accumulate(g, s, &mut acc);
        }
        acc
    });
    let mut bc = vec![0.0; n];
    for partial in partials {
        for (b, p) in bc.iter_mut().zip(partial) {
            *b += p;
        }
    }
    let scale = if normalized && n > 2 { 0.5 / (((n - 1) * (n - 2)) as f64 / 2.0) } else { 0.5 };
    for b in &mut bc {
        *b *= scale;
    }
    Ok(bc)
}

struct BrandesScratch {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    done: Vec<bool>,
    preds: Vec<Vec<usize>>,
    order: Vec<usize>,
    touched: Vec<usize>,
    heap: BinaryHeap<Entry>,
}

impl BrandesScratch {
    fn new(n: usize) -> Self {
        BrandesScratch {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            done: vec![false; n],
            preds: vec![Vec::new(); n],
            order: Vec::with_capacity(n),
            touched: Vec::with_capacity(n),
            heap: BinaryHeap::new(),
        }
    }

    fn accumulate(&mut self, g: &WeightedGraph, s: usize, acc: &mut [f64]) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
            self.done[v] = false;
            self.preds[v].clear();
        }
        self.touched.clear();
        self.order.clear();

        self.dist[s] = 0.0;
        self.sigma[s] = 1.0;
        self.touched.push(s);
        self.heap.push(Entry { dist: 0.0, node: s });
        while let Some(Entry { dist: d, node: v }) = self.heap.pop() {
            if self.done[v] || d > self.dist[v] {
                continue;
            }
            self.done[v] = true;
            self.order.push(v);
            for &(w, wt) in g.neighbors(v) {
                if self.done[w] {
                    continue;
                }
                let nd = d + wt;
                if nd < self.dist[w] {
                    if self.dist[w].is_infinite() {
                        self.touched.push(w);
                    }
                    self.dist[w] = nd;
                    self.sigma[w] = self.sigma[v];
                    self.preds[w].clear();
                    self.preds[w].push(v);
                    self.heap.push(Entry { dist: nd, node: w });
                } else if nd == self.dist[w] {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push(v);
                }
            }
        }
        while let Some(w) = self.order.pop() {
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for i in 0..self.preds[w].len() {
                let v = self.preds[w][i];
                self.delta[v] += self.sigma[v] * coeff;
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

fn node_map(view: &UndirectedView, metric: Metric, normalized: bool, values: Vec<f64>) -> NodeCentralityMap {
    NodeCentralityMap { metric, normalized, values: view.node_ids.iter().copied().zip(values).collect() }
}

pub fn closeness(view: &UndirectedView) -> Result<NodeCentralityMap, CentralityError> {
    Ok(node_map(view, Metric::Closeness, false, closeness_values(&view.graph)?))
}

pub fn betweenness(view: &UndirectedView, normalized: bool) -> Result<NodeCentralityMap, CentralityError> {
    Ok(node_map(view, Metric::Betweenness, normalized, betweenness_values(&view.graph, normalized)?))
}

/// Distinct undirected neighbours (self excluded, interlayer edges included)
/// divided by `N - 1`.
pub fn degree_centrality(g: &MultilayerGraph) -> Result<NodeCentralityMap, CentralityError> {
    let n = g.node_count();
    if n < 2 {
        return Err(CentralityError::TooFewNodes(n));
    }
    let mut neighbours: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in g.edges() {
        let a = g.node_index(e.from).expect("edge endpoints exist");
        let b = g.node_index(e.to).expect("edge endpoints exist");
        if a != b {
            neighbours[a].insert(b);
            neighbours[b].insert(a);
        }
    }
    let denom = (n - 1) as f64;
    let values = g.nodes().iter().zip(&neighbours).map(|(node, nb)| (node.id, nb.len() as f64 / denom)).collect();
    Ok(NodeCentralityMap { metric: Metric::Degree, normalized: true, values })
}

/// Line graph of a simple undirected graph: node `i` stands for edge `i` of
/// `g`; two such nodes are adjacent when their edges share an endpoint, with
/// weight equal to the mean of the two edge weights.
pub fn line_graph(g: &WeightedGraph) -> WeightedGraph {
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
    for (i, &(a, b, _)) in g.edges().iter().enumerate() {
        incident[a].push(i);
        incident[b].push(i);
    }
    let edges = g.edges();
    let mut line = Vec::new();
    for list in &incident {
        for (x, &i) in list.iter().enumerate() {
            for &j in &list[x + 1..] {
                line.push((i, j, (edges[i].2 + edges[j].2) / 2.0));
            }
        }
    }
    WeightedGraph::from_edges(edges.len(), line)
}

/// Edge-level values for `metric`, index-aligned with `g.edges()`.
pub fn inverted_values(g: &WeightedGraph, metric: Metric, normalized: bool) -> Result<Vec<f64>, CentralityError> {
    check_weights(g)?;
    let line = line_graph(g);
    match metric {
        Metric::Closeness => closeness_values(&line),
        Metric::Betweenness => betweenness_values(&line, normalized),
        Metric::Degree => Err(CentralityError::UnsupportedEdgeMetric),
    }
}

/// Projects `metric` onto the edges of the undirected min-weight view of
/// `g`. Each undirected edge is reported under the directed edge that
/// supplied its weight.
pub fn edge_centrality(
    g: &MultilayerGraph,
    weight: WeightAttr,
    layers: Option<&[LayerId]>,
    metric: Metric,
    provenance: Provenance,
    normalized: bool,
) -> Result<EdgeCentralityMap, CentralityError> {
    let view = UndirectedView::build(g, weight, layers)?;
    let values = match provenance {
        Provenance::Inversion => inverted_values(&view.graph, metric, normalized)?,
        Provenance::EndpointMean => {
            let node_values = match metric {
                Metric::Closeness => closeness_values(&view.graph)?,
                Metric::Betweenness => betweenness_values(&view.graph, normalized)?,
                Metric::Degree => return Err(CentralityError::UnsupportedEdgeMetric),
            };
            view.graph.edges().iter().map(|&(a, b, _)| (node_values[a] + node_values[b]) / 2.0).collect()
        }
    };
    let mut entries: Vec<EdgeCentrality> = view
        .edge_sources
        .iter()
        .zip(values)
        .map(|(&key, value)| EdgeCentrality {
            key,
            from_point: g.node(key.from).expect("edge endpoints exist").point,
            to_point: g.node(key.to).expect("edge endpoints exist").point,
            value,
        })
        .collect();
    entries.sort_by_key(|e| e.key);
    Ok(EdgeCentralityMap { metric, provenance, normalized, entries })
}

/// Nodes whose value exceeds `factor` times the mean (strictly).
pub fn high_centrality_nodes(m: &NodeCentralityMap, factor: f64) -> BTreeSet<NodeId> {
    let threshold = factor * m.mean();
    m.values.iter().filter(|(_, &v)| v > threshold).map(|(&id, _)| id).collect()
}
