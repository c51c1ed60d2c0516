// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{check_positive, MultilayerError};
use crate::graph::{EdgeKind, LayerId, MultilayerGraph, NetEdge, NodeKind};
use crate::spatial::GridIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MergeSummary {
    pub shared_nodes: usize,
    pub conflicting_edges: usize,
}

fn require_times(g: &MultilayerGraph) -> Result<(), MultilayerError> {
    match g.edges().iter().find(|e| e.travel_time_s.is_none()) {
        Some(e) => Err(MultilayerError::UnannotatedEdge(e.edge_key())),
        None => Ok(()),
    }
}

/// Id-keyed union of a drive and a walk graph. A node or edge present in
/// both comes from the walk graph, so shared edges carry the walking time.
/// Drive items keep their order, walk-only items follow.
pub fn merge_walk_priority(drive: &MultilayerGraph, walk: &MultilayerGraph) -> Result<(MultilayerGraph, MergeSummary), MultilayerError> {
    require_times(drive)?;
    require_times(walk)?;
    let mut summary = MergeSummary::default();
    let mut out = MultilayerGraph::new();
    for node in drive.nodes() {
        match walk.node(node.id) {
            Some(w) => {
                summary.shared_nodes += 1;
                out.add_node(w.clone())?;
            }
            None => out.add_node(node.clone())?,
        }
    }
    for node in walk.nodes() {
        if !drive.contains_node(node.id) {
            out.add_node(node.clone())?;
        }
    }
    for edge in drive.edges() {
        match walk.edge(edge.edge_key()) {
            Some(w) => {
                summary.conflicting_edges += 1;
                out.add_edge_with_key(w.clone())?;
            }
            None => {
                out.add_edge_with_key(edge.clone())?;
            }
        }
    }
    for edge in walk.edges() {
        if drive.edge(edge.edge_key()).is_none() {
            out.add_edge_with_key(edge.clone())?;
        }
    }
    Ok((out, summary))
}

/// Adds a walk-transfer edge in each direction for every pair of stop nodes
/// closer than `threshold_m`, timed at `d / walk_speed_mps`. Returns the
/// number of pairs joined.
pub fn merge_nearby_stops(g: &mut MultilayerGraph, threshold_m: f64, walk_speed_mps: f64) -> Result<usize, MultilayerError> {
    check_positive("transfer threshold", threshold_m)?;
    check_positive("walk speed", walk_speed_mps)?;
    let stops: Vec<_> = g.nodes().iter().filter(|n| n.kind == NodeKind::Stop).map(|n| (n.id, n.point)).collect();
    if stops.len() < 2 {
        return Ok(0);
    }
    let points: Vec<_> = stops.iter().map(|s| s.1).collect();
    let index = GridIndex::new(&points, threshold_m, 0.0);
    let mut pairs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let mut near: Vec<(usize, f64)> = index.within(*p, threshold_m).into_iter().filter(|&(j, d)| j > i && d < threshold_m).collect();
        near.sort_by_key(|&(j, _)| j);
        pairs.extend(near.into_iter().map(|(j, d)| (i, j, d)));
    }
    for &(i, j, d) in &pairs {
        let (a, b) = (stops[i].0, stops[j].0);
        for (from, to) in [(a, b), (b, a)] {
            let mut edge = NetEdge::new(from, to, LayerId::Transit, EdgeKind::WalkTransfer, d).with_time(d / walk_speed_mps);
            edge.speed_mps = Some(walk_speed_mps);
            g.add_edge(edge)?;
        }
    }
    Ok(pairs.len())
}
