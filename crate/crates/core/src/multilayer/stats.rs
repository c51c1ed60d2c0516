// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::MultilayerError;
use crate::centrality::{degree_centrality, high_centrality_nodes};
use crate::geo::AreaFilter;
use crate::graph::{EdgeKind, LayerId, MultilayerGraph, NodeKind};

/// Summary of a POI–transit network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessibilityReport {
    pub total_nodes: usize,
    pub poi_count: usize,
    pub stop_count: usize,
    pub total_edges: usize,
    pub interlayer_edge_count: usize,
    pub intra_transit_edge_count: usize,
    pub average_degree_centrality: f64,
    pub maximum_degree_centrality: f64,
    pub connected_poi_count: usize,
    pub isolated_poi_count: usize,
    /// Percent of POIs with a link, rounded to one decimal.
    pub connected_percentage: f64,
    /// Mean interlayer edge length; `None` without links.
    pub average_link_distance_m: Option<f64>,
    pub high_centrality_node_count: usize,
    /// Only present when an area was given.
    pub high_centrality_nodes_in_area: Option<usize>,
}

/// Raw counts a report is assembled from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportInputs {
    pub poi_count: usize,
    pub stop_count: usize,
    pub other_node_count: usize,
    pub interlayer_edge_count: usize,
    pub intra_transit_edge_count: usize,
    pub other_edge_count: usize,
    pub connected_poi_count: usize,
    /// Sum of interlayer edge lengths, in edge order.
    pub link_length_sum_m: f64,
    pub average_degree_centrality: f64,
    pub maximum_degree_centrality: f64,
    pub high_centrality_node_count: usize,
    pub high_centrality_nodes_in_area: Option<usize>,
}

fn identity(ok: bool, what: impl FnOnce() -> String) -> Result<(), MultilayerError> {
    if ok {
        Ok(())
    } else {
        Err(MultilayerError::Identity(what()))
    }
}

impl AccessibilityReport {
    /// Derives totals, isolated count, percentage and mean link distance,
    /// then checks every report identity.
    pub fn assemble(inputs: ReportInputs) -> Result<Self, MultilayerError> {
        let r = &inputs;
        if r.poi_count == 0 {
            return Err(MultilayerError::NoPois);
        }
        identity(r.connected_poi_count <= r.poi_count, || format!("{} connected of {} POIs", r.connected_poi_count, r.poi_count))?;
        identity(r.interlayer_edge_count == r.connected_poi_count, || {
            format!("{} interlayer edges but {} connected POIs", r.interlayer_edge_count, r.connected_poi_count)
        })?;
        let isolated = r.poi_count - r.connected_poi_count;
        let report = AccessibilityReport {
            total_nodes: r.poi_count + r.stop_count + r.other_node_count,
            poi_count: r.poi_count,
            stop_count: r.stop_count,
            total_edges: r.interlayer_edge_count + r.intra_transit_edge_count + r.other_edge_count,
            interlayer_edge_count: r.interlayer_edge_count,
            intra_transit_edge_count: r.intra_transit_edge_count,
            average_degree_centrality: r.average_degree_centrality,
            maximum_degree_centrality: r.maximum_degree_centrality,
            connected_poi_count: r.connected_poi_count,
            isolated_poi_count: isolated,
            connected_percentage: (1000.0 * r.connected_poi_count as f64 / r.poi_count as f64).round() / 10.0,
            average_link_distance_m: (r.interlayer_edge_count > 0).then(|| r.link_length_sum_m / r.interlayer_edge_count as f64),
            high_centrality_node_count: r.high_centrality_node_count,
            high_centrality_nodes_in_area: r.high_centrality_nodes_in_area,
        };
        report.check()?;
        Ok(report)
    }

    /// Checks the internal identities of a report.
    pub fn check(&self) -> Result<(), MultilayerError> {
        identity(self.connected_poi_count + self.isolated_poi_count == self.poi_count, || "connected + isolated != POIs".into())?;
        identity(self.interlayer_edge_count + self.intra_transit_edge_count <= self.total_edges, || {
            "interlayer + intra-transit exceeds total edges".into()
        })?;
        identity(self.poi_count + self.stop_count <= self.total_nodes, || "POIs + stops exceed total nodes".into())?;
        let exact = 100.0 * self.connected_poi_count as f64 / self.poi_count as f64;
        identity((self.connected_percentage - exact).abs() <= 0.05 + 1e-9, || {
            format!("percentage {} is not {exact}", self.connected_percentage)
        })?;
        Ok(())
    }
}

/// Report for a POI–transit graph. High-centrality nodes exceed
/// `high_factor` times the mean degree centrality; `area` additionally
/// counts those inside it.
pub fn network_stats(g: &MultilayerGraph, area: Option<&AreaFilter>, high_factor: f64) -> Result<AccessibilityReport, MultilayerError> {
    let mut inputs = ReportInputs::default();
    for n in g.nodes() {
        match n.kind {
            NodeKind::Poi => inputs.poi_count += 1,
            NodeKind::Stop => inputs.stop_count += 1,
            NodeKind::Intersection => inputs.other_node_count += 1,
        }
    }
    if inputs.poi_count == 0 {
        return Err(MultilayerError::NoPois);
    }
    let mut connected = HashSet::new();
    for e in g.edges() {
        let from = g.node(e.from).expect("edge endpoints exist");
        let to = g.node(e.to).expect("edge endpoints exist");
        if e.kind == EdgeKind::Interlayer {
            let poi = match (from.kind, to.kind) {
                (NodeKind::Poi, NodeKind::Stop) => from.id,
                (NodeKind::Stop, NodeKind::Poi) => to.id,
                _ => return Err(MultilayerError::Identity(format!("interlayer edge {} does not join a POI and a stop", e.edge_key()))),
            };
            connected.insert(poi);
            inputs.interlayer_edge_count += 1;
            inputs.link_length_sum_m += e.length_m;
        } else if from.layer == LayerId::Transit && to.layer == LayerId::Transit {
            inputs.intra_transit_edge_count += 1;
        } else {
            inputs.other_edge_count += 1;
        }
    }
    inputs.connected_poi_count = connected.len();

    if g.node_count() >= 2 {
        let degree = degree_centrality(g)?;
        inputs.average_degree_centrality = degree.mean();
        inputs.maximum_degree_centrality = degree.max();
        let high = high_centrality_nodes(&degree, high_factor);
        inputs.high_centrality_node_count = high.len();
        inputs.high_centrality_nodes_in_area =
            area.map(|a| high.iter().filter(|id| a.contains(g.node(**id).expect("centrality keys are nodes").point)).count());
    } else {
        inputs.high_centrality_nodes_in_area = area.map(|_| 0);
    }
    AccessibilityReport::assemble(inputs)
}
