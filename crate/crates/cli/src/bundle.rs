// SPDX-License-Identifier: Apache-2.0

//! On-disk graph container: a versioned JSON document with a header, a node
//! table and an edge table. Floats are written in shortest round-trip form
//! and parsed back exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use urbanmesh::graph::Window;
use urbanmesh::{LayerId, MultilayerGraph, NetEdge, NetNode};

use crate::CliError;

pub const FORMAT: &str = "urbanmesh-graph";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCount {
    pub layer: LayerId,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub node_count: usize,
    pub edge_count: usize,
    pub layers: Vec<LayerCount>,
    pub window: Option<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphBundle {
    pub format: String,
    pub format_version: u32,
    pub header: Header,
    pub nodes: Vec<NetNode>,
    pub edges: Vec<NetEdge>,
}

impl GraphBundle {
    pub fn from_graph(g: &MultilayerGraph) -> Self {
        let layers = LayerId::ALL
            .iter()
            .map(|&layer| LayerCount { layer, nodes: g.layer_node_count(layer), edges: g.layer_edge_count(layer) })
            .collect();
        GraphBundle {
            format: FORMAT.into(),
            format_version: FORMAT_VERSION,
            header: Header { node_count: g.node_count(), edge_count: g.edge_count(), layers, window: g.window() },
            nodes: g.nodes().to_vec(),
            edges: g.edges().to_vec(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(self).expect("bundles serialize");
        s.push('\n');
        s
    }

    /// Parses a bundle, checking format and version before the tables.
    pub fn from_slice(bytes: &[u8], origin: &str) -> Result<Self, CliError> {
        let raw: Value = serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{origin}: not a JSON document: {e}")))?;
        if raw.get("format").and_then(Value::as_str) != Some(FORMAT) {
            return Err(CliError::Input(format!("{origin}: not a graph bundle")));
        }
        let version = raw.get("format_version").and_then(Value::as_u64);
        if version != Some(FORMAT_VERSION as u64) {
            return Err(CliError::Version { path: origin.into(), found: version, expected: FORMAT_VERSION });
        }
        let bundle: GraphBundle = serde_json::from_value(raw).map_err(|e| CliError::Input(format!("{origin}: malformed bundle: {e}")))?;
        if bundle.header.node_count != bundle.nodes.len() || bundle.header.edge_count != bundle.edges.len() {
            return Err(CliError::Input(format!("{origin}: header counts do not match the tables")));
        }
        Ok(bundle)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes = crate::read_input(path)?;
        Self::from_slice(&bytes, &path.display().to_string())
    }

    pub fn into_graph(self, origin: &str) -> Result<MultilayerGraph, CliError> {
        let bad = |e: String| CliError::Input(format!("{origin}: {e}"));
        let mut g = MultilayerGraph::new();
        for n in self.nodes {
            g.add_node(n).map_err(|e| bad(e.to_string()))?;
        }
        for e in self.edges {
            g.add_edge_with_key(e).map_err(|e| bad(e.to_string()))?;
        }
        g.set_window(self.header.window);
        for lc in &self.header.layers {
            if g.layer_node_count(lc.layer) != lc.nodes || g.layer_edge_count(lc.layer) != lc.edges {
                return Err(bad(format!("layer table disagrees with the {} layer", lc.layer)));
            }
        }
        g.check_invariants().map_err(bad)?;
        Ok(g)
    }
}

/// Reads a bundle file into a graph.
pub fn load_graph(path: &Path) -> Result<MultilayerGraph, CliError> {
    GraphBundle::read(path)?.into_graph(&path.display().to_string())
}
