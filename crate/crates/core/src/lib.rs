// SPDX-License-Identifier: Apache-2.0

// `!(x > 0.0)` is used on purpose so NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Multilayer urban transport graphs.
//!
//! Street layers (drive, walk, bike) come from OSM XML, POIs, stops and
//! routes from GeoJSON. On top of the shared [`graph::MultilayerGraph`]
//! the crate provides objective-pluggable routing, node and edge
//! centrality, Louvain communities, POI-to-transit accessibility reports
//! and an area walkability score.

pub mod centrality;
pub mod communities;
pub mod export;
pub mod geo;
pub mod graph;
pub mod ingest;
pub mod multilayer;
mod par;
pub mod routing;
pub mod spatial;
pub mod view;

pub use geo::{haversine_m, AreaFilter, GeoPoint};
pub use graph::{EdgeKey, EdgeKind, LayerId, MultilayerGraph, NetEdge, NetNode, NodeId, NodeKind, WeightAttr};
pub use view::{UndirectedView, WeightedGraph};
