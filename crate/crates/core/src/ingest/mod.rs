// SPDX-License-Identifier: Apache-2.0

//! Input parsers (OSM XML street networks; GeoJSON POIs, stops and routes)
//! and speed/travel-time annotation.

mod geojson;
mod osm;
mod speed;
pub mod xml;

use thiserror::Error;

pub use self::geojson::{parse_pois_geojson, parse_routes_geojson, parse_stops_geojson, Parsed, PoiRecord, RoutePolyline, StopRecord};
pub(crate) use self::geojson::{feature, features, line, position};
pub use self::osm::{parse_osm_xml, HighwayProfile, Profile};
pub use self::speed::{assign_speeds_and_times, SpeedTable, BIKE_SPEED_MPS, DRIVE_DEFAULT_MPS, WALK_SPEED_MPS};

use crate::graph::GraphError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error(transparent)]
    Xml(#[from] xml::XmlError),
    #[error("OSM data error at byte {offset}: {message}")]
    Osm { offset: usize, message: String },
    #[error("way {way} references undeclared node {node}")]
    UndeclaredNode { way: i64, node: i64 },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("invalid GeoJSON: {0}")]
    GeoJson(String),
    #[error("feature {index}: {message}")]
    Feature { index: usize, message: String },
    #[error("feature {index}: duplicate id `{id}`")]
    DuplicateId { index: usize, id: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
