// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use urbanmesh::centrality::Metric;
use urbanmesh::ingest::Profile;
use urbanmesh::routing::Objective;
use urbanmesh::{GeoPoint, LayerId, WeightAttr};

#[derive(Debug, Parser)]
#[command(name = "urbanmesh", version, about = "Build and analyze multilayer urban transport graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an OSM XML extract into a graph bundle, optionally windowed.
    Build(BuildArgs),
    /// Node centrality table and edge heatmap.
    Centrality(CentralityArgs),
    /// Louvain communities, one file per resolution.
    Communities(CommunitiesArgs),
    /// Shortest path between two nodes or snapped coordinates.
    Route(RouteArgs),
    /// Link POIs to their nearest stop and join stops along routes.
    Link(LinkArgs),
    /// Accessibility report of a linked POI-transit bundle.
    Stats(StatsArgs),
    /// Walkability score of an area.
    Walkability(WalkabilityArgs),
    /// Merge a drive and a walk bundle, walking times taking priority.
    Merge(MergeArgs),
    /// Transit graph timed from stop arrival tables.
    BusGraph(BusGraphArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory receiving the output files.
    #[arg(long, short = 'o', default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Drive,
    Walk,
    Bike,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Drive => Profile::Drive,
            ProfileArg::Walk => Profile::Walk,
            ProfileArg::Bike => Profile::Bike,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Length,
    Time,
}

impl From<WeightArg> for WeightAttr {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::Length => WeightAttr::Length,
            WeightArg::Time => WeightAttr::TravelTime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Closeness,
    Betweenness,
    Degree,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Closeness => Metric::Closeness,
            MetricArg::Betweenness => Metric::Betweenness,
            MetricArg::Degree => Metric::Degree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectiveArg {
    Single(Objective),
    Compare,
}

fn parse_objective(s: &str) -> Result<ObjectiveArg, String> {
    match s {
        "distance" => Ok(ObjectiveArg::Single(Objective::Distance)),
        "time" => Ok(ObjectiveArg::Single(Objective::Time)),
        "compare" => Ok(ObjectiveArg::Compare),
        _ => match s.strip_prefix("attr:") {
            Some(name) if !name.is_empty() => Ok(ObjectiveArg::Single(Objective::Custom(name.to_string()))),
            _ => Err(format!("expected distance, time, compare or attr:<name>, got {s:?}")),
        },
    }
}

fn numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("expected {N} comma-separated numbers, got {s:?}"))
}

pub fn parse_point(s: &str) -> Result<GeoPoint, String> {
    let [lat, lon] = numbers::<2>(s)?;
    GeoPoint::new(lat, lon).map_err(|e| e.to_string())
}

/// `south,west,north,east` in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBoxArg(pub [f64; 4]);

fn parse_bbox(s: &str) -> Result<BBoxArg, String> {
    numbers::<4>(s).map(BBoxArg)
}

fn parse_layer(s: &str) -> Result<LayerId, String> {
    s.parse::<LayerId>().map_err(|e| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be non-negative and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct AreaArgs {
    /// Area as `south,west,north,east`.
    #[arg(long, value_parser = parse_bbox, conflicts_with = "area_polygon")]
    pub area_bbox: Option<BBoxArg>,
    /// GeoJSON file whose first Polygon outlines the area.
    #[arg(long)]
    pub area_polygon: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BuildArgs {
    /// OSM XML extract.
    #[arg(long)]
    pub osm: PathBuf,
    #[arg(long, value_enum, default_value = "walk")]
    pub profile: ProfileArg,
    /// Window center as `lat,lon`.
    #[arg(long, value_parser = parse_point, requires = "radius_m")]
    pub center: Option<GeoPoint>,
    /// Core radius of the window in meters.
    #[arg(long, value_parser = positive, requires = "center")]
    pub radius_m: Option<f64>,
    /// Extra ring kept around the core to soften edge effects.
    #[arg(long, value_parser = non_negative, default_value = "0")]
    pub buffer_m: f64,
    /// Uniform speed overriding the profile's speed table.
    #[arg(long, value_parser = positive)]
    pub speed_mps: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CentralityArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Edge values from the line graph instead of endpoint means.
    #[arg(long)]
    pub invert: bool,
    /// Normalize betweenness by the number of node pairs.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value = "length")]
    pub weight: WeightArg,
    /// Restrict to these layers (repeatable).
    #[arg(long = "layer", value_parser = parse_layer)]
    pub layers: Vec<LayerId>,
    /// Report only nodes inside the core radius of a windowed bundle.
    #[arg(long)]
    pub core_only: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommunitiesArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Resolution (repeatable).
    #[arg(long = "gamma", value_parser = positive, default_values = ["0.01", "0.1", "1"])]
    pub gammas: Vec<f64>,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "length")]
    pub weight: WeightArg,
    #[arg(long = "layer", value_parser = parse_layer)]
    pub layers: Vec<LayerId>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RouteArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// Source node id.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "from_point", conflicts_with = "from_point")]
    pub from: Option<i64>,
    /// Source as `lat,lon`, snapped to the nearest node of `--snap-layer`.
    #[arg(long, value_parser = parse_point)]
    pub from_point: Option<GeoPoint>,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "to_point", conflicts_with = "to_point")]
    pub to: Option<i64>,
    #[arg(long, value_parser = parse_point)]
    pub to_point: Option<GeoPoint>,
    /// Layer used for snapping; defaults to the layer with the most nodes.
    #[arg(long, value_parser = parse_layer)]
    pub snap_layer: Option<LayerId>,
    /// distance, time, compare or attr:<name>.
    #[arg(long, value_parser = parse_objective, default_value = "distance")]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LinkArgs {
    /// POI GeoJSON (Point features).
    #[arg(long)]
    pub pois: PathBuf,
    /// Stop GeoJSON (Point features).
    #[arg(long)]
    pub stops: PathBuf,
    /// Route GeoJSON (LineString / MultiLineString features).
    #[arg(long)]
    pub routes: Option<PathBuf>,
    #[arg(long, value_parser = positive, default_value = "500")]
    pub link_radius_m: f64,
    #[arg(long, value_parser = positive, default_value = "50")]
    pub snap_tolerance_m: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[command(flatten)]
    pub area: AreaArgs,
    /// High-centrality threshold as a multiple of the mean degree centrality.
    #[arg(long, value_parser = positive, default_value = "1.5")]
    pub high_factor: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WalkabilityArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[command(flatten)]
    pub area: AreaArgs,
    #[arg(long, value_enum, default_value = "length")]
    pub weight: WeightArg,
    #[arg(long = "layer", value_parser = parse_layer)]
    pub layers: Vec<LayerId>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MergeArgs {
    #[arg(long)]
    pub drive: PathBuf,
    #[arg(long)]
    pub walk: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BusGraphArgs {
    /// Stop GeoJSON (Point features).
    #[arg(long)]
    pub stops: PathBuf,
    /// CSV with columns route_id, stop_id, arrival (HH:MM), rows in route order.
    #[arg(long)]
    pub timetables: PathBuf,
    #[arg(long, value_parser = positive, default_value = "200")]
    pub transfer_threshold_m: f64,
    #[arg(long, value_parser = positive, default_value = "1.4")]
    pub walk_speed_mps: f64,
    /// Skip walk transfers between nearby stops.
    #[arg(long)]
    pub no_transfers: bool,
    #[command(flatten)]
    pub out: OutArgs,
}
