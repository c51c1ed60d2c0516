// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde_json::{json, Value};
use urbanmesh::centrality::{betweenness, closeness, degree_centrality, edge_centrality, Metric, NodeCentralityMap, Provenance};
use urbanmesh::communities::detect_communities;
use urbanmesh::export::{
    communities_geojson, graph_geojson, heatmap_geojson, links_geojson, node_centrality_csv, round_floats, route_comparison_geojson,
    route_geojson, to_json_text,
};
use urbanmesh::ingest::{
    assign_speeds_and_times, parse_osm_xml, parse_pois_geojson, parse_routes_geojson, parse_stops_geojson, HighwayProfile, Profile,
    SpeedTable,
};
use urbanmesh::multilayer::{
    build_poi_transit_network, bus_time_graph, merge_nearby_stops, merge_walk_priority, network_stats, walkability_score, BuildOptions,
    StopTimetable, WalkabilityScore,
};
use urbanmesh::routing::{compare_routes, nearest_node, shortest_path, RouteOutcome, RoutingError};
use urbanmesh::{AreaFilter, GeoPoint, LayerId, MultilayerGraph, NodeId, UndirectedView, WeightAttr};

use crate::args::*;
use crate::bundle::{load_graph, GraphBundle};
use crate::output::Staged;
use crate::{read_input, CliError, RunReport};

fn analysis(e: impl std::fmt::Display) -> CliError {
    CliError::Analysis(e.to_string())
}

fn input_at(path: &Path) -> impl Fn(urbanmesh::ingest::IngestError) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

/// Fails early with the offending path when an input file is missing.
fn require_files<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<(), CliError> {
    for p in paths {
        if !p.is_file() {
            return Err(CliError::Input(format!("{}: input file not found", p.display())));
        }
    }
    Ok(())
}

pub(crate) fn run(command: &Command) -> Result<RunReport, CliError> {
    let mut report = RunReport::default();
    let (staged, out_dir) = match command {
        Command::Build(a) => (build(a, &mut report)?, &a.out.out_dir),
        Command::Centrality(a) => (centrality(a, &mut report)?, &a.out.out_dir),
        Command::Communities(a) => (communities(a, &mut report)?, &a.out.out_dir),
        Command::Route(a) => (route(a, &mut report)?, &a.out.out_dir),
        Command::Link(a) => (link(a, &mut report)?, &a.out.out_dir),
        Command::Stats(a) => (stats(a, &mut report)?, &a.out.out_dir),
        Command::Walkability(a) => (walkability(a, &mut report)?, &a.out.out_dir),
        Command::Merge(a) => (merge(a, &mut report)?, &a.out.out_dir),
        Command::BusGraph(a) => (bus_graph(a, &mut report)?, &a.out.out_dir),
    };
    report.written = staged.commit(out_dir)?;
    Ok(report)
}

fn layer_lines(g: &MultilayerGraph) -> Vec<String> {
    let mut lines = vec![format!("nodes {} edges {}", g.node_count(), g.edge_count())];
    for layer in LayerId::ALL {
        let (n, e) = (g.layer_node_count(layer), g.layer_edge_count(layer));
        if n > 0 || e > 0 {
            lines.push(format!("  {layer}: nodes {n} edges {e}"));
        }
    }
    lines
}

fn stage_bundle(staged: &mut Staged, name: &str, g: &MultilayerGraph) {
    staged.add(name, GraphBundle::from_graph(g).to_text());
}

fn restrict(g: MultilayerGraph, layers: &[LayerId]) -> MultilayerGraph {
    if layers.is_empty() {
        g
    } else {
        g.layer_subgraph(layers)
    }
}

fn build(a: &BuildArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.osm.as_path()])?;
    let profile: Profile = a.profile.into();
    let doc = read_input(&a.osm)?;
    let mut g = parse_osm_xml(&doc, &HighwayProfile::for_profile(profile)).map_err(input_at(&a.osm))?;
    let table = match a.speed_mps {
        Some(v) => SpeedTable::uniform(v),
        None => SpeedTable::for_profile(profile),
    };
    assign_speeds_and_times(&mut g, profile.layer(), &table).map_err(input_at(&a.osm))?;
    if let (Some(center), Some(radius)) = (a.center, a.radius_m) {
        g = g.induced_subgraph_by_radius(center, radius, a.buffer_m).map_err(|e| CliError::Input(e.to_string()))?;
        if g.is_empty() {
            report.warnings.push(format!("no node lies within {} m of {},{}; the bundle is empty", radius + a.buffer_m, center.lat(), center.lon()));
        }
    }
    report.stdout.extend(layer_lines(&g));
    let mut staged = Staged::default();
    stage_bundle(&mut staged, &format!("{}.bundle.json", profile.layer()), &g);
    Ok(staged)
}

fn core_only(mut m: NodeCentralityMap, g: &MultilayerGraph) -> NodeCentralityMap {
    m.values.retain(|id, _| g.is_core(*id));
    m
}

fn centrality(a: &CentralityArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.bundle.as_path()])?;
    let g = restrict(load_graph(&a.bundle)?, &a.layers);
    let metric: Metric = a.metric.into();
    let weight: WeightAttr = a.weight.into();
    let mut staged = Staged::default();
    let nodes = match metric {
        Metric::Degree => {
            if a.invert {
                return Err(CliError::Analysis("degree has no edge form; drop --invert".into()));
            }
            degree_centrality(&g).map_err(analysis)?
        }
        Metric::Closeness | Metric::Betweenness => {
            let view = UndirectedView::build(&g, weight, None).map_err(analysis)?;
            let nodes = if metric == Metric::Closeness { closeness(&view) } else { betweenness(&view, a.normalize) }.map_err(analysis)?;
            let provenance = if a.invert { Provenance::Inversion } else { Provenance::EndpointMean };
            let edges = edge_centrality(&g, weight, None, metric, provenance, a.normalize).map_err(analysis)?;
            report.stdout.push(format!("{} edge values ({})", edges.entries.len(), provenance_name(provenance)));
            staged.add(format!("heatmap_{}.geojson", metric.as_str()), to_json_text(&heatmap_geojson(&edges)));
            nodes
        }
    };
    let nodes = if a.core_only { core_only(nodes, &g) } else { nodes };
    report.stdout.push(format!("{} node values, mean {:.6e}, max {:.6e}", nodes.values.len(), nodes.mean(), nodes.max()));
    staged.add(format!("centrality_{}.csv", metric.as_str()), node_centrality_csv(&nodes, &g));
    Ok(staged)
}

fn provenance_name(p: Provenance) -> &'static str {
    match p {
        Provenance::Inversion => "line graph",
        Provenance::EndpointMean => "endpoint mean",
    }
}

fn communities(a: &CommunitiesArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.bundle.as_path()])?;
    let g = restrict(load_graph(&a.bundle)?, &a.layers);
    let view = UndirectedView::build(&g, a.weight.into(), None).map_err(analysis)?;
    let mut staged = Staged::default();
    let mut summary = Vec::new();
    for &gamma in &a.gammas {
        let c = detect_communities(&view, gamma, a.seed).map_err(analysis)?;
        report.stdout.push(format!("gamma {gamma}: {} communities, modularity {:.6}", c.community_count(), c.modularity));
        summary.push(json!({ "gamma": gamma, "communities": c.community_count(), "modularity": c.modularity }));
        staged.add(format!("communities_gamma_{gamma}.geojson"), to_json_text(&communities_geojson(&c, &g)));
    }
    let doc = json!({ "seed": a.seed, "weight": WeightAttr::from(a.weight).as_str(), "runs": summary });
    staged.add("communities_summary.json", to_json_text(&round_floats(doc)));
    Ok(staged)
}

fn endpoint(g: &MultilayerGraph, id: Option<i64>, point: Option<GeoPoint>, layer: LayerId) -> Result<NodeId, CliError> {
    match (id, point) {
        (Some(id), _) => Ok(NodeId(id)),
        (None, Some(p)) => nearest_node(g, p, layer).map_err(routing_error),
        (None, None) => Err(CliError::Input("route endpoint missing".into())),
    }
}

fn routing_error(e: RoutingError) -> CliError {
    match e {
        RoutingError::UnknownNode(_) | RoutingError::EmptyLayer(_) => CliError::Input(e.to_string()),
        other => analysis(other),
    }
}

fn busiest_layer(g: &MultilayerGraph) -> LayerId {
    LayerId::ALL.into_iter().fold(LayerId::ALL[0], |best, l| if g.layer_node_count(l) > g.layer_node_count(best) { l } else { best })
}

fn route(a: &RouteArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.bundle.as_path()])?;
    let g = load_graph(&a.bundle)?;
    let layer = a.snap_layer.unwrap_or_else(|| busiest_layer(&g));
    let src = endpoint(&g, a.from, a.from_point, layer)?;
    let dst = endpoint(&g, a.to, a.to_point, layer)?;
    let mut staged = Staged::default();
    match &a.objective {
        ObjectiveArg::Compare => {
            let c = compare_routes(&g, src, dst).map_err(routing_error)?;
            report.stdout.push(format!(
                "distance route {:.1} m, time route {:.1} m, overlap {:.3}",
                c.by_distance.length_m, c.by_time.length_m, c.overlap
            ));
            staged.add("route.geojson", to_json_text(&route_comparison_geojson(&c, &g)));
        }
        ObjectiveArg::Single(objective) => match shortest_path(&g, src, dst, objective).map_err(routing_error)? {
            RouteOutcome::Found(r) => {
                report.stdout.push(format!("{} hops, cost {} = {}, length {:.1} m", r.edges.len(), objective.name(), r.cost, r.length_m));
                staged.add("route.geojson", to_json_text(&route_geojson(&r, &g)));
            }
            RouteOutcome::NoPath { reached } => {
                return Err(CliError::Analysis(format!("no path from {src} to {dst} ({reached} nodes reachable from the source)")));
            }
        },
    }
    Ok(staged)
}

fn link(a: &LinkArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.pois.as_path(), a.stops.as_path()].into_iter().chain(a.routes.as_deref()))?;
    let pois = parse_pois_geojson(&read_input(&a.pois)?).map_err(input_at(&a.pois))?;
    let stops = parse_stops_geojson(&read_input(&a.stops)?).map_err(input_at(&a.stops))?;
    let routes = match &a.routes {
        Some(path) => parse_routes_geojson(&read_input(path)?).map_err(input_at(path))?,
        None => Default::default(),
    };
    for (what, skipped) in [("POI", pois.skipped), ("stop", stops.skipped), ("route", routes.skipped)] {
        if skipped > 0 {
            report.warnings.push(format!("skipped {skipped} {what} feature(s) with unsupported geometry"));
        }
    }
    let options = BuildOptions { link_radius_m: a.link_radius_m, snap_tolerance_m: a.snap_tolerance_m };
    let net = build_poi_transit_network(&pois.records, &stops.records, &routes.records, options).map_err(analysis)?;
    if net.route_warnings > 0 {
        report.warnings.push(format!("{} route(s) snapped fewer than two stops and produced no edges", net.route_warnings));
    }
    report.stdout.extend(layer_lines(&net.graph));
    report.stdout.push(format!("linked {} of {} POIs", net.links.len(), net.poi_nodes.len()));
    let mut staged = Staged::default();
    stage_bundle(&mut staged, "network.bundle.json", &net.graph);
    staged.add("links.geojson", to_json_text(&links_geojson(&net)));
    staged.add("network.geojson", to_json_text(&graph_geojson(&net.graph)));
    Ok(staged)
}

fn area(a: &AreaArgs) -> Result<Option<AreaFilter>, CliError> {
    if let Some(BBoxArg([s, w, n, e])) = a.area_bbox {
        let p = |lat, lon| GeoPoint::new(lat, lon).map_err(|e| CliError::Input(format!("--area-bbox: {e}")));
        return AreaFilter::bbox(p(s, w)?, p(n, e)?).map(Some).map_err(|e| CliError::Input(format!("--area-bbox: {e}")));
    }
    match &a.area_polygon {
        Some(path) => {
            require_files([path.as_path()])?;
            polygon_file(&read_input(path)?).map(Some).map_err(|m| CliError::Input(format!("{}: {m}", path.display())))
        }
        None => Ok(None),
    }
}

/// Outer ring of the first Polygon in a GeoJSON geometry, Feature or FeatureCollection.
fn polygon_file(bytes: &[u8]) -> Result<AreaFilter, String> {
    let doc: Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
    let geometries: Vec<&Value> = match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc["features"].as_array().map(|f| f.iter().map(|f| &f["geometry"]).collect()).unwrap_or_default(),
        Some("Feature") => vec![&doc["geometry"]],
        _ => vec![&doc],
    };
    let polygon = geometries
        .into_iter()
        .find(|g| g.get("type").and_then(Value::as_str) == Some("Polygon"))
        .ok_or("no Polygon geometry found")?;
    let ring = polygon["coordinates"].get(0).and_then(Value::as_array).ok_or("Polygon has no outer ring")?;
    let points = ring
        .iter()
        .map(|c| match (c.get(0).and_then(Value::as_f64), c.get(1).and_then(Value::as_f64)) {
            (Some(lon), Some(lat)) => GeoPoint::new(lat, lon).map_err(|e| e.to_string()),
            _ => Err("ring position is not [lon, lat]".to_string()),
        })
        .collect::<Result<Vec<_>, _>>()?;
    AreaFilter::polygon(points).map_err(|e| e.to_string())
}

fn stats(a: &StatsArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.bundle.as_path()])?;
    let area = area(&a.area)?;
    let g = load_graph(&a.bundle)?;
    let r = network_stats(&g, area.as_ref(), a.high_factor).map_err(analysis)?;
    report.stdout.push(format!(
        "{} of {} POIs connected ({}%), {} isolated",
        r.connected_poi_count, r.poi_count, r.connected_percentage, r.isolated_poi_count
    ));
    let doc = round_floats(serde_json::to_value(&r).expect("reports serialize"));
    let mut staged = Staged::default();
    staged.add("report.json", to_json_text(&doc));
    Ok(staged)
}

fn walkability(a: &WalkabilityArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.bundle.as_path()])?;
    let area = area(&a.area)?.ok_or_else(|| CliError::Input("walkability needs --area-bbox or --area-polygon".into()))?;
    let g = restrict(load_graph(&a.bundle)?, &a.layers);
    let weight: WeightAttr = a.weight.into();
    let c = edge_centrality(&g, weight, None, Metric::Closeness, Provenance::Inversion, false).map_err(analysis)?;
    let b = edge_centrality(&g, weight, None, Metric::Betweenness, Provenance::Inversion, true).map_err(analysis)?;
    let w = walkability_score(&c, &b, &area).map_err(analysis)?;
    let (score, unimpeded) = match w.score {
        WalkabilityScore::Finite(v) => (json!(v), false),
        WalkabilityScore::Unimpeded => (Value::Null, true),
    };
    report.stdout.push(match w.score {
        WalkabilityScore::Finite(v) => format!("walkability {v:.6} over {} edges", w.edges_in_area),
        WalkabilityScore::Unimpeded => format!("walkability unbounded: no betweenness on {} edges", w.edges_in_area),
    });
    let doc = json!({
        "score": score,
        "unimpeded": unimpeded,
        "closeness_sum": w.closeness_sum,
        "betweenness_sum": w.betweenness_sum,
        "edges_in_area": w.edges_in_area,
        "weight": weight.as_str(),
    });
    let mut staged = Staged::default();
    staged.add("walkability.json", to_json_text(&round_floats(doc)));
    Ok(staged)
}

fn merge(a: &MergeArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.drive.as_path(), a.walk.as_path()])?;
    let drive = load_graph(&a.drive)?;
    let walk = load_graph(&a.walk)?;
    let (g, summary) = merge_walk_priority(&drive, &walk).map_err(analysis)?;
    report.stdout.extend(layer_lines(&g));
    report.stdout.push(format!("{} shared nodes, {} edges took the walking time", summary.shared_nodes, summary.conflicting_edges));
    let mut staged = Staged::default();
    stage_bundle(&mut staged, "merged.bundle.json", &g);
    Ok(staged)
}

fn read_timetables(path: &Path) -> Result<Vec<StopTimetable>, CliError> {
    let bad = |m: String| CliError::Input(format!("{}: {m}", path.display()));
    let bytes = read_input(path)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name).ok_or_else(|| bad(format!("missing column {name}")));
    let (route_col, stop_col, arrival_col) = (column("route_id")?, column("stop_id")?, column("arrival")?);
    let mut tables: Vec<StopTimetable> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let (route, stop, arrival) = (field(route_col), field(stop_col), field(arrival_col));
        let minute = StopTimetable::parse_clock(arrival).ok_or_else(|| bad(format!("row {}: arrival {arrival:?} is not HH:MM", row + 2)))?;
        match tables.iter_mut().find(|t| t.route_id == route) {
            Some(t) => t.arrivals.push((stop.to_string(), minute)),
            None => tables.push(StopTimetable { route_id: route.to_string(), arrivals: vec![(stop.to_string(), minute)] }),
        }
    }
    Ok(tables)
}

fn bus_graph(a: &BusGraphArgs, report: &mut RunReport) -> Result<Staged, CliError> {
    require_files([a.stops.as_path(), a.timetables.as_path()])?;
    let stops = parse_stops_geojson(&read_input(&a.stops)?).map_err(input_at(&a.stops))?;
    let tables = read_timetables(&a.timetables)?;
    let mut g = bus_time_graph(&tables, &stops.records).map_err(analysis)?;
    if !a.no_transfers {
        let pairs = merge_nearby_stops(&mut g, a.transfer_threshold_m, a.walk_speed_mps).map_err(analysis)?;
        report.stdout.push(format!("{pairs} stop pair(s) within {} m joined by walk transfers", a.transfer_threshold_m));
    }
    report.stdout.extend(layer_lines(&g));
    let mut staged = Staged::default();
    stage_bundle(&mut staged, "bus.bundle.json", &g);
    Ok(staged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_files_accept_collections_features_and_geometries() {
        let ring = "[[[0,0],[1,0],[1,1],[0,1],[0,0]]]";
        let geometry = format!(r#"{{"type":"Polygon","coordinates":{ring}}}"#);
        let feature = format!(r#"{{"type":"Feature","properties":{{}},"geometry":{geometry}}}"#);
        let collection = format!(r#"{{"type":"FeatureCollection","features":[{feature}]}}"#);
        for doc in [geometry, feature, collection] {
            let area = polygon_file(doc.as_bytes()).unwrap();
            assert!(area.contains(GeoPoint::new(0.5, 0.5).unwrap()));
        }
        assert!(polygon_file(br#"{"type":"Point","coordinates":[0,0]}"#).is_err());
    }
}
