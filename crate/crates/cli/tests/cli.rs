// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn urbanmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urbanmesh")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = urbanmesh(args);
    assert!(out.status.success(), "{args:?}\nstderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_minimal_walk_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["build", "--osm", s(&fixture("minimal.osm")), "--profile", "walk", "-o", s(dir.path())]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("walk: nodes 2 edges 2"));
    let bundle = json(&dir.path().join("walk.bundle.json"));
    assert_eq!(bundle["header"]["node_count"], 2);
    assert_eq!(bundle["header"]["edge_count"], 2);
    assert_eq!(bundle["format_version"], 1);
}

#[test]
fn missing_input_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.osm");
    let out = urbanmesh(&["build", "--osm", s(&missing), "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("missing.osm"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn empty_window_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["build", "--osm", s(&fixture("city.osm")), "--center", "0,0", "--radius-m", "100", "-o", s(dir.path())]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&dir.path().join("walk.bundle.json"))["header"]["node_count"], 0);
}

#[test]
fn windowed_build_keeps_the_buffer_ring() {
    let dir = tempfile::tempdir().unwrap();
    let city = fixture("city.osm");
    let base = ["build", "--osm", s(&city), "--center", "32.7025,-117.1575", "--radius-m", "150"];
    ok(&[&base[..], &["-o", s(&dir.path().join("a"))]].concat());
    ok(&[&base[..], &["--buffer-m", "200", "-o", s(&dir.path().join("b"))]].concat());
    let core = json(&dir.path().join("a/walk.bundle.json"))["header"]["node_count"].as_u64().unwrap();
    let buffered = json(&dir.path().join("b/walk.bundle.json"))["header"]["node_count"].as_u64().unwrap();
    assert!(core > 0 && buffered > core, "{core} {buffered}");
}

#[test]
fn p3_inverted_betweenness_is_zero_on_both_edges() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("p3.osm")), "-o", s(dir.path())]);
    let bundle = dir.path().join("walk.bundle.json");
    ok(&["centrality", "--bundle", s(&bundle), "--metric", "betweenness", "--invert", "-o", s(dir.path())]);
    let heat = json(&dir.path().join("heatmap_betweenness.geojson"));
    let features = heat["features"].as_array().unwrap();
    assert_eq!(features.len(), 2);
    for f in features {
        assert_eq!(f["geometry"]["type"], "LineString");
        assert_eq!(f["properties"]["value"], 0.0);
    }
    let csv = std::fs::read_to_string(dir.path().join("centrality_betweenness.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn degree_cannot_be_inverted() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("p3.osm")), "-o", s(dir.path())]);
    let out = urbanmesh(&["centrality", "--bundle", s(&dir.path().join("walk.bundle.json")), "--metric", "degree", "--invert", "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn communities_sweep_writes_one_file_per_gamma() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("city.osm")), "-o", s(dir.path())]);
    ok(&["communities", "--bundle", s(&dir.path().join("walk.bundle.json")), "--gamma", "0.01", "--gamma", "0.1", "--gamma", "1", "-o", s(dir.path())]);
    let mut counts = Vec::new();
    for g in ["0.01", "0.1", "1"] {
        let doc = json(&dir.path().join(format!("communities_gamma_{g}.geojson")));
        counts.push(doc["community_count"].as_u64().unwrap());
    }
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
}

#[test]
fn link_then_stats_reports_two_of_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "link",
        "--pois",
        s(&fixture("pois.geojson")),
        "--stops",
        s(&fixture("stops.geojson")),
        "--routes",
        s(&fixture("routes.geojson")),
        "-o",
        s(dir.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 route(s)"));
    ok(&["stats", "--bundle", s(&dir.path().join("network.bundle.json")), "--area-polygon", s(&fixture("downtown.geojson")), "-o", s(dir.path())]);
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["connected_percentage"], 66.7);
    assert_eq!(report["isolated_poi_count"], 1);
    assert_eq!(report["interlayer_edge_count"], report["connected_poi_count"]);
    assert_eq!(json(&dir.path().join("links.geojson"))["features"].as_array().unwrap().len(), 2);
}

#[test]
fn stats_without_pois_is_an_analysis_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("minimal.osm")), "-o", s(dir.path())]);
    let out = urbanmesh(&["stats", "--bundle", s(&dir.path().join("walk.bundle.json")), "-o", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn unsupported_bundle_version_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("minimal.osm")), "-o", s(dir.path())]);
    let path = dir.path().join("walk.bundle.json");
    let text = std::fs::read_to_string(&path).unwrap().replace("\"format_version\":1", "\"format_version\":7");
    std::fs::write(&path, text).unwrap();
    let out = urbanmesh(&["centrality", "--bundle", s(&path), "--metric", "degree", "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn route_by_snapped_points_and_by_time() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("city.osm")), "--profile", "drive", "-o", s(dir.path())]);
    let bundle = dir.path().join("drive.bundle.json");
    ok(&["route", "--bundle", s(&bundle), "--from-point", "32.7,-117.16", "--to-point", "32.705,-117.155", "--objective", "time", "-o", s(dir.path())]);
    let route = json(&dir.path().join("route.geojson"));
    let props = &route["features"][0]["properties"];
    assert_eq!(props["objective"], "travel_time_s");
    assert_eq!(props["nodes"][0], 100);
    assert_eq!(props["nodes"].as_array().unwrap().last().unwrap(), 135);
    ok(&["route", "--bundle", s(&bundle), "--from", "100", "--to", "135", "--objective", "compare", "-o", s(dir.path())]);
    assert_eq!(json(&dir.path().join("route.geojson"))["features"].as_array().unwrap().len(), 2);
    // the walk profile drops the motorway, so node 901 is not in the walk bundle
    ok(&["build", "--osm", s(&fixture("city.osm")), "--profile", "walk", "-o", s(dir.path())]);
    let walk = dir.path().join("walk.bundle.json");
    let out = urbanmesh(&["route", "--bundle", s(&walk), "--from", "100", "--to", "901", "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn walkability_needs_an_area_and_reports_a_score() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["build", "--osm", s(&fixture("city.osm")), "-o", s(dir.path())]);
    let bundle = dir.path().join("walk.bundle.json");
    assert_eq!(urbanmesh(&["walkability", "--bundle", s(&bundle), "-o", s(dir.path())]).status.code(), Some(2));
    ok(&["walkability", "--bundle", s(&bundle), "--area-bbox", "32.7,-117.16,32.703,-117.157", "-o", s(dir.path())]);
    let w = json(&dir.path().join("walkability.json"));
    assert!(w["score"].as_f64().unwrap() > 0.0);
    assert_eq!(w["unimpeded"], false);
}

#[test]
fn merge_and_bus_graph() {
    let dir = tempfile::tempdir().unwrap();
    let city = fixture("city.osm");
    ok(&["build", "--osm", s(&city), "--profile", "drive", "-o", s(dir.path())]);
    ok(&["build", "--osm", s(&city), "--profile", "walk", "-o", s(dir.path())]);
    ok(&["merge", "--drive", s(&dir.path().join("drive.bundle.json")), "--walk", s(&dir.path().join("walk.bundle.json")), "-o", s(dir.path())]);
    let merged = json(&dir.path().join("merged.bundle.json"));
    let walk_edges: Vec<&Value> = merged["edges"].as_array().unwrap().iter().filter(|e| e["layer"] == "walk").collect();
    assert!(walk_edges.iter().all(|e| e["travel_time_s"].as_f64().unwrap() == e["length_m"].as_f64().unwrap() / 1.4));

    ok(&["bus-graph", "--stops", s(&fixture("stops.geojson")), "--timetables", s(&fixture("timetables.csv")), "-o", s(dir.path())]);
    let bus = json(&dir.path().join("bus.bundle.json"));
    let edges = bus["edges"].as_array().unwrap();
    assert!(edges.iter().all(|e| e["kind"] == "walk_transfer" || e["travel_time_s"].as_f64().unwrap() >= 30.0));
    assert_eq!(edges.iter().filter(|e| e["kind"] == "walk_transfer").count(), 2);
}

#[test]
fn a_locked_output_directory_is_left_alone() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(".urbanmesh.lock"), "999").unwrap();
    let out = urbanmesh(&["build", "--osm", s(&fixture("minimal.osm")), "-o", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("walk.bundle.json").exists());
}
