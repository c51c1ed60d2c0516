// SPDX-License-Identifier: Apache-2.0

use serde_json::Value;
use urbanmesh_demo::City;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn grid_has_expected_shape() {
    let city = City::grid(5).unwrap();
    assert_eq!(city.graph().node_count(), 25);
    assert_eq!(city.graph().edge_count(), 2 * 2 * 5 * 4);
    assert!(City::grid(1).is_err());
    assert!(City::grid(61).is_err());
}

#[test]
fn routes_prefer_arterials_for_time() {
    let city = City::grid(9).unwrap();
    let v = parse(&city.compare_routes_json(9 + 1, 7 * 9 + 7));
    let features = v["features"].as_array().unwrap();
    assert_eq!(features.len(), 2);
    let prop = |i: usize, k: &str| features[i]["properties"][k].as_f64().unwrap();
    // distance route first, time route second
    assert!(prop(0, "length_m") <= prop(1, "length_m"));
    assert!(prop(1, "travel_time_s") < prop(0, "travel_time_s"));
}

#[test]
fn bad_inputs_come_back_as_errors() {
    let city = City::grid(4).unwrap();
    assert!(parse(&city.compare_routes_json(0, 999)).get("error").is_some());
    assert!(parse(&city.heatmap_json("degree")).get("error").is_some());
    assert!(parse(&city.communities_json(-1.0, 0)).get("error").is_some());
    assert!(parse(&city.nearest_json(95.0, 0.0)).get("error").is_some());
}

#[test]
fn nearest_snaps_to_an_intersection() {
    let city = City::grid(4).unwrap();
    let v = parse(&city.nearest_json(32.7011, -117.1689));
    assert_eq!(v["node"], 4 + 1);
}

#[test]
fn heatmap_covers_every_street() {
    let city = City::grid(6).unwrap();
    let v = parse(&city.heatmap_json("betweenness"));
    // one feature per undirected street
    assert_eq!(v["features"].as_array().unwrap().len(), 2 * 6 * 5);
    assert!(!parse(&city.network_json())["features"].as_array().unwrap().is_empty());
}

#[test]
fn higher_gamma_gives_more_communities() {
    let city = City::grid(10).unwrap();
    let low = parse(&city.communities_json(0.01, 0))["community_count"].as_u64().unwrap();
    let high = parse(&city.communities_json(1.0, 0))["community_count"].as_u64().unwrap();
    assert!(low <= high, "{low} > {high}");
    assert_eq!(city.communities_json(1.0, 3), city.communities_json(1.0, 3));
}
