// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MultilayerError;
use crate::geo::haversine_m;
use crate::graph::{EdgeKind, LayerId, MultilayerGraph, NetEdge, NetNode, NodeId, NodeKind};
use crate::ingest::StopRecord;

/// Floor on a bus hop, in seconds.
pub const MIN_BUS_TIME_S: f64 = 30.0;

/// Arrivals along one route, in route order, in whole minutes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopTimetable {
    pub route_id: String,
    pub arrivals: Vec<(String, i64)>,
}

impl StopTimetable {
    /// Parses `HH:MM` into minutes. Hours past 23 are accepted for trips
    /// running after midnight.
    pub fn parse_clock(s: &str) -> Option<i64> {
        let (h, m) = s.trim().split_once(':')?;
        let (h, m): (i64, i64) = (h.parse().ok()?, m.parse().ok()?);
        (h >= 0 && (0..60).contains(&m)).then_some(h * 60 + m)
    }
}

/// Transit graph with one node per stop (ids `1..=S` in input order) and a
/// directed edge per consecutive timetable pair, timed by the arrival gap
/// with a 30 s floor.
pub fn bus_time_graph(timetables: &[StopTimetable], stops: &[StopRecord]) -> Result<MultilayerGraph, MultilayerError> {
    let mut g = MultilayerGraph::new();
    let mut by_id: HashMap<&str, NodeId> = HashMap::with_capacity(stops.len());
    for (i, s) in stops.iter().enumerate() {
        let id = NodeId(i as i64 + 1);
        let mut node = NetNode::new(id, s.point, LayerId::Transit, NodeKind::Stop);
        node.tags.insert("stop_id".into(), s.stop_id.clone());
        g.add_node(node)?;
        by_id.insert(&s.stop_id, id);
    }
    for t in timetables {
        let mut resolved = Vec::with_capacity(t.arrivals.len());
        for (position, (stop, minute)) in t.arrivals.iter().enumerate() {
            let id = *by_id.get(stop.as_str()).ok_or_else(|| MultilayerError::UnknownStop {
                route: t.route_id.clone(),
                position,
                stop: stop.clone(),
            })?;
            if let Some(&(_, previous)) = resolved.last() {
                if *minute < previous {
                    return Err(MultilayerError::DecreasingArrival { route: t.route_id.clone(), position, minute: *minute, previous });
                }
            }
            resolved.push((id, *minute));
        }
        for w in resolved.windows(2) {
            let ((a, ta), (b, tb)) = (w[0], w[1]);
            let length = haversine_m(g.node(a).expect("stop node").point, g.node(b).expect("stop node").point);
            let time = (((tb - ta) * 60) as f64).max(MIN_BUS_TIME_S);
            let mut edge = NetEdge::new(a, b, LayerId::Transit, EdgeKind::TransitRoute, length).with_time(time);
            edge.attrs.insert("departure_min".into(), ta as f64);
            g.add_edge(edge)?;
        }
    }
    Ok(g)
}
