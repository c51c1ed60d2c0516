// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::osm::Profile;
use super::IngestError;
use crate::graph::{EdgeKind, LayerId, MultilayerGraph};

/// Pedestrian walking speed in m/s.
pub const WALK_SPEED_MPS: f64 = 1.4;
pub const BIKE_SPEED_MPS: f64 = 4.2;
/// 50 km/h, used for drive classes without an entry.
pub const DRIVE_DEFAULT_MPS: f64 = 13.9;

/// Speeds in m/s keyed by highway class, with a fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedTable {
    pub speeds: BTreeMap<String, f64>,
    pub default_speed: f64,
}

impl SpeedTable {
    pub fn uniform(speed: f64) -> Self {
        SpeedTable { speeds: BTreeMap::new(), default_speed: speed }
    }

    pub fn drive() -> Self {
        let speeds = [
            ("motorway", 29.1),
            ("trunk", 25.0),
            ("primary", 18.1),
            ("secondary", 15.3),
            ("tertiary", 13.9),
            ("residential", 11.1),
            ("service", 6.9),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        SpeedTable { speeds, default_speed: DRIVE_DEFAULT_MPS }
    }

    pub fn walk() -> Self {
        Self::uniform(WALK_SPEED_MPS)
    }

    pub fn bike() -> Self {
        Self::uniform(BIKE_SPEED_MPS)
    }

    pub fn for_profile(profile: Profile) -> Self {
        match profile {
            Profile::Drive => Self::drive(),
            Profile::Walk => Self::walk(),
            Profile::Bike => Self::bike(),
        }
    }

    pub fn speed_for(&self, highway: Option<&str>) -> f64 {
        highway.and_then(|h| self.speeds.get(h)).copied().unwrap_or(self.default_speed)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |name: &str, v: f64| IngestError::Config(format!("speed for `{name}` must be positive and finite, got {v}"));
        if !(self.default_speed > 0.0) || !self.default_speed.is_finite() {
            return Err(bad("default", self.default_speed));
        }
        for (k, &v) in &self.speeds {
            if !(v > 0.0) || !v.is_finite() {
                return Err(bad(k, v));
            }
        }
        Ok(())
    }
}

/// Sets `speed_mps` and `travel_time_s = length_m / speed_mps` on every
/// street edge of `layer`. The table is validated before anything is
/// touched; re-running with the same table changes nothing.
pub fn assign_speeds_and_times(g: &mut MultilayerGraph, layer: LayerId, table: &SpeedTable) -> Result<usize, IngestError> {
    table.validate()?;
    let mut touched = 0;
    g.update_edges(|e| {
        if e.layer == layer && e.kind == EdgeKind::Street {
            let speed = table.speed_for(e.highway);
            *e.speed_mps = Some(speed);
            *e.travel_time_s = Some(*e.length_m / speed);
            touched += 1;
        }
    })?;
    Ok(touched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::graph::{NetEdge, NetNode, NodeId, NodeKind};

    fn one_edge(layer: LayerId, highway: &str, length: f64) -> MultilayerGraph {
        let mut g = MultilayerGraph::new();
        for id in [1, 2] {
            g.add_node(NetNode::new(NodeId(id), GeoPoint::new(0.0, 0.0).unwrap(), layer, NodeKind::Intersection)).unwrap();
        }
        let mut e = NetEdge::new(NodeId(1), NodeId(2), layer, EdgeKind::Street, length);
        e.highway = Some(highway.to_string());
        g.add_edge(e).unwrap();
        g
    }

    #[test]
    fn footway_at_walking_speed() {
        let mut g = one_edge(LayerId::Walk, "footway", 140.0);
        assign_speeds_and_times(&mut g, LayerId::Walk, &SpeedTable::walk()).unwrap();
        let e = &g.edges()[0];
        assert_eq!(e.speed_mps, Some(1.4));
        assert!((e.travel_time_s.unwrap() - 100.0).abs() < 1e-12);
    }

    #[test]
    fn default_drive_speed() {
        let mut g = one_edge(LayerId::Drive, "residential", 250.0);
        assign_speeds_and_times(&mut g, LayerId::Drive, &SpeedTable::uniform(DRIVE_DEFAULT_MPS)).unwrap();
        assert!((g.edges()[0].travel_time_s.unwrap() - 17.99).abs() < 5e-3);
        // the full table has a residential entry
        assign_speeds_and_times(&mut g, LayerId::Drive, &SpeedTable::drive()).unwrap();
        assert_eq!(g.edges()[0].speed_mps, Some(11.1));
    }

    #[test]
    fn zero_length_zero_time_and_idempotent() {
        let mut g = one_edge(LayerId::Bike, "cycleway", 0.0);
        assign_speeds_and_times(&mut g, LayerId::Bike, &SpeedTable::bike()).unwrap();
        let first = g.edges()[0].clone();
        assert_eq!(first.travel_time_s, Some(0.0));
        assign_speeds_and_times(&mut g, LayerId::Bike, &SpeedTable::bike()).unwrap();
        assert_eq!(g.edges()[0], first);
    }

    #[test]
    fn bad_table_rejected_before_mutation() {
        let mut g = one_edge(LayerId::Drive, "primary", 100.0);
        let mut table = SpeedTable::drive();
        table.speeds.insert("primary".into(), 0.0);
        assert!(matches!(assign_speeds_and_times(&mut g, LayerId::Drive, &table), Err(IngestError::Config(_))));
        assert_eq!(g.edges()[0].speed_mps, None);
    }
}
