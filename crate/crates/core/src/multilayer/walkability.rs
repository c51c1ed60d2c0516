// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::MultilayerError;
use crate::centrality::{EdgeCentralityMap, Metric};
use crate::geo::{great_circle_midpoint, AreaFilter};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkabilityScore {
    Finite(f64),
    /// Closeness is present but no edge in the area carries betweenness.
    Unimpeded,
}

impl WalkabilityScore {
    /// Numeric value, `+inf` for [`WalkabilityScore::Unimpeded`].
    pub fn value(&self) -> f64 {
        match self {
            WalkabilityScore::Finite(v) => *v,
            WalkabilityScore::Unimpeded => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Walkability {
    pub score: WalkabilityScore,
    pub closeness_sum: f64,
    pub betweenness_sum: f64,
    pub edges_in_area: usize,
}

/// Ratio of summed edge closeness to summed normalized edge betweenness
/// over edges whose great-circle midpoint lies in `area`.
pub fn walkability_score(closeness: &EdgeCentralityMap, betweenness: &EdgeCentralityMap, area: &AreaFilter) -> Result<Walkability, MultilayerError> {
    if closeness.metric != Metric::Closeness || betweenness.metric != Metric::Betweenness {
        return Err(MultilayerError::MapMismatch(format!(
            "expected closeness and betweenness, got {} and {}",
            closeness.metric.as_str(),
            betweenness.metric.as_str()
        )));
    }
    if !betweenness.normalized {
        return Err(MultilayerError::MapMismatch("betweenness must be normalized".into()));
    }
    let mut c: Vec<_> = closeness.entries.iter().collect();
    let mut b: Vec<_> = betweenness.entries.iter().collect();
    c.sort_by_key(|e| e.key);
    b.sort_by_key(|e| e.key);
    if c.len() != b.len() {
        return Err(MultilayerError::MapMismatch(format!("{} closeness entries, {} betweenness entries", c.len(), b.len())));
    }
    let (mut sum_c, mut sum_b, mut count) = (0.0, 0.0, 0usize);
    for (ce, be) in c.iter().zip(&b) {
        if ce.key != be.key {
            return Err(MultilayerError::MapMismatch(format!("edge {} has no counterpart", ce.key.min(be.key))));
        }
        if area.contains(great_circle_midpoint(ce.from_point, ce.to_point)) {
            sum_c += ce.value;
            sum_b += be.value;
            count += 1;
        }
    }
    if count == 0 {
        return Err(MultilayerError::UndefinedScore("no edges inside the area"));
    }
    let score = if sum_b > 0.0 {
        WalkabilityScore::Finite(sum_c / sum_b)
    } else if sum_c > 0.0 {
        WalkabilityScore::Unimpeded
    } else {
        return Err(MultilayerError::UndefinedScore("closeness and betweenness both sum to zero"));
    };
    Ok(Walkability { score, closeness_sum: sum_c, betweenness_sum: sum_b, edges_in_area: count })
}
