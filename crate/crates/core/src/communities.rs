// SPDX-License-Identifier: Apache-2.0

//! Modularity with a resolution parameter and Louvain community detection.
//!
//! Conventions: `m` is the total edge weight with each self-loop counted
//! once; a node's strength `k` counts its self-loop twice. Then
//! `Q = sum_c [ L_c / m - gamma * (K_c / 2m)^2 ]` where `L_c` is the weight
//! inside community `c` (loops included) and `K_c` the summed strength.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{NodeId, WeightAttr};
use crate::view::{UndirectedView, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommunityError {
    #[error("modularity is undefined for a graph without edge weight (2m = 0)")]
    UndefinedModularity,
    #[error("resolution must be positive and finite, got {0}")]
    InvalidResolution(f64),
    #[error("partition covers {got} nodes, graph has {expected}")]
    PartitionSize { expected: usize, got: usize },
    #[error("edge between node indices {a} and {b} has negative weight {weight}")]
    NegativeWeight { a: usize, b: usize, weight: f64 },
}

fn total_weight(g: &WeightedGraph) -> Result<f64, CommunityError> {
    for &(a, b, w) in g.edges() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(CommunityError::NegativeWeight { a, b, weight: w });
        }
    }
    for (a, &w) in g.self_loops().iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(CommunityError::NegativeWeight { a, b: a, weight: w });
        }
    }
    let m = g.edges().iter().map(|e| e.2).sum::<f64>() + g.self_loops().iter().sum::<f64>();
    if m > 0.0 {
        Ok(m)
    } else {
        Err(CommunityError::UndefinedModularity)
    }
}

fn strengths(g: &WeightedGraph) -> Vec<f64> {
    let mut k: Vec<f64> = g.self_loops().iter().map(|w| 2.0 * w).collect();
    for &(a, b, w) in g.edges() {
        k[a] += w;
        k[b] += w;
    }
    k
}

/// Modularity of `partition` (community label per node index) at resolution `gamma`.
pub fn modularity(g: &WeightedGraph, partition: &[usize], gamma: f64) -> Result<f64, CommunityError> {
    if partition.len() != g.node_count() {
        return Err(CommunityError::PartitionSize { expected: g.node_count(), got: partition.len() });
    }
    let m = total_weight(g)?;
    let k = strengths(g);
    let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for (v, &c) in partition.iter().enumerate() {
        *degree.entry(c).or_insert(0.0) += k[v];
        *inside.entry(c).or_insert(0.0) += g.self_loops()[v];
    }
    for &(a, b, w) in g.edges() {
        if partition[a] == partition[b] {
            *inside.entry(partition[a]).or_insert(0.0) += w;
        }
    }
    Ok(degree.iter().map(|(c, kc)| inside[c] / m - gamma * (kc / (2.0 * m)).powi(2)).sum())
}

/// Result of a Louvain run on an index-based graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Community per node index, contiguous from 0 in order of first appearance.
    pub labels: Vec<usize>,
    pub modularity: f64,
    /// Modularity after each aggregation level, starting from singletons.
    pub trajectory: Vec<f64>,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

/// Relabels communities contiguously in order of first appearance.
fn compact(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Louvain: repeated local moving (nodes scanned in seeded random order,
/// each moved to the neighbouring community with the largest positive
/// modularity gain, ties to the lowest community id) followed by
/// aggregation, until a level makes no move.
pub fn louvain(g: &WeightedGraph, gamma: f64, seed: u64) -> Result<Partition, CommunityError> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(CommunityError::InvalidResolution(gamma));
    }
    let m = total_weight(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    let mut trajectory = vec![modularity(g, &membership, gamma)?];
    let mut level = g.clone();

    loop {
        let (labels, moved) = local_moves(&level, gamma, m, &mut rng);
        if !moved {
            break;
        }
        let labels = compact(&labels);
        for c in membership.iter_mut() {
            *c = labels[*c];
        }
        trajectory.push(modularity(g, &membership, gamma)?);
        level = aggregate(&level, &labels);
    }

    let labels = compact(&membership);
    let modularity = modularity(g, &labels, gamma)?;
    Ok(Partition { labels, modularity, trajectory })
}

fn local_moves(g: &WeightedGraph, gamma: f64, m: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = g.node_count();
    let k = strengths(g);
    let mut community: Vec<usize> = (0..n).collect();
    let mut total: Vec<f64> = k.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let two_m = 2.0 * m;
    let eps = 1e-12 * m.max(1.0);
    let mut links: BTreeMap<usize, f64> = BTreeMap::new();
    let mut moved_any = false;
    loop {
        let mut moved = false;
        for &v in &order {
            let own = community[v];
            links.clear();
            links.insert(own, 0.0);
            for &(u, w) in g.neighbors(v) {
                *links.entry(community[u]).or_insert(0.0) += w;
            }
            total[own] -= k[v];
            let gain = |c: usize, w_in: f64| w_in - gamma * total[c] * k[v] / two_m;
            let own_gain = gain(own, links[&own]);
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            for (&c, &w_in) in &links {
                if c == own {
                    continue;
                }
                let g_c = gain(c, w_in);
                if g_c > best_gain {
                    best_gain = g_c;
                    best = c;
                }
            }
            if best != own && best_gain > own_gain + eps {
                community[v] = best;
                moved = true;
                moved_any = true;
            }
            total[community[v]] += k[v];
        }
        if !moved {
            break;
        }
    }
    (community, moved_any)
}

fn aggregate(g: &WeightedGraph, labels: &[usize]) -> WeightedGraph {
    let count = labels.iter().max().map_or(0, |c| c + 1);
    let mut loops = vec![0.0; count];
    let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (v, &w) in g.self_loops().iter().enumerate() {
        loops[labels[v]] += w;
    }
    for &(a, b, w) in g.edges() {
        let (ca, cb) = (labels[a], labels[b]);
        if ca == cb {
            loops[ca] += w;
        } else {
            *between.entry((ca.min(cb), ca.max(cb))).or_insert(0.0) += w;
        }
    }
    let mut out = WeightedGraph::with_nodes(count);
    for ((a, b), w) in between {
        out.add_edge_unchecked(a, b, w);
    }
    for (c, w) in loops.into_iter().enumerate() {
        out.set_self_loop(c, w);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    pub communities: BTreeMap<NodeId, usize>,
    pub gamma: f64,
    pub modularity: f64,
    pub weight: WeightAttr,
    pub seed: u64,
}

impl CommunityAssignment {
    pub fn community_count(&self) -> usize {
        self.communities.values().max().map_or(0, |m| m + 1)
    }
}

/// Louvain over an undirected min-weight view, keyed back to node ids.
pub fn detect_communities(view: &UndirectedView, gamma: f64, seed: u64) -> Result<CommunityAssignment, CommunityError> {
    let p = louvain(&view.graph, gamma, seed)?;
    Ok(CommunityAssignment {
        communities: view.node_ids.iter().copied().zip(p.labels).collect(),
        gamma,
        modularity: p.modularity,
        weight: view.weight,
        seed,
    })
}
