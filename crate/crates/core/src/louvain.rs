//! Modularity and Louvain community detection.
//!
//! Louvain alternates two phases: greedy local moves of single nodes into
//! the neighbouring community with the best modularity gain, then collapse
//! of each community into one weighted node. Levels repeat until local
//! moving changes nothing.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeGrouping};
use crate::seed;

/// Minimum modularity gain for a move.
pub const MOVE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    /// Community of each node, dense in `0..num_communities`.
    pub communities: Vec<u32>,
    pub num_communities: usize,
    pub modularity: f64,
    pub seed: u64,
    pub resolution: f64,
}

#[derive(Serialize)]
struct Summary {
    num_communities: usize,
    modularity: f64,
    seed: u64,
    resolution: f64,
}

impl CommunityAssignment {
    pub fn to_grouping(&self, graph: &Graph) -> Result<NodeGrouping> {
        NodeGrouping::partition(graph.ids().to_vec(), &self.communities)
    }

    /// `node,community` CSV.
    pub fn write_csv<W: Write>(&self, graph: &Graph, w: W) -> Result<()> {
        self.to_grouping(graph)?.write_csv(w, ("node", "community"))
    }

    /// `{num_communities, modularity, seed, resolution}`.
    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Summary {
            num_communities: self.num_communities,
            modularity: self.modularity,
            seed: self.seed,
            resolution: self.resolution,
        })?)
    }
}

/// Weighted undirected graph with per-node self-loop weight.
///
/// `self_weight[i]` is the total weight of edges folded into node `i`,
/// counted once; it contributes twice to the node's degree.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
    self_weight: Vec<f64>,
    total_weight: f64,
}

impl WeightedGraph {
    pub fn from_graph(graph: &Graph) -> Self {
        let n = graph.num_nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for u in 0..n as u32 {
            targets.extend_from_slice(graph.neighbors(u));
            offsets.push(targets.len());
        }
        let weights = vec![1.0; targets.len()];
        WeightedGraph {
            offsets,
            targets,
            weights,
            self_weight: vec![0.0; n],
            total_weight: graph.num_edges() as f64,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.self_weight.len()
    }

    /// Sum of all edge weights, self-loops included, each edge once.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[u]..self.offsets[u + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r])
            .map(|(&v, &w)| (v as usize, w))
    }

    pub fn degree(&self, u: usize) -> f64 {
        2.0 * self.self_weight[u] + self.neighbors(u).map(|(_, w)| w).sum::<f64>()
    }

    /// `Σ_c [in_c / m − γ (tot_c / 2m)²]`.
    pub fn modularity(&self, communities: &[u32], resolution: f64) -> Result<f64> {
        if communities.len() != self.num_nodes() {
            return Err(Error::invalid("assignment does not cover every node"));
        }
        let m = self.total_weight;
        if m <= 0.0 {
            return Err(Error::invalid("modularity is undefined without edges"));
        }
        let k = communities.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut internal = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for u in 0..self.num_nodes() {
            let cu = communities[u] as usize;
            internal[cu] += self.self_weight[u];
            tot[cu] += 2.0 * self.self_weight[u];
            for (v, w) in self.neighbors(u) {
                tot[cu] += w;
                if communities[v] as usize == cu {
                    internal[cu] += w / 2.0;
                }
            }
        }
        Ok(internal
            .iter()
            .zip(&tot)
            .map(|(&i, &t)| i / m - resolution * (t / (2.0 * m)).powi(2))
            .sum())
    }

    /// Collapse each community into a node. `communities` must be dense.
    pub fn aggregate(&self, communities: &[u32]) -> WeightedGraph {
        let k = communities.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut self_weight = vec![0.0; k];
        let mut links: Vec<(u32, u32, f64)> = Vec::new();
        for u in 0..self.num_nodes() {
            let cu = communities[u];
            self_weight[cu as usize] += self.self_weight[u];
            for (v, w) in self.neighbors(u) {
                let cv = communities[v];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_weight[cu as usize] += w / 2.0;
                } else {
                    links.push((cu, cv, w));
                }
            }
        }
        links.sort_unstable_by_key(|&(a, b, _)| (a, b));
        let mut offsets = vec![0usize; k + 1];
        let mut targets = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut i = 0;
        while i < links.len() {
            let (a, b, _) = links[i];
            let mut w = 0.0;
            while i < links.len() && links[i].0 == a && links[i].1 == b {
                w += links[i].2;
                i += 1;
            }
            targets.push(b);
            weights.push(w);
            offsets[a as usize + 1] += 1;
        }
        for c in 0..k {
            offsets[c + 1] += offsets[c];
        }
        WeightedGraph {
            offsets,
            targets,
            weights,
            self_weight,
            total_weight: self.total_weight,
        }
    }
}

/// Classic modularity (resolution 1) of a node assignment on `graph`.
pub fn modularity(graph: &Graph, communities: &[u32]) -> Result<f64> {
    modularity_at(graph, communities, 1.0)
}

pub fn modularity_at(graph: &Graph, communities: &[u32], resolution: f64) -> Result<f64> {
    WeightedGraph::from_graph(graph).modularity(communities, resolution)
}

/// Relabel so community ids are dense and numbered by first appearance.
pub fn relabel_dense(communities: &[u32]) -> (Vec<u32>, usize) {
    let mut map = std::collections::HashMap::new();
    let out = communities
        .iter()
        .map(|c| {
            let next = map.len() as u32;
            *map.entry(*c).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// One round of local moving. Returns the dense community of every node and
/// whether any node changed community.
fn local_moving(g: &WeightedGraph, resolution: f64, seed: u64, level: usize) -> (Vec<u32>, bool) {
    let n = g.num_nodes();
    let m = g.total_weight();
    let two_m = 2.0 * m;
    let degree: Vec<f64> = (0..n).map(|u| g.degree(u)).collect();
    let mut comm: Vec<u32> = (0..n as u32).collect();
    let mut tot = degree.clone();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng_for(seed, &[level as u64]));

    let mut link_w = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moves = 0usize;
        for &u in &order {
            let cu = comm[u];
            let ku = degree[u];
            for (v, w) in g.neighbors(u) {
                if v == u {
                    continue;
                }
                let cv = comm[v];
                if link_w[cv as usize] == 0.0 {
                    touched.push(cv);
                }
                link_w[cv as usize] += w;
            }
            tot[cu as usize] -= ku;

            let gain = |c: u32, link: f64| (link - resolution * tot[c as usize] * ku / two_m) / m;
            let mut best = cu;
            let mut best_gain = gain(cu, link_w[cu as usize]);
            touched.sort_unstable();
            for &c in &touched {
                if c == cu {
                    continue;
                }
                let gc = gain(c, link_w[c as usize]);
                if gc > best_gain + MOVE_TOLERANCE {
                    best = c;
                    best_gain = gc;
                }
            }
            for &c in &touched {
                link_w[c as usize] = 0.0;
            }
            touched.clear();

            tot[best as usize] += ku;
            if best != cu {
                comm[u] = best;
                moves += 1;
            }
        }
        if moves == 0 {
            break;
        }
        any_move = true;
    }
    let (dense, _) = relabel_dense(&comm);
    (dense, any_move)
}

/// Louvain community detection.
///
/// Edgeless graphs get one community per node and modularity 0.
pub fn louvain(graph: &Graph, resolution: f64, seed: u64) -> Result<CommunityAssignment> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::invalid("resolution must be positive"));
    }
    let n = graph.num_nodes();
    if graph.num_edges() == 0 {
        log::warn!("graph has no edges; returning singleton communities");
        return Ok(CommunityAssignment {
            communities: (0..n as u32).collect(),
            num_communities: n,
            modularity: 0.0,
            seed,
            resolution,
        });
    }

    let mut current = WeightedGraph::from_graph(graph);
    let mut node_comm: Vec<u32> = (0..n as u32).collect();
    let mut level = 0;
    loop {
        let (comm, moved) = local_moving(&current, resolution, seed, level);
        if !moved {
            break;
        }
        for c in node_comm.iter_mut() {
            *c = comm[*c as usize];
        }
        let next = current.aggregate(&comm);
        let shrunk = next.num_nodes() < current.num_nodes();
        current = next;
        level += 1;
        if !shrunk {
            break;
        }
    }
    let (communities, k) = relabel_dense(&node_comm);
    let q = modularity_at(graph, &communities, resolution)?;
    Ok(CommunityAssignment {
        communities,
        num_communities: k,
        modularity: q,
        seed,
        resolution,
    })
}
