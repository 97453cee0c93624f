#![allow(dead_code)]

pub mod oracles;

use graphlens::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Stochastic block model; returns the graph and each node's block.
pub fn sbm(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> (Graph, Vec<u32>) {
    let blocks: Vec<u32> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b as u32, s))
        .collect();
    let n = blocks.len();
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if blocks[u] == blocks[v] { p_in } else { p_out };
            if r.gen::<f64>() < p {
                edges.push((u as u32, v as u32));
            }
        }
    }
    (Graph::from_edges(n, &edges).unwrap(), blocks)
}

/// `count` disjoint cliques of `size` nodes.
pub fn cliques(count: usize, size: usize) -> Graph {
    let mut edges = Vec::new();
    for c in 0..count {
        let base = (c * size) as u32;
        for i in 0..size as u32 {
            for j in i + 1..size as u32 {
                edges.push((base + i, base + j));
            }
        }
    }
    Graph::from_edges(count * size, &edges).unwrap()
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}
