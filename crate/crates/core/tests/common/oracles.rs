use std::collections::HashSet;

use graphlens::louvain;
use graphlens::sgns::sgns_loss_and_grads;
use graphlens::Graph;

/// Σ_c [e_c/m − (d_c/2m)²] straight from the edge list.
pub fn modularity_oracle(g: &Graph, comm: &[u32]) -> f64 {
    let m = g.num_edges() as f64;
    let k = comm.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut e = vec![0.0; k];
    let mut d = vec![0.0; k];
    for (u, v) in g.edges() {
        if comm[u as usize] == comm[v as usize] {
            e[comm[u as usize] as usize] += 1.0;
        }
    }
    for u in 0..g.num_nodes() {
        d[comm[u] as usize] += g.degree(u as u32) as f64;
    }
    (0..k).map(|c| e[c] / m - (d[c] / (2.0 * m)).powi(2)).sum()
}

/// Every set partition of `n` nodes as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    fn rec(pos: usize, n: usize, cur: &mut Vec<u32>, max: u32, out: &mut Vec<Vec<u32>>) {
        if pos == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            if pos == 0 && c > 0 {
                break;
            }
            cur.push(c);
            rec(pos + 1, n, cur, max.max(c), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        let mut cur = Vec::new();
        rec(0, n, &mut cur, 0, &mut out);
    }
    out.iter_mut().for_each(|p| {
        // first element was forced to 0 with max 0; ids may skip, keep them dense
        *p = louvain::relabel_dense(p).0;
    });
    out.sort();
    out.dedup();
    out
}

/// Small graphs with planted community structure, n <= 8.
pub fn structured_test_set() -> Vec<Graph> {
    let mut set = vec![
        super::cliques(2, 4),
        super::cliques(2, 3),
        Graph::from_edges(8, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 6), (6, 3), (6, 7)]).unwrap(),
        // two squares with diagonals joined by one edge
        Graph::from_edges(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (4, 5), (5, 6), (6, 7), (7, 4), (4, 6), (3, 4)],
        )
        .unwrap(),
        // K5 and K3 joined by an edge
        Graph::from_edges(
            8,
            &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4), (5, 6), (6, 7), (5, 7), (4, 5)],
        )
        .unwrap(),
        // two triangles joined by a three-edge path
        Graph::from_edges(8, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 6), (6, 7), (7, 3)]).unwrap(),
    ];
    // two planted blocks of four
    for seed in 0..30u64 {
        let (g, _) = super::sbm(&[4, 4], 0.9, 0.1, 500 + seed);
        if g.num_edges() > 0 {
            set.push(g);
        }
    }
    // three planted blocks
    for seed in 0..10u64 {
        let (g, _) = super::sbm(&[3, 3, 2], 1.0, 0.08, 900 + seed);
        if g.num_edges() > 0 {
            set.push(g);
        }
    }
    set
}

pub fn optimum(g: &Graph, partitions: &[Vec<u32>]) -> f64 {
    partitions
        .iter()
        .map(|p| modularity_oracle(g, &p[..g.num_nodes()]))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn sgns_loss(u: &[f64], v: &[f64], negs: &[Vec<f64>]) -> f64 {
    let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
    sgns_loss_and_grads(u, v, &refs).unwrap().loss
}

/// Central difference of `sgns_loss` in coordinate `i` of the vector picked by `which`.
pub fn central_difference(u: &[f64], v: &[f64], negs: &[Vec<f64>], which: usize, i: usize, h: f64) -> f64 {
    let bump = |delta: f64| {
        let (mut u, mut v, mut negs) = (u.to_vec(), v.to_vec(), negs.to_vec());
        match which {
            0 => u[i] += delta,
            1 => v[i] += delta,
            n => negs[n - 2][i] += delta,
        }
        sgns_loss(&u, &v, &negs)
    };
    (bump(h) - bump(-h)) / (2.0 * h)
}

pub fn max_gradient_error(u: &[f64], v: &[f64], negs: &[Vec<f64>]) -> f64 {
    let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
    let g = sgns_loss_and_grads(u, v, &refs).unwrap();
    let mut worst = 0.0f64;
    for i in 0..u.len() {
        worst = worst.max((g.center[i] - central_difference(u, v, negs, 0, i, 1e-5)).abs());
        worst = worst.max((g.context[i] - central_difference(u, v, negs, 1, i, 1e-5)).abs());
        for (n, gn) in g.negatives.iter().enumerate() {
            worst = worst.max((gn[i] - central_difference(u, v, negs, n + 2, i, 1e-5)).abs());
        }
    }
    worst
}

/// Sort, slice, intersect.
pub fn naive_overlap(column: &[f32], members: &[usize], k: usize, top: bool) -> f64 {
    let mut idx: Vec<usize> = (0..column.len()).collect();
    if top {
        idx.sort_by(|&a, &b| column[b].partial_cmp(&column[a]).unwrap().then(a.cmp(&b)));
    } else {
        idx.sort_by(|&a, &b| column[a].partial_cmp(&column[b]).unwrap().then(a.cmp(&b)));
    }
    let chosen: HashSet<usize> = idx[..k].iter().copied().collect();
    let hits = members.iter().filter(|m| chosen.contains(m)).count();
    hits as f64 / members.len() as f64 * 100.0
}

pub fn exhaustive_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0u64, 0u64);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                pairs += 2;
                wins += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
    }
    wins as f64 / pairs as f64
}

