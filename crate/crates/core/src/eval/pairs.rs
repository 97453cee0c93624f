//! Same-group pair datasets and pair feature construction.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GroupingKind, NodeGrouping};
use crate::seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOp {
    #[default]
    Hadamard,
    Average,
    Concat,
    AbsDiff,
}

impl std::str::FromStr for FeatureOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hadamard" => Ok(FeatureOp::Hadamard),
            "average" => Ok(FeatureOp::Average),
            "concat" => Ok(FeatureOp::Concat),
            "abs_diff" => Ok(FeatureOp::AbsDiff),
            other => Err(Error::invalid(format!("unknown pair op `{other}`"))),
        }
    }
}

/// Pair representation. For `Concat` the caller passes the lower-id node as
/// `u`.
pub fn pair_features(u: &[f32], v: &[f32], op: FeatureOp) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::invalid("pair vectors differ in dimension"));
    }
    let zip = u.iter().zip(v).map(|(&a, &b)| (a as f64, b as f64));
    Ok(match op {
        FeatureOp::Hadamard => zip.map(|(a, b)| a * b).collect(),
        FeatureOp::Average => zip.map(|(a, b)| (a + b) / 2.0).collect(),
        FeatureOp::AbsDiff => zip.map(|(a, b)| (a - b).abs()).collect(),
        FeatureOp::Concat => u.iter().chain(v).map(|&a| a as f64).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairDataset {
    /// `(u, v, same_group)` with `u < v`, indices into the grouping's nodes.
    pub pairs: Vec<(u32, u32, bool)>,
    pub feature_op: FeatureOp,
}

impl PairDataset {
    pub fn labels(&self) -> Vec<bool> {
        self.pairs.iter().map(|p| p.2).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairSampling {
    /// Uniform rejection sampling of `num_pairs` pairs.
    #[default]
    Sampled,
    /// Every pair of the scarcer class plus an equal-size uniform sample of
    /// the other.
    Exhaustive,
}

fn same_group(grouping: &NodeGrouping, u: usize, v: usize) -> bool {
    let (a, b) = (grouping.groups_of(u), grouping.groups_of(v));
    // both sorted
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    false
}

fn eligible_nodes(grouping: &NodeGrouping) -> Vec<u32> {
    (0..grouping.num_nodes() as u32)
        .filter(|&u| !grouping.groups_of(u as usize).is_empty())
        .collect()
}

fn enumerate_class(grouping: &NodeGrouping, nodes: &[u32], positive: bool) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for (i, &u) in nodes.iter().enumerate() {
        for &v in &nodes[i + 1..] {
            if same_group(grouping, u as usize, v as usize) == positive {
                out.push((u, v));
            }
        }
    }
    out
}

/// Balanced same-group / different-group pairs.
///
/// Partition groupings label a pair positive when both nodes share the
/// group; multilabel groupings when their label sets intersect. Nodes with no
/// labels are not sampled.
pub fn build_pair_dataset(
    grouping: &NodeGrouping,
    num_pairs: usize,
    seed: u64,
) -> Result<PairDataset> {
    build_pair_dataset_with(grouping, num_pairs, seed, PairSampling::Sampled)
}

pub fn build_pair_dataset_with(
    grouping: &NodeGrouping,
    num_pairs: usize,
    seed: u64,
    sampling: PairSampling,
) -> Result<PairDataset> {
    if grouping.kind() == GroupingKind::Partition && grouping.group_sizes().iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::Insufficient(
            "pair task needs at least two non-empty groups".into(),
        ));
    }
    let nodes = eligible_nodes(grouping);
    let mut rng = seed::rng(seed);

    if sampling == PairSampling::Exhaustive {
        let pos = enumerate_class(grouping, &nodes, true);
        let neg = enumerate_class(grouping, &nodes, false);
        let take = pos.len().min(neg.len());
        if take == 0 {
            return Err(Error::Insufficient("one pair class is empty".into()));
        }
        let mut pairs: Vec<(u32, u32, bool)> = Vec::with_capacity(2 * take);
        let (few, many, few_label) = if pos.len() <= neg.len() {
            (pos, neg, true)
        } else {
            (neg, pos, false)
        };
        let mut many = many;
        let (chosen, _) = many.partial_shuffle(&mut rng, take);
        pairs.extend(few.iter().map(|&(u, v)| (u, v, few_label)));
        pairs.extend(chosen.iter().map(|&(u, v)| (u, v, !few_label)));
        return Ok(PairDataset {
            pairs,
            feature_op: FeatureOp::default(),
        });
    }

    let want_pos = num_pairs / 2;
    let want_neg = num_pairs - want_pos;
    let n = nodes.len();
    if n < 2 {
        return Err(Error::Insufficient("fewer than two labelled nodes".into()));
    }
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let mut pos: Vec<(u32, u32)> = Vec::with_capacity(want_pos);
    let mut neg: Vec<(u32, u32)> = Vec::with_capacity(want_neg);
    let budget = 200 * num_pairs + 100_000;
    let mut attempts = 0;
    while (pos.len() < want_pos || neg.len() < want_neg) && attempts < budget {
        attempts += 1;
        let a = nodes[rng.gen_range(0..n)];
        let b = nodes[rng.gen_range(0..n)];
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.contains(&key) {
            continue;
        }
        let label = same_group(grouping, key.0 as usize, key.1 as usize);
        let bucket = if label { &mut pos } else { &mut neg };
        let want = if label { want_pos } else { want_neg };
        if bucket.len() < want {
            seen.insert(key);
            bucket.push(key);
        }
    }
    // A rare class exhausted the rejection budget: draw the remainder
    // uniformly from the full enumeration of that class.
    for (label, bucket, want) in [(true, &mut pos, want_pos), (false, &mut neg, want_neg)] {
        if bucket.len() >= want {
            continue;
        }
        let mut rest: Vec<(u32, u32)> = enumerate_class(grouping, &nodes, label)
            .into_iter()
            .filter(|p| !seen.contains(p))
            .collect();
        let need = want - bucket.len();
        if rest.len() < need {
            return Err(Error::Insufficient(format!(
                "only {} distinct {} pairs exist, {} requested",
                bucket.len() + rest.len(),
                if label { "same-group" } else { "cross-group" },
                want
            )));
        }
        let (chosen, _) = rest.partial_shuffle(&mut rng, need);
        bucket.extend_from_slice(chosen);
    }

    let mut pairs: Vec<(u32, u32, bool)> = pos
        .into_iter()
        .map(|(u, v)| (u, v, true))
        .chain(neg.into_iter().map(|(u, v)| (u, v, false)))
        .collect();
    pairs.shuffle(&mut rng);
    Ok(PairDataset {
        pairs,
        feature_op: FeatureOp::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(groups: &[u32]) -> NodeGrouping {
        NodeGrouping::partition(
            (0..groups.len()).map(|i| format!("n{i}")).collect(),
            groups,
        )
        .unwrap()
    }

    #[test]
    fn exhaustive_two_by_two() {
        let g = part(&[0, 0, 1, 1]);
        let ds = build_pair_dataset_with(&g, 0, 1, PairSampling::Exhaustive).unwrap();
        let pos: Vec<(u32, u32)> = ds.pairs.iter().filter(|p| p.2).map(|p| (p.0, p.1)).collect();
        assert_eq!(pos, vec![(0, 1), (2, 3)]);
        let neg: Vec<_> = ds.pairs.iter().filter(|p| !p.2).collect();
        assert_eq!(neg.len(), 2);
        for p in neg {
            assert!(p.0 < 2 && p.1 >= 2);
        }
    }

    #[test]
    fn single_group_errors() {
        assert!(build_pair_dataset(&part(&[0, 0, 0]), 2, 0).is_err());
    }

    #[test]
    fn too_many_pairs_errors() {
        // only one positive pair exists
        assert!(build_pair_dataset(&part(&[0, 0, 1, 2]), 4, 0).is_err());
        assert!(build_pair_dataset(&part(&[0, 0, 1, 2]), 2, 0).is_ok());
    }

    #[test]
    fn feature_ops() {
        let u = [1.0f32, 2.0];
        assert_eq!(pair_features(&u, &[1.0, 1.0], FeatureOp::Hadamard).unwrap(), vec![1.0, 2.0]);
        assert_eq!(pair_features(&u, &u, FeatureOp::AbsDiff).unwrap(), vec![0.0, 0.0]);
        assert_eq!(pair_features(&u, &[3.0, -1.0], FeatureOp::Hadamard).unwrap(), vec![3.0, -2.0]);
        assert_eq!(pair_features(&u, &[3.0, 0.0], FeatureOp::Average).unwrap(), vec![2.0, 1.0]);
        assert_eq!(
            pair_features(&u, &[3.0, 0.0], FeatureOp::Concat).unwrap(),
            vec![1.0, 2.0, 3.0, 0.0]
        );
        assert!(pair_features(&u, &[1.0], FeatureOp::Hadamard).is_err());
    }

    #[test]
    fn multilabel_intersection_label() {
        let g = NodeGrouping::multilabel(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec!["x".into(), "y".into(), "z".into()],
            vec![vec![0, 1], vec![1], vec![2], vec![]],
        )
        .unwrap();
        let ds = build_pair_dataset_with(&g, 0, 3, PairSampling::Exhaustive).unwrap();
        assert!(ds.pairs.iter().all(|p| p.1 != 3 && p.0 != 3));
        assert!(ds.pairs.contains(&(0, 1, true)));
    }
}
