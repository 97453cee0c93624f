//! Link prediction with held-out edges.
//!
//! Protocol: hold out a fraction of edges while keeping a random spanning
//! forest (so no component splits and no node is isolated), retrain
//! embeddings on the residual graph, fit a logistic classifier on pair
//! features of residual edges against non-edges, then score held-out edges
//! against a disjoint set of non-edges by AUC.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::classifier::{train_classifier, ClassifierConfig, FeatureMatrix, Labels};
use crate::eval::metrics::auc;
use crate::eval::pairs::{pair_features, FeatureOp};
use crate::eval::suite::{EvalReport, Metric, ReportConfig, TaskId};
use crate::graph::{sample_non_edges, Graph};
use crate::seed;
use crate::sgns::{self, EmbeddingMatrix, TrainConfig};
use crate::walk::{generate_walks, WalkConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkPredictionConfig {
    pub holdout_fraction: f64,
    pub walk: WalkConfig,
    pub train: TrainConfig,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub feature_op: FeatureOp,
    pub seed: u64,
}

/// Residual graph and held-out edges.
#[derive(Clone, Debug)]
pub struct EdgeSplit {
    pub residual: Graph,
    pub held_out: Vec<(u32, u32)>,
}

struct DisjointSet(Vec<u32>);

impl DisjointSet {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.0[x as usize] != x {
            let p = self.0[x as usize];
            self.0[x as usize] = self.0[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra as usize] = rb;
        true
    }
}

/// Remove `round(fraction · E)` edges, never touching a random spanning
/// forest of the graph.
pub fn split_edges(graph: &Graph, fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(fraction > 0.0 && fraction < 0.5) {
        return Err(Error::invalid("holdout fraction must lie in (0, 0.5)"));
    }
    let target = (fraction * graph.num_edges() as f64).round() as usize;
    let mut edges: Vec<(u32, u32)> = graph.edges().collect();
    let mut rng = seed::rng(seed);
    edges.shuffle(&mut rng);

    let mut dsu = DisjointSet((0..graph.num_nodes() as u32).collect());
    let mut keep = Vec::with_capacity(edges.len());
    let mut removable = Vec::new();
    for &(u, v) in &edges {
        if dsu.union(u, v) {
            keep.push((u, v));
        } else {
            removable.push((u, v));
        }
    }
    if target == 0 || removable.len() < target {
        return Err(Error::Insufficient(format!(
            "graph too small: {} removable edges, {target} requested",
            removable.len()
        )));
    }
    let held_out: Vec<(u32, u32)> = removable[..target].to_vec();
    keep.extend_from_slice(&removable[target..]);
    let residual = Graph::from_named_edges(graph.ids().to_vec(), keep)?;
    Ok(EdgeSplit { residual, held_out })
}

fn features_for(
    emb: &EmbeddingMatrix,
    pairs: &[(u32, u32)],
    op: FeatureOp,
) -> Result<Vec<Vec<f64>>> {
    pairs
        .iter()
        .map(|&(u, v)| pair_features(emb.row(u as usize), emb.row(v as usize), op))
        .collect()
}

pub fn link_prediction_eval(graph: &Graph, config: &LinkPredictionConfig) -> Result<EvalReport> {
    let split = split_edges(graph, config.holdout_fraction, seed::derive(config.seed, "lp/split"))?;
    let h = split.held_out.len();

    let negatives = sample_non_edges(graph, 2 * h, seed::derive(config.seed, "lp/negatives"))?;
    let (test_neg, train_neg) = negatives.split_at(h);

    let mut train_pos: Vec<(u32, u32)> = split.residual.edges().collect();
    train_pos.shuffle(&mut seed::rng(seed::derive(config.seed, "lp/positives")));
    train_pos.truncate(h);

    let corpus = generate_walks(&split.residual, &config.walk)?;
    let emb = sgns::train(&corpus, &config.train)?.aligned_to(graph.ids())?;

    let op = config.feature_op;
    let mut train_x = features_for(&emb, &train_pos, op)?;
    train_x.extend(features_for(&emb, train_neg, op)?);
    let train_y: Vec<bool> = std::iter::repeat_n(true, train_pos.len())
        .chain(std::iter::repeat_n(false, train_neg.len()))
        .collect();
    let model = train_classifier(
        &FeatureMatrix::from_rows(&train_x)?,
        &Labels::Binary(train_y),
        &config.classifier,
    )?;

    let mut scores = Vec::with_capacity(2 * h);
    let mut labels = Vec::with_capacity(2 * h);
    for (pairs, label) in [(&split.held_out[..], true), (test_neg, false)] {
        for x in features_for(&emb, pairs, op)? {
            scores.push(model.decision(&x)[0]);
            labels.push(label);
        }
    }
    let value = auc(&scores, &labels)?;
    Ok(EvalReport {
        task: TaskId::LinkPrediction,
        metric: Metric::Auc,
        value,
        config: ReportConfig {
            dim: config.train.dim,
            seed: config.seed,
            feature_op: op,
            test_fraction: None,
            num_pairs: None,
            holdout_fraction: Some(config.holdout_fraction),
            held_out_edges: Some(h),
            grouping: None,
            walk: Some(config.walk),
            train: Some(config.train.clone()),
            classifier: config.classifier.clone(),
        },
    })
}
