//! The task suite: pair and node classification on an internal (community)
//! and an external (label) grouping, plus link prediction.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::classifier::{stratified_split, train_classifier, ClassifierConfig, FeatureMatrix, Labels};
use crate::eval::link::{link_prediction_eval, LinkPredictionConfig};
use crate::eval::metrics::{binary_f1, micro_f1};
use crate::eval::pairs::{build_pair_dataset, pair_features, FeatureOp};
use crate::graph::{Graph, GroupingKind, NodeGrouping};
use crate::seed;
use crate::sgns::{EmbeddingMatrix, TrainConfig};
use crate::walk::WalkConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    GroupBinary,
    GroupMultilabel,
    GroupMulticlass,
    CommunityBinary,
    CommunityMulticlass,
    LinkPrediction,
}

impl TaskId {
    pub const ALL: [TaskId; 6] = [
        TaskId::GroupBinary,
        TaskId::GroupMultilabel,
        TaskId::GroupMulticlass,
        TaskId::CommunityBinary,
        TaskId::CommunityMulticlass,
        TaskId::LinkPrediction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskId::GroupBinary => "group_binary",
            TaskId::GroupMultilabel => "group_multilabel",
            TaskId::GroupMulticlass => "group_multiclass",
            TaskId::CommunityBinary => "community_binary",
            TaskId::CommunityMulticlass => "community_multiclass",
            TaskId::LinkPrediction => "link_prediction",
        }
    }
}

impl std::str::FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown task `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "F1")]
    F1,
    #[serde(rename = "micro-F1")]
    MicroF1,
    #[serde(rename = "AUC")]
    Auc,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::F1 => "F1",
            Metric::MicroF1 => "micro-F1",
            Metric::Auc => "AUC",
        }
    }
}

/// Everything needed to rerun one report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub dim: usize,
    pub seed: u64,
    pub feature_op: FeatureOp,
    pub test_fraction: Option<f64>,
    pub num_pairs: Option<usize>,
    pub holdout_fraction: Option<f64>,
    pub held_out_edges: Option<usize>,
    pub grouping: Option<String>,
    pub walk: Option<WalkConfig>,
    pub train: Option<TrainConfig>,
    pub classifier: ClassifierConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: TaskId,
    pub metric: Metric,
    pub value: f64,
    pub config: ReportConfig,
}

pub fn write_reports_json<W: Write>(reports: &[EvalReport], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, reports)?;
    Ok(())
}

/// CSV twin: `task,metric,value,dim,seed`.
pub fn write_reports_csv<W: Write>(reports: &[EvalReport], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["task", "metric", "value", "dim", "seed"])?;
    for r in reports {
        wr.write_record([
            r.task.as_str().to_owned(),
            r.metric.as_str().to_owned(),
            r.value.to_string(),
            r.config.dim.to_string(),
            r.config.seed.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub tasks: Vec<TaskId>,
    pub feature_op: FeatureOp,
    pub test_fraction: f64,
    pub num_pairs: usize,
    pub holdout_fraction: f64,
    pub classifier: ClassifierConfig,
    /// Walk settings for link-prediction retraining.
    pub walk: WalkConfig,
    /// Training settings for link-prediction retraining; `dim` follows the
    /// evaluated embedding.
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            tasks: TaskId::ALL.to_vec(),
            feature_op: FeatureOp::Hadamard,
            test_fraction: 0.2,
            num_pairs: 10_000,
            holdout_fraction: 0.2,
            classifier: ClassifierConfig::default(),
            walk: WalkConfig::deepwalk(0),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<EvalReport>,
    /// Cells that were skipped and why.
    pub notices: Vec<String>,
}

fn report_config(cfg: &SuiteConfig, dim: usize, seed: u64, grouping: &str) -> ReportConfig {
    ReportConfig {
        dim,
        seed,
        feature_op: cfg.feature_op,
        test_fraction: Some(cfg.test_fraction),
        num_pairs: None,
        holdout_fraction: None,
        held_out_edges: None,
        grouping: Some(grouping.to_owned()),
        walk: None,
        train: None,
        classifier: cfg.classifier.clone(),
    }
}

/// Same-group pair classification; returns held-out F1.
pub fn pair_task(
    embedding: &EmbeddingMatrix,
    grouping: &NodeGrouping,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<f64> {
    let grouping = grouping.canonicalized();
    let emb = embedding.aligned_to(grouping.node_ids())?;
    let ds = build_pair_dataset(&grouping, cfg.num_pairs, seed::derive(seed, "pairs"))?;
    let rows: Vec<Vec<f64>> = ds
        .pairs
        .iter()
        .map(|&(u, v, _)| pair_features(emb.row(u as usize), emb.row(v as usize), cfg.feature_op))
        .collect::<Result<_>>()?;
    let x = FeatureMatrix::from_rows(&rows)?;
    let y = ds.labels();
    let strata: Vec<usize> = y.iter().map(|&l| l as usize).collect();
    let (train, test) = stratified_split(&strata, cfg.test_fraction, seed::derive(seed, "split"))?;
    let classifier = ClassifierConfig {
        seed: seed::derive(seed, "classifier"),
        ..cfg.classifier.clone()
    };
    let model = train_classifier(
        &x.select(&train),
        &Labels::Binary(train.iter().map(|&i| y[i]).collect()),
        &classifier,
    )?;
    let predicted: Vec<bool> = test.iter().map(|&i| model.predict_binary(x.row(i))).collect();
    let truth: Vec<bool> = test.iter().map(|&i| y[i]).collect();
    binary_f1(&predicted, &truth)
}

/// Node classification. Partitions use softmax regression; multilabel
/// groupings use one-vs-rest with top-r prediction, r being the node's true
/// label count. Returns held-out micro-F1.
pub fn node_task(
    embedding: &EmbeddingMatrix,
    grouping: &NodeGrouping,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<f64> {
    let grouping = grouping.canonicalized();
    let labelled: Vec<usize> = (0..grouping.num_nodes())
        .filter(|&u| !grouping.groups_of(u).is_empty())
        .collect();
    let names: Vec<String> = labelled
        .iter()
        .map(|&u| grouping.node_ids()[u].clone())
        .collect();
    let emb = embedding.aligned_to(&names)?;
    let x = FeatureMatrix::new(
        emb.rows(),
        emb.dim(),
        emb.vectors().iter().map(|&v| v as f64).collect(),
    )?;
    let sets: Vec<Vec<u32>> = labelled
        .iter()
        .map(|&u| grouping.groups_of(u).to_vec())
        .collect();
    let strata: Vec<usize> = sets.iter().map(|s| s[0] as usize).collect();
    let (train, test) = stratified_split(&strata, cfg.test_fraction, seed::derive(seed, "split"))?;
    let classifier = ClassifierConfig {
        seed: seed::derive(seed, "classifier"),
        ..cfg.classifier.clone()
    };
    let classes = grouping.num_groups();
    let truth: Vec<Vec<u32>> = test.iter().map(|&i| sets[i].clone()).collect();
    let predicted: Vec<Vec<u32>> = match grouping.kind() {
        GroupingKind::Partition => {
            let labels = Labels::Multiclass {
                labels: train.iter().map(|&i| sets[i][0] as usize).collect(),
                classes,
            };
            let model = train_classifier(&x.select(&train), &labels, &classifier)?;
            test.iter()
                .map(|&i| vec![model.predict_class(x.row(i)) as u32])
                .collect()
        }
        GroupingKind::Multilabel => {
            let labels = Labels::Multilabel {
                sets: train.iter().map(|&i| sets[i].clone()).collect(),
                classes,
            };
            let model = train_classifier(&x.select(&train), &labels, &classifier)?;
            test.iter()
                .map(|&i| model.predict_top(x.row(i), sets[i].len()))
                .collect()
        }
    };
    micro_f1(&predicted, &truth)
}

/// Run every requested task that its inputs allow.
///
/// Cells whose grouping is missing are skipped and listed in `notices`.
pub fn run_task_suite(
    embedding: &EmbeddingMatrix,
    graph: &Graph,
    internal: Option<&NodeGrouping>,
    external: Option<&NodeGrouping>,
    config: &SuiteConfig,
) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    let dim = embedding.dim();
    for &task in &config.tasks {
        let task_seed = seed::derive(config.seed, task.as_str());
        let (grouping, name) = match task {
            TaskId::GroupBinary | TaskId::GroupMultilabel | TaskId::GroupMulticlass => {
                (external, "external")
            }
            TaskId::CommunityBinary | TaskId::CommunityMulticlass => (internal, "internal"),
            TaskId::LinkPrediction => (None, "graph"),
        };
        if task != TaskId::LinkPrediction && grouping.is_none() {
            out.notices
                .push(format!("{}: skipped, no {name} grouping", task.as_str()));
            continue;
        }
        let report = match task {
            TaskId::GroupBinary | TaskId::CommunityBinary => {
                let g = grouping.unwrap();
                let mut rc = report_config(config, dim, task_seed, name);
                rc.num_pairs = Some(config.num_pairs);
                EvalReport {
                    task,
                    metric: Metric::F1,
                    value: pair_task(embedding, g, config, task_seed)?,
                    config: rc,
                }
            }
            TaskId::GroupMultilabel | TaskId::GroupMulticlass | TaskId::CommunityMulticlass => {
                let g = grouping.unwrap();
                let expected = if task == TaskId::GroupMultilabel {
                    GroupingKind::Multilabel
                } else {
                    GroupingKind::Partition
                };
                if g.kind() != expected {
                    out.notices.push(format!(
                        "{}: skipped, {name} grouping is a {:?}",
                        task.as_str(),
                        g.kind()
                    ));
                    continue;
                }
                EvalReport {
                    task,
                    metric: Metric::MicroF1,
                    value: node_task(embedding, g, config, task_seed)?,
                    config: report_config(config, dim, task_seed, name),
                }
            }
            TaskId::LinkPrediction => {
                let lp = LinkPredictionConfig {
                    holdout_fraction: config.holdout_fraction,
                    walk: WalkConfig {
                        seed: seed::derive(task_seed, "walk"),
                        ..config.walk
                    },
                    train: TrainConfig {
                        dim,
                        seed: seed::derive(task_seed, "train"),
                        ..config.train.clone()
                    },
                    classifier: config.classifier.clone(),
                    feature_op: config.feature_op,
                    seed: task_seed,
                };
                link_prediction_eval(graph, &lp)?
            }
        };
        out.reports.push(report);
    }
    for n in &out.notices {
        log::info!("{n}");
    }
    Ok(out)
}
