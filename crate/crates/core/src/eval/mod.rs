//! Downstream evaluation: pair and node classification, link prediction and
//! their metrics.

pub mod classifier;
pub mod link;
pub mod metrics;
pub mod pairs;
pub mod suite;

pub use classifier::{ClassifierConfig, Labels, LinearModel};
pub use link::{link_prediction_eval, LinkPredictionConfig};
pub use metrics::{auc, binary_f1, micro_f1};
pub use pairs::{build_pair_dataset, pair_features, FeatureOp, PairDataset};
pub use suite::{run_task_suite, EvalReport, Metric, SuiteConfig, TaskId};
