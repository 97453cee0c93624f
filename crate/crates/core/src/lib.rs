//! Random-walk node embeddings, interpretability scoring and downstream
//! evaluation.
//!
//! The pipeline is: load a [`graph::Graph`], generate a walk corpus with
//! [`walk`], train skip-gram embeddings with [`sgns`], detect communities with
//! [`louvain`], score how strongly each embedding dimension aligns with node
//! groups using [`interpret`], and measure downstream quality with [`eval`].
//! [`pipeline`] ties the stages together behind the `graphlens` binary.

pub mod error;
pub mod eval;
pub mod graph;
pub mod interpret;
pub mod louvain;
pub mod pipeline;
pub mod seed;
pub mod sgns;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Graph, GraphStats, GroupingKind, NodeGrouping};
pub use interpret::{Agg, ISConfig, ISMatrix, KMode, TieRule};
pub use louvain::CommunityAssignment;
pub use sgns::{EmbeddingMatrix, TrainConfig, Vocab};
pub use walk::{WalkConfig, WalkCorpus};
