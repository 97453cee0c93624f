//! Interpretability scores.
//!
//! For an embedding dimension `d` and node group `C_l`, the top score is the
//! percentage of `C_l` found among the `k` nodes with the largest values in
//! column `d`; the bottom score uses the `k` smallest values. By default
//! `k = |C_l|`. Scores are then combined across directions (`agg2`) and
//! reduced over groups (per dimension) or over dimensions (per group) with
//! `agg1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeGrouping;
use crate::sgns::EmbeddingMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KMode {
    #[default]
    GroupCardinality,
    Fixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agg {
    #[default]
    Max,
    Avg,
}

impl Agg {
    pub fn pair(self, a: f64, b: f64) -> f64 {
        match self {
            Agg::Max => a.max(b),
            Agg::Avg => (a + b) / 2.0,
        }
    }

    /// Reduce in iteration order; an empty input gives 0.
    pub fn reduce(self, values: impl Iterator<Item = f64>) -> f64 {
        let mut n = 0usize;
        let mut acc = match self {
            Agg::Max => f64::NEG_INFINITY,
            Agg::Avg => 0.0,
        };
        for v in values {
            n += 1;
            acc = match self {
                Agg::Max => acc.max(v),
                Agg::Avg => acc + v,
            };
        }
        match (self, n) {
            (_, 0) => 0.0,
            (Agg::Max, _) => acc,
            (Agg::Avg, n) => acc / n as f64,
        }
    }
}

macro_rules! from_str_lower {
    ($ty:ty { $($s:literal => $v:expr),* $(,)? }) => {
        impl std::str::FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)*
                    other => Err(Error::invalid(format!("unknown value `{other}`"))),
                }
            }
        }
    };
}

from_str_lower!(Agg { "max" => Agg::Max, "avg" => Agg::Avg });
from_str_lower!(KMode {
    "group_cardinality" => KMode::GroupCardinality,
    "cardinality" => KMode::GroupCardinality,
    "fixed" => KMode::Fixed,
});

/// Order among nodes with equal values in a column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// The lower row index ranks first in both directions.
    #[default]
    LowestIdFirst,
    HighestIdFirst,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ISConfig {
    pub k_mode: KMode,
    pub fixed_k: usize,
    pub agg1: Agg,
    pub agg2: Agg,
    pub tie_rule: TieRule,
}

impl ISConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_mode == KMode::Fixed && self.fixed_k < 1 {
            return Err(Error::invalid("fixed_k must be >= 1 in fixed mode"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Top,
    Bottom,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Top => "top",
            Direction::Bottom => "bottom",
        }
    }
}

/// Row indices of `column` ranked for `direction` under `tie`.
pub fn ranked_rows(column: &[f32], direction: Direction, tie: TieRule) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..column.len()).collect();
    idx.sort_by(|&a, &b| {
        let by_value = match direction {
            Direction::Top => column[b].total_cmp(&column[a]),
            Direction::Bottom => column[a].total_cmp(&column[b]),
        };
        let by_id = match tie {
            TieRule::LowestIdFirst => a.cmp(&b),
            TieRule::HighestIdFirst => b.cmp(&a),
        };
        by_value.then(by_id)
    });
    idx
}

fn k_nodes(
    embedding: &EmbeddingMatrix,
    d: usize,
    k: usize,
    direction: Direction,
    tie: TieRule,
) -> Result<Vec<usize>> {
    if d >= embedding.dim() {
        return Err(Error::invalid(format!(
            "dimension {d} out of range for D = {}",
            embedding.dim()
        )));
    }
    if k < 1 || k > embedding.rows() {
        return Err(Error::invalid(format!(
            "k = {k} must lie in 1..={}",
            embedding.rows()
        )));
    }
    let mut rows = ranked_rows(&embedding.column(d), direction, tie);
    rows.truncate(k);
    rows.sort_unstable();
    Ok(rows)
}

/// The `k` rows with the largest values in column `d`, sorted by row.
pub fn top_k_nodes(embedding: &EmbeddingMatrix, d: usize, k: usize, tie: TieRule) -> Result<Vec<usize>> {
    k_nodes(embedding, d, k, Direction::Top, tie)
}

/// The `k` rows with the smallest values in column `d`, sorted by row.
pub fn bottom_k_nodes(
    embedding: &EmbeddingMatrix,
    d: usize,
    k: usize,
    tie: TieRule,
) -> Result<Vec<usize>> {
    k_nodes(embedding, d, k, Direction::Bottom, tie)
}

/// Scores for every (dimension, group) cell plus their aggregations.
///
/// Matrices are row-major `dims × groups`. Columns cover only non-empty
/// groups; `group_index` maps them back to the source grouping.
#[derive(Clone, Debug, PartialEq)]
pub struct ISMatrix {
    pub dims: usize,
    pub group_index: Vec<usize>,
    pub group_names: Vec<String>,
    pub top: Vec<f64>,
    pub bottom: Vec<f64>,
    pub per_dimension: Vec<f64>,
    pub per_group: Vec<f64>,
    pub skipped_groups: Vec<String>,
    pub config: ISConfig,
}

impl ISMatrix {
    pub fn groups(&self) -> usize {
        self.group_index.len()
    }

    pub fn top(&self, d: usize, l: usize) -> f64 {
        self.top[d * self.groups() + l]
    }

    pub fn bottom(&self, d: usize, l: usize) -> f64 {
        self.bottom[d * self.groups() + l]
    }

    pub fn combined(&self, d: usize, l: usize) -> f64 {
        self.config.agg2.pair(self.top(d, l), self.bottom(d, l))
    }
}

/// Compute top and bottom scores. Embedding rows and grouping nodes are
/// matched by external id; every grouping node must have a row.
pub fn is_scores(
    embedding: &EmbeddingMatrix,
    grouping: &NodeGrouping,
    config: &ISConfig,
) -> Result<ISMatrix> {
    config.validate()?;
    let index = embedding.index();
    let mut row_of: Vec<Option<usize>> = Vec::with_capacity(grouping.num_nodes());
    let mut missing = Vec::new();
    for id in grouping.node_ids() {
        let r = index.get(id.as_str()).copied();
        if r.is_none() {
            missing.push(id.clone());
        }
        row_of.push(r);
    }
    if !missing.is_empty() {
        if missing.len() == grouping.num_nodes() {
            return Err(Error::invalid(
                "grouping and embedding share no nodes",
            ));
        }
        missing.truncate(20);
        return Err(Error::UnknownNodes(missing));
    }

    let mut group_index = Vec::new();
    let mut group_names = Vec::new();
    let mut skipped = Vec::new();
    let mut member_rows: Vec<Vec<usize>> = Vec::new();
    for (l, members) in grouping.members().into_iter().enumerate() {
        let name = grouping.group_names()[l].clone();
        if members.is_empty() {
            log::warn!("skipping empty group `{name}`");
            skipped.push(name);
            continue;
        }
        group_index.push(l);
        group_names.push(name);
        member_rows.push(members.iter().map(|&u| row_of[u as usize].unwrap()).collect());
    }

    let n = embedding.rows();
    if config.k_mode == KMode::Fixed && config.fixed_k > n {
        return Err(Error::invalid(format!("fixed_k = {} exceeds N = {n}", config.fixed_k)));
    }
    let dims = embedding.dim();
    let groups = group_index.len();
    let mut top = vec![0.0; dims * groups];
    let mut bottom = vec![0.0; dims * groups];
    let mut rank_top = vec![0usize; n];
    let mut rank_bottom = vec![0usize; n];
    for d in 0..dims {
        let col = embedding.column(d);
        for (pos, r) in ranked_rows(&col, Direction::Top, config.tie_rule).into_iter().enumerate() {
            rank_top[r] = pos;
        }
        for (pos, r) in ranked_rows(&col, Direction::Bottom, config.tie_rule)
            .into_iter()
            .enumerate()
        {
            rank_bottom[r] = pos;
        }
        for (l, rows) in member_rows.iter().enumerate() {
            let k = match config.k_mode {
                KMode::GroupCardinality => rows.len(),
                KMode::Fixed => config.fixed_k,
            };
            let size = rows.len() as f64;
            let in_top = rows.iter().filter(|&&r| rank_top[r] < k).count();
            let in_bottom = rows.iter().filter(|&&r| rank_bottom[r] < k).count();
            top[d * groups + l] = in_top as f64 / size * 100.0;
            bottom[d * groups + l] = in_bottom as f64 / size * 100.0;
        }
    }
    Ok(ISMatrix {
        dims,
        group_index,
        group_names,
        top,
        bottom,
        per_dimension: Vec::new(),
        per_group: Vec::new(),
        skipped_groups: skipped,
        config: *config,
    })
}

/// Fill `per_dimension` and `per_group` using `config`'s aggregations.
pub fn aggregate(matrix: &ISMatrix, config: &ISConfig) -> ISMatrix {
    let mut out = matrix.clone();
    out.config.agg1 = config.agg1;
    out.config.agg2 = config.agg2;
    let (dims, groups) = (out.dims, out.groups());
    out.per_dimension = (0..dims)
        .map(|d| config.agg1.reduce((0..groups).map(|l| out.combined(d, l))))
        .collect();
    out.per_group = (0..groups)
        .map(|l| config.agg1.reduce((0..dims).map(|d| out.combined(d, l))))
        .collect();
    out
}

/// Scores and aggregations in one call.
pub fn interpretability(
    embedding: &EmbeddingMatrix,
    grouping: &NodeGrouping,
    config: &ISConfig,
) -> Result<ISMatrix> {
    Ok(aggregate(&is_scores(embedding, grouping, config)?, config))
}

/// Long-format CSV `dimension,group,direction,score` for the selected dims.
pub fn export_is_heatmap(matrix: &ISMatrix, dims: &[usize]) -> Result<String> {
    if let Some(&bad) = dims.iter().find(|&&d| d >= matrix.dims) {
        return Err(Error::invalid(format!(
            "dimension {bad} out of range for D = {}",
            matrix.dims
        )));
    }
    let mut out = String::from("dimension,group,direction,score\n");
    for &d in dims {
        for l in 0..matrix.groups() {
            let name = &matrix.group_names[l];
            writeln!(out, "{d},{name},top,{}", matrix.top(d, l)).unwrap();
            writeln!(out, "{d},{name},bottom,{}", matrix.bottom(d, l)).unwrap();
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Summary<'a> {
    per_dimension: &'a [f64],
    per_group: BTreeMap<&'a str, f64>,
    group_order: &'a [String],
    skipped_groups: &'a [String],
    config: &'a ISConfig,
}

/// JSON summary `{per_dimension, per_group, config}`.
pub fn summary_json(matrix: &ISMatrix) -> Result<String> {
    let per_group = matrix
        .group_names
        .iter()
        .map(String::as_str)
        .zip(matrix.per_group.iter().copied())
        .collect();
    Ok(serde_json::to_string_pretty(&Summary {
        per_dimension: &matrix.per_dimension,
        per_group,
        group_order: &matrix.group_names,
        skipped_groups: &matrix.skipped_groups,
        config: &matrix.config,
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(cols: &[&[f32]]) -> EmbeddingMatrix {
        let n = cols[0].len();
        let d = cols.len();
        let mut v = Vec::new();
        for r in 0..n {
            for c in cols {
                v.push(c[r]);
            }
        }
        EmbeddingMatrix::from_parts((0..n).map(|i| i.to_string()).collect(), d, v).unwrap()
    }

    #[test]
    fn strict_ordering() {
        let e = emb(&[&[3.0, 1.0, 2.0]]);
        assert_eq!(top_k_nodes(&e, 0, 1, TieRule::LowestIdFirst).unwrap(), vec![0]);
        assert_eq!(bottom_k_nodes(&e, 0, 1, TieRule::LowestIdFirst).unwrap(), vec![1]);
        assert_eq!(top_k_nodes(&e, 0, 3, TieRule::LowestIdFirst).unwrap(), vec![0, 1, 2]);
        assert_eq!(bottom_k_nodes(&e, 0, 3, TieRule::LowestIdFirst).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn ties_lowest_id_first() {
        let e = emb(&[&[5.0, 5.0, 1.0]]);
        assert_eq!(top_k_nodes(&e, 0, 1, TieRule::LowestIdFirst).unwrap(), vec![0]);
        assert_eq!(top_k_nodes(&e, 0, 1, TieRule::HighestIdFirst).unwrap(), vec![1]);
    }

    #[test]
    fn k_out_of_range() {
        let e = emb(&[&[5.0, 5.0, 1.0]]);
        assert!(top_k_nodes(&e, 0, 4, TieRule::LowestIdFirst).is_err());
        assert!(top_k_nodes(&e, 0, 0, TieRule::LowestIdFirst).is_err());
        assert!(top_k_nodes(&e, 1, 1, TieRule::LowestIdFirst).is_err());
    }

    fn partition(n: usize, groups: &[u32]) -> NodeGrouping {
        NodeGrouping::partition((0..n).map(|i| i.to_string()).collect(), groups).unwrap()
    }

    #[test]
    fn full_and_empty_overlap() {
        let e = emb(&[&[9.0, 8.0, 1.0, 0.0]]);
        let g = partition(4, &[0, 0, 1, 1]);
        let m = is_scores(&e, &g, &ISConfig::default()).unwrap();
        assert_eq!(m.top(0, 0), 100.0);
        assert_eq!(m.top(0, 1), 0.0);
        assert_eq!(m.bottom(0, 1), 100.0);
        assert_eq!(m.bottom(0, 0), 0.0);
    }

    #[test]
    fn empty_groups_skipped() {
        let e = emb(&[&[1.0, 2.0]]);
        let g = NodeGrouping::multilabel(
            vec!["0".into(), "1".into()],
            vec!["a".into(), "b".into()],
            vec![vec![0], vec![0]],
        )
        .unwrap();
        let m = is_scores(&e, &g, &ISConfig::default()).unwrap();
        assert_eq!(m.groups(), 1);
        assert_eq!(m.skipped_groups, vec!["b".to_string()]);
    }

    #[test]
    fn disjoint_universe_errors() {
        let e = emb(&[&[1.0, 2.0]]);
        let g = NodeGrouping::partition(vec!["x".into(), "y".into()], &[0, 0]).unwrap();
        assert!(is_scores(&e, &g, &ISConfig::default()).is_err());
    }

    #[test]
    fn fixed_k_mode() {
        let e = emb(&[&[4.0, 3.0, 2.0, 1.0]]);
        let g = partition(4, &[0, 1, 1, 1]);
        let cfg = ISConfig {
            k_mode: KMode::Fixed,
            fixed_k: 2,
            ..Default::default()
        };
        let m = is_scores(&e, &g, &cfg).unwrap();
        assert_eq!(m.top(0, 0), 100.0);
        assert!((m.top(0, 1) - 100.0 / 3.0).abs() < 1e-12);
        let bad = ISConfig {
            k_mode: KMode::Fixed,
            fixed_k: 0,
            ..Default::default()
        };
        assert!(is_scores(&e, &g, &bad).is_err());
    }

    #[test]
    fn hand_reduction_max() {
        let m = ISMatrix {
            dims: 2,
            group_index: vec![0, 1],
            group_names: vec!["a".into(), "b".into()],
            top: vec![10.0, 90.0, 50.0, 50.0],
            bottom: vec![10.0, 90.0, 50.0, 50.0],
            per_dimension: vec![],
            per_group: vec![],
            skipped_groups: vec![],
            config: ISConfig::default(),
        };
        let a = aggregate(&m, &ISConfig::default());
        assert_eq!(a.per_dimension, vec![90.0, 50.0]);
        assert_eq!(a.per_group, vec![50.0, 90.0]);
    }

    #[test]
    fn heatmap_rows_and_errors() {
        let e = emb(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]]);
        let g = partition(3, &[0, 1, 1]);
        let m = interpretability(&e, &g, &ISConfig::default()).unwrap();
        let csv = export_is_heatmap(&m, &[1]).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        assert_eq!(export_is_heatmap(&m, &[]).unwrap(), "dimension,group,direction,score\n");
        assert!(export_is_heatmap(&m, &[2]).is_err());
        let js: serde_json::Value = serde_json::from_str(&summary_json(&m).unwrap()).unwrap();
        assert_eq!(js["per_dimension"].as_array().unwrap().len(), 2);
        assert_eq!(js["config"]["agg1"], "max");
    }
}
