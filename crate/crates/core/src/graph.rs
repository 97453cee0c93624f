//! Undirected graphs in compressed sparse row form, node groupings and
//! dataset statistics.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// How tokens on an edge-list line are separated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Whitespace,
    Comma,
}

impl std::str::FromStr for Delimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitespace" | "ws" => Ok(Delimiter::Whitespace),
            "comma" | "," => Ok(Delimiter::Comma),
            other => Err(Error::invalid(format!("unknown delimiter `{other}`"))),
        }
    }
}

impl Delimiter {
    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Whitespace => line.split_whitespace().collect(),
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EdgeListOptions {
    pub delimiter: Delimiter,
}

/// Immutable undirected, unweighted graph.
///
/// Dense node ids are `0..num_nodes`. Neighbor lists are sorted and free of
/// self-loops and duplicates.
#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    ids: Vec<String>,
    index: HashMap<String, u32>,
    self_loops_dropped: usize,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.offsets == other.offsets && self.neighbors == other.neighbors && self.ids == other.ids
    }
}

impl Graph {
    /// Build from dense-id edges. Reverse duplicates, repeats and self-loops
    /// are removed.
    pub fn from_edges(num_nodes: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let ids = (0..num_nodes).map(|i| i.to_string()).collect();
        Self::from_named_edges(ids, edges.iter().copied())
    }

    /// Build from external names and dense-id edges.
    pub fn from_named_edges(
        ids: Vec<String>,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        let n = ids.len();
        let mut self_loops = 0usize;
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            pairs.push(if u < v { (u, v) } else { (v, u) });
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut degree = vec![0usize; n];
        for &(u, v) in &pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in &pairs {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for u in 0..n {
            neighbors[offsets[u]..offsets[u + 1]].sort_unstable();
        }

        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i as u32).is_some() {
                return Err(Error::invalid(format!("duplicate node id `{id}`")));
            }
        }
        Ok(Graph {
            offsets,
            neighbors,
            ids,
            index,
            self_loops_dropped: self_loops,
        })
    }

    pub fn empty() -> Self {
        Graph {
            offsets: vec![0],
            neighbors: Vec::new(),
            ids: Vec::new(),
            index: HashMap::new(),
            self_loops_dropped: 0,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        let u = u as usize;
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_nodes() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, u: u32) -> &str {
        &self.ids[u as usize]
    }

    pub fn lookup(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    /// Self-loops discarded while building this graph.
    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    /// Write in edge-list form. Isolated nodes are written as a self-loop
    /// line so that reloading keeps them.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for u in 0..self.num_nodes() as u32 {
            if self.degree(u) == 0 {
                writeln!(w, "{} {}", self.id(u), self.id(u))?;
            }
            for &v in self.neighbors(u) {
                if v > u {
                    writeln!(w, "{} {}", self.id(u), self.id(v))?;
                }
            }
        }
        Ok(())
    }
}

/// Parse an edge list. Ids are assigned in first-seen order.
///
/// Empty input yields an empty graph. A line with a token count other than
/// two is a parse error carrying its 1-based line number.
pub fn load_edge_list<R: BufRead>(reader: R, options: EdgeListOptions) -> Result<Graph> {
    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |tok: &str| -> u32 {
        if let Some(&i) = index.get(tok) {
            return i;
        }
        let i = ids.len() as u32;
        ids.push(tok.to_owned());
        index.insert(tok.to_owned(), i);
        i
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks = options.delimiter.split(trimmed);
        if toks.len() != 2 || toks.iter().any(|t| t.is_empty()) {
            return Err(Error::parse(
                lineno + 1,
                format!("expected 2 tokens, found {}", toks.len()),
            ));
        }
        let u = intern(toks[0]);
        let v = intern(toks[1]);
        edges.push((u, v));
    }
    let g = Graph::from_named_edges(ids, edges)?;
    if g.self_loops_dropped() > 0 {
        log::warn!("dropped {} self-loop(s)", g.self_loops_dropped());
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupingKind {
    Partition,
    Multilabel,
}

/// Assignment of graph nodes to `L` groups.
///
/// Membership sets are sorted. Node order follows the graph's dense ids.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeGrouping {
    kind: GroupingKind,
    node_ids: Vec<String>,
    group_names: Vec<String>,
    membership: Vec<Vec<u32>>,
    group_sizes: Vec<usize>,
}

impl NodeGrouping {
    /// Partition grouping from one group id per node.
    pub fn partition(node_ids: Vec<String>, groups: &[u32]) -> Result<Self> {
        if node_ids.len() != groups.len() {
            return Err(Error::invalid("partition length differs from node count"));
        }
        let num_groups = groups.iter().map(|&g| g as usize + 1).max().unwrap_or(0);
        let names = (0..num_groups).map(|g| g.to_string()).collect();
        let membership = groups.iter().map(|&g| vec![g]).collect();
        Ok(Self::build(GroupingKind::Partition, node_ids, names, membership))
    }

    /// Multilabel grouping from per-node label sets.
    pub fn multilabel(
        node_ids: Vec<String>,
        group_names: Vec<String>,
        membership: Vec<Vec<u32>>,
    ) -> Result<Self> {
        if node_ids.len() != membership.len() {
            return Err(Error::invalid("membership length differs from node count"));
        }
        let l = group_names.len() as u32;
        let mut membership = membership;
        for set in &mut membership {
            set.sort_unstable();
            set.dedup();
            if set.iter().any(|&g| g >= l) {
                return Err(Error::invalid("group id out of range"));
            }
        }
        Ok(Self::build(
            GroupingKind::Multilabel,
            node_ids,
            group_names,
            membership,
        ))
    }

    fn build(
        kind: GroupingKind,
        node_ids: Vec<String>,
        group_names: Vec<String>,
        membership: Vec<Vec<u32>>,
    ) -> Self {
        let mut group_sizes = vec![0usize; group_names.len()];
        for set in &membership {
            for &g in set {
                group_sizes[g as usize] += 1;
            }
        }
        NodeGrouping {
            kind,
            node_ids,
            group_names,
            membership,
            group_sizes,
        }
    }

    pub fn kind(&self) -> GroupingKind {
        self.kind
    }

    pub fn num_groups(&self) -> usize {
        self.group_names.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn groups_of(&self, node: usize) -> &[u32] {
        &self.membership[node]
    }

    pub fn membership(&self) -> &[Vec<u32>] {
        &self.membership
    }

    /// Members of every group, each list sorted by node index.
    pub fn members(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self.group_sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (node, set) in self.membership.iter().enumerate() {
            for &g in set {
                out[g as usize].push(node as u32);
            }
        }
        out
    }

    /// Same grouping with nodes reordered by external id.
    pub fn canonicalized(&self) -> Self {
        let mut order: Vec<usize> = (0..self.num_nodes()).collect();
        order.sort_by(|&a, &b| self.node_ids[a].cmp(&self.node_ids[b]));
        NodeGrouping {
            kind: self.kind,
            node_ids: order.iter().map(|&i| self.node_ids[i].clone()).collect(),
            group_names: self.group_names.clone(),
            membership: order.iter().map(|&i| self.membership[i].clone()).collect(),
            group_sizes: self.group_sizes.clone(),
        }
    }

    /// Write as `node,group` CSV (one row per membership).
    pub fn write_csv<W: Write>(&self, w: W, header: (&str, &str)) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([header.0, header.1])?;
        for (node, set) in self.membership.iter().enumerate() {
            for &g in set {
                wr.write_record([&self.node_ids[node], &self.group_names[g as usize]])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Layout of a label file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelFormat {
    /// `node<TAB>group,group,...`
    #[default]
    Tab,
    /// `node,group` one membership per line (optionally with a header).
    Pairs,
}

impl std::str::FromStr for LabelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tab" => Ok(LabelFormat::Tab),
            "pairs" => Ok(LabelFormat::Pairs),
            other => Err(Error::invalid(format!("unknown label format `{other}`"))),
        }
    }
}

/// Load node labels as a multilabel grouping over `graph`'s nodes.
///
/// Group tokens are mapped to dense ids in sorted order (numerically when
/// every token is an integer). Nodes missing from the file get empty sets.
pub fn load_labels<R: BufRead>(reader: R, graph: &Graph) -> Result<NodeGrouping> {
    load_labels_with(reader, graph, LabelFormat::Tab)
}

pub fn load_labels_with<R: BufRead>(
    reader: R,
    graph: &Graph,
    format: LabelFormat,
) -> Result<NodeGrouping> {
    let mut raw: Vec<(u32, Vec<String>)> = Vec::new();
    let mut unknown: BTreeSet<String> = BTreeSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (node, groups) = match format {
            LabelFormat::Tab => {
                let (node, rest) = trimmed
                    .split_once('\t')
                    .ok_or_else(|| Error::parse(lineno + 1, "missing tab separator"))?;
                let groups: Vec<String> = rest
                    .split(',')
                    .map(str::trim)
                    .filter(|g| !g.is_empty())
                    .map(str::to_owned)
                    .collect();
                if groups.is_empty() {
                    return Err(Error::parse(lineno + 1, "empty group list"));
                }
                (node.trim(), groups)
            }
            LabelFormat::Pairs => {
                let toks: Vec<&str> = trimmed.split(',').map(str::trim).collect();
                if toks.len() != 2 || toks[0].is_empty() || toks[1].is_empty() {
                    return Err(Error::parse(lineno + 1, "expected `node,group`"));
                }
                if lineno == 0 && graph.lookup(toks[0]).is_none() && toks[0].parse::<f64>().is_err()
                {
                    // header row
                    continue;
                }
                (toks[0], vec![toks[1].to_owned()])
            }
        };
        match graph.lookup(node) {
            Some(u) => raw.push((u, groups)),
            None => {
                unknown.insert(node.to_owned());
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownNodes(unknown.into_iter().collect()));
    }

    let mut names: Vec<String> = raw
        .iter()
        .flat_map(|(_, g)| g.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if names.iter().all(|n| n.parse::<i64>().is_ok()) {
        names.sort_by_key(|n| n.parse::<i64>().unwrap());
    }
    let group_index: HashMap<&str, u32> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as u32))
        .collect();
    let mut membership = vec![Vec::new(); graph.num_nodes()];
    for (u, groups) in &raw {
        for g in groups {
            membership[*u as usize].push(group_index[g.as_str()]);
        }
    }
    NodeGrouping::multilabel(graph.ids().to_vec(), names, membership)
}

/// Load a `node,community` CSV (as written for community assignments) as a
/// partition grouping. Every graph node must be assigned.
pub fn load_partition_csv<R: std::io::Read>(reader: R, graph: &Graph) -> Result<NodeGrouping> {
    let mut rd = csv::Reader::from_reader(reader);
    let mut groups: Vec<Option<u32>> = vec![None; graph.num_nodes()];
    let mut unknown = BTreeSet::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::parse(i + 2, "expected `node,community`"));
        }
        let g: u32 = rec[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 2, "community must be a non-negative integer"))?;
        match graph.lookup(rec[0].trim()) {
            Some(u) => groups[u as usize] = Some(g),
            None => {
                unknown.insert(rec[0].to_owned());
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownNodes(unknown.into_iter().collect()));
    }
    let missing: Vec<String> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_none())
        .map(|(u, _)| graph.id(u as u32).to_owned())
        .take(10)
        .collect();
    if !missing.is_empty() {
        return Err(Error::invalid(format!(
            "partition does not cover nodes: {}",
            missing.join(", ")
        )));
    }
    let groups: Vec<u32> = groups.into_iter().map(Option::unwrap).collect();
    NodeGrouping::partition(graph.ids().to_vec(), &groups)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub components: usize,
}

/// `2E / (N (N - 1))` for `N >= 2`, else 0.
pub fn density(nodes: usize, edges: usize) -> f64 {
    if nodes < 2 {
        return 0.0;
    }
    2.0 * edges as f64 / (nodes as f64 * (nodes as f64 - 1.0))
}

pub fn graph_stats(graph: &Graph) -> GraphStats {
    GraphStats {
        nodes: graph.num_nodes(),
        edges: graph.num_edges(),
        density: density(graph.num_nodes(), graph.num_edges()),
        components: connected_components(graph).1,
    }
}

/// Component label per node (in discovery order) and component count.
pub fn connected_components(graph: &Graph) -> (Vec<u32>, usize) {
    let n = graph.num_nodes();
    let mut comp = vec![u32::MAX; n];
    let mut count = 0u32;
    let mut stack = Vec::new();
    for s in 0..n as u32 {
        if comp[s as usize] != u32::MAX {
            continue;
        }
        comp[s as usize] = count;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in graph.neighbors(u) {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (comp, count as usize)
}

/// Number of unordered node pairs that are not edges.
pub fn num_non_edges(graph: &Graph) -> u64 {
    let n = graph.num_nodes() as u64;
    (n * n.saturating_sub(1)) / 2 - graph.num_edges() as u64
}

/// Sample `count` distinct non-adjacent unordered pairs `(u, v)`, `u < v`,
/// uniformly at random.
pub fn sample_non_edges(graph: &Graph, count: usize, seed: u64) -> Result<Vec<(u32, u32)>> {
    let available = num_non_edges(graph);
    if count as u64 > available {
        return Err(Error::Insufficient(format!(
            "requested {count} non-edges but only {available} exist"
        )));
    }
    let mut rng = seed::rng(seed);
    let n = graph.num_nodes() as u32;
    if count == 0 {
        return Ok(Vec::new());
    }
    // Dense regime: enumerate and shuffle.
    if (count as u64) * 2 > available {
        let mut all: Vec<(u32, u32)> = Vec::with_capacity(available as usize);
        for u in 0..n {
            for v in u + 1..n {
                if !graph.has_edge(u, v) {
                    all.push((u, v));
                }
            }
        }
        let (chosen, _) = all.partial_shuffle(&mut rng, count);
        return Ok(chosen.to_vec());
    }
    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let pair = if u < v { (u, v) } else { (v, u) };
        if graph.has_edge(pair.0, pair.1) || !seen.insert(pair) {
            continue;
        }
        out.push(pair);
    }
    Ok(out)
}
