//! Walk corpora: uniform random walks over a graph, and length-2 walks from
//! windowed co-occurrence in transaction logs.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Walks started from every node.
    pub walks_per_node: usize,
    /// Maximum walk length in nodes.
    pub walk_length: usize,
    pub seed: u64,
}

impl WalkConfig {
    /// 80 walks of length 40 per node.
    pub fn deepwalk(seed: u64) -> Self {
        WalkConfig {
            walks_per_node: 80,
            walk_length: 40,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node < 1 {
            return Err(Error::invalid("walks_per_node must be >= 1"));
        }
        if self.walk_length < 2 {
            return Err(Error::invalid("walk_length must be >= 2"));
        }
        Ok(())
    }
}

/// Flat storage of walks over a shared node-id space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCorpus {
    tokens: Vec<u32>,
    offsets: Vec<usize>,
    names: Vec<String>,
}

impl WalkCorpus {
    pub fn new(names: Vec<String>) -> Self {
        WalkCorpus {
            tokens: Vec::new(),
            offsets: vec![0],
            names,
        }
    }

    pub fn from_walks(names: Vec<String>, walks: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut c = Self::new(names);
        for w in walks {
            c.push(&w);
        }
        c
    }

    pub fn push(&mut self, walk: &[u32]) {
        debug_assert!(walk.iter().all(|&t| (t as usize) < self.names.len()));
        self.tokens.extend_from_slice(walk);
        self.offsets.push(self.tokens.len());
    }

    pub fn num_walks(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn walk(&self, i: usize) -> &[u32] {
        &self.tokens[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn walks(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        (0..self.num_walks()).map(move |i| self.walk(i))
    }

    /// External names for the id space the tokens index into.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// One walk per line, space-separated external ids.
    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        for walk in self.walks() {
            let mut first = true;
            for &t in walk {
                if !first {
                    w.write_all(b" ")?;
                }
                first = false;
                w.write_all(self.names[t as usize].as_bytes())?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a corpus file. Ids are interned in first-seen order.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut names = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut corpus = WalkCorpus::new(Vec::new());
        let mut buf = Vec::new();
        for line in reader.lines() {
            let line = line?;
            buf.clear();
            for tok in line.split_whitespace() {
                let id = match index.get(tok) {
                    Some(&i) => i,
                    None => {
                        let i = names.len() as u32;
                        names.push(tok.to_owned());
                        index.insert(tok.to_owned(), i);
                        i
                    }
                };
                buf.push(id);
            }
            if !buf.is_empty() {
                corpus.tokens.extend_from_slice(&buf);
                corpus.offsets.push(corpus.tokens.len());
            }
        }
        corpus.names = names;
        Ok(corpus)
    }
}

fn single_walk(graph: &Graph, start: u32, length: usize, seed: u64, rep: usize) -> Vec<u32> {
    let mut rng = seed::rng_for(seed, &[start as u64, rep as u64]);
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut cur = start;
    while walk.len() < length {
        let nbrs = graph.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        cur = nbrs[rng.gen_range(0..nbrs.len())];
        walk.push(cur);
    }
    walk
}

/// Uniform random walks, `walks_per_node` from every node.
///
/// Walks are ordered by repetition, then by node id. Each walk draws from
/// its own RNG keyed by `(seed, node, repetition)`, so the corpus does not
/// depend on the rayon pool size.
pub fn generate_walks(graph: &Graph, config: &WalkConfig) -> Result<WalkCorpus> {
    config.validate()?;
    if graph.num_nodes() == 0 {
        return Err(Error::invalid("cannot walk an empty graph"));
    }
    let n = graph.num_nodes();
    let walks: Vec<Vec<u32>> = (0..config.walks_per_node * n)
        .into_par_iter()
        .map(|i| {
            let rep = i / n;
            let node = (i % n) as u32;
            single_walk(graph, node, config.walk_length, config.seed, rep)
        })
        .collect();
    Ok(WalkCorpus::from_walks(graph.ids().to_vec(), walks))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub account: String,
    pub item: String,
    pub timestamp: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransactionLog {
    pub records: Vec<Transaction>,
}

impl TransactionLog {
    /// CSV with header `account,item,timestamp`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rd.headers()?.clone();
        let expected = ["account", "item", "timestamp"];
        if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::parse(1, "expected header `account,item,timestamp`"));
        }
        let mut records = Vec::new();
        for (i, rec) in rd.deserialize().enumerate() {
            let rec: Transaction = rec.map_err(|e| Error::parse(i + 2, e.to_string()))?;
            records.push(rec);
        }
        Ok(TransactionLog { records })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceConfig {
    /// Inclusive window: records `a`, `b` pair when `|t_a - t_b| <= window`.
    pub window_seconds: u64,
    /// Emit each unordered item pair at most once per account.
    #[serde(default)]
    pub dedup_per_account: bool,
}

/// Length-2 walks from transactions sharing an account inside a time window.
///
/// Every qualifying pair of records with distinct items emits `[a, b]` and
/// `[b, a]`. The returned graph has an edge for every emitted pair; its
/// nodes are the items that took part in at least one pair, in first-emitted
/// order, and the corpus tokens index into it.
pub fn generate_cooccurrence_pairs(
    log: &TransactionLog,
    config: &CooccurrenceConfig,
) -> Result<(WalkCorpus, Graph)> {
    if config.window_seconds == 0 {
        return Err(Error::invalid("window_seconds must be > 0"));
    }
    let window = config.window_seconds as i128;

    let mut account_order: Vec<&str> = Vec::new();
    let mut by_account: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in log.records.iter().enumerate() {
        by_account
            .entry(r.account.as_str())
            .or_insert_with(|| {
                account_order.push(r.account.as_str());
                Vec::new()
            })
            .push(i);
    }

    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, u32> = HashMap::new();

    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for account in account_order {
        let mut recs = by_account[account].clone();
        recs.sort_by_key(|&i| (log.records[i].timestamp, i));
        let mut seen = std::collections::HashSet::new();
        for (a_pos, &a) in recs.iter().enumerate() {
            let ta = log.records[a].timestamp as i128;
            for &b in &recs[a_pos + 1..] {
                let tb = log.records[b].timestamp as i128;
                if tb - ta > window {
                    break;
                }
                let (ia, ib) = (&log.records[a].item, &log.records[b].item);
                if ia == ib {
                    continue;
                }
                if config.dedup_per_account {
                    let key = if ia < ib { (ia, ib) } else { (ib, ia) };
                    if !seen.insert(key) {
                        continue;
                    }
                }
                let u = intern(ia, &mut names, &mut index);
                let v = intern(ib, &mut names, &mut index);
                pairs.push((u, v));
            }
        }
    }

    let mut corpus = WalkCorpus::new(names.clone());
    for &(u, v) in &pairs {
        corpus.push(&[u, v]);
        corpus.push(&[v, u]);
    }
    let graph = Graph::from_named_edges(names, pairs)?;
    Ok((corpus, graph))
}

fn intern<'a>(item: &'a str, names: &mut Vec<String>, index: &mut HashMap<&'a str, u32>) -> u32 {
    *index.entry(item).or_insert_with(|| {
        names.push(item.to_owned());
        (names.len() - 1) as u32
    })
}
