//! Skip-gram with negative sampling over walk corpora.
//!
//! Each token of a walk is a center; tokens within `window` positions of it
//! in the same walk are its contexts. For every (center, context) pair the
//! model pushes `σ(u·v)` towards 1 and `σ(u·v_n)` towards 0 for `negatives`
//! noise nodes drawn from the smoothed unigram distribution.
//!
//! Multi-worker training shares both matrices between threads without
//! locking. Cells are relaxed atomics, so concurrent updates may overwrite
//! each other; only `workers = 1` is bit-reproducible.

use std::collections::HashMap;
use std::io::{BufRead, Read, Write};
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::distributions::Distribution;
use rand::Rng;
use rand_distr::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::walk::WalkCorpus;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub min_learning_rate: f64,
    pub unigram_exponent: f64,
    /// Frequent-token downsampling threshold; 0 disables.
    pub subsample_threshold: f64,
    pub seed: u64,
    pub workers: usize,
    /// Draw the effective window per center uniformly from `1..=window`.
    pub shrink_window: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 128,
            window: 10,
            negatives: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            min_learning_rate: 1e-4,
            unigram_exponent: 0.75,
            subsample_threshold: 0.0,
            seed: 0,
            workers: 1,
            shrink_window: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::invalid("dim must be >= 1"));
        }
        if self.window < 1 {
            return Err(Error::invalid("window must be >= 1"));
        }
        if self.negatives < 1 {
            return Err(Error::invalid("negatives must be >= 1"));
        }
        if self.workers < 1 {
            return Err(Error::invalid("workers must be >= 1"));
        }
        if !(self.initial_learning_rate > 0.0) {
            return Err(Error::invalid("initial_learning_rate must be > 0"));
        }
        if !(self.min_learning_rate >= 0.0 && self.min_learning_rate <= self.initial_learning_rate)
        {
            return Err(Error::invalid(
                "min_learning_rate must lie in [0, initial_learning_rate]",
            ));
        }
        if !self.unigram_exponent.is_finite() || !(self.subsample_threshold >= 0.0) {
            return Err(Error::invalid("bad unigram_exponent or subsample_threshold"));
        }
        Ok(())
    }
}

/// Tokens present in a corpus with their counts and noise distribution.
#[derive(Clone, Debug)]
pub struct Vocab {
    /// Corpus id of each vocab entry, ascending.
    corpus_ids: Vec<u32>,
    /// Corpus id -> vocab index, `u32::MAX` when absent.
    index: Vec<u32>,
    counts: Vec<u64>,
    noise: Vec<f64>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn noise_distribution(&self) -> &[f64] {
        &self.noise
    }

    pub fn corpus_id(&self, idx: usize) -> u32 {
        self.corpus_ids[idx]
    }

    pub fn index_of(&self, corpus_id: u32) -> Option<usize> {
        match self.index.get(corpus_id as usize) {
            Some(&i) if i != u32::MAX => Some(i as usize),
            _ => None,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn noise_sampler(&self) -> Result<NoiseSampler> {
        let table = WeightedAliasIndex::new(self.noise.clone())
            .map_err(|e| Error::invalid(format!("noise distribution: {e}")))?;
        Ok(NoiseSampler { table })
    }
}

/// Alias-table sampler over vocab indices.
pub struct NoiseSampler {
    table: WeightedAliasIndex<f64>,
}

impl NoiseSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.table.sample(rng)
    }
}

/// Count tokens and build the `count^exponent` noise distribution.
pub fn build_vocab(corpus: &WalkCorpus, unigram_exponent: f64) -> Result<Vocab> {
    if corpus.is_empty() {
        return Err(Error::Insufficient("empty corpus".into()));
    }
    let mut raw = vec![0u64; corpus.names().len()];
    for walk in corpus.walks() {
        for &t in walk {
            raw[t as usize] += 1;
        }
    }
    let mut corpus_ids = Vec::new();
    let mut counts = Vec::new();
    let mut index = vec![u32::MAX; raw.len()];
    for (id, &c) in raw.iter().enumerate() {
        if c > 0 {
            index[id] = counts.len() as u32;
            corpus_ids.push(id as u32);
            counts.push(c);
        }
    }
    let weights: Vec<f64> = counts
        .iter()
        .map(|&c| (c as f64).powf(unigram_exponent))
        .collect();
    let z: f64 = weights.iter().sum();
    let noise = weights.into_iter().map(|w| w / z).collect();
    Ok(Vocab {
        corpus_ids,
        index,
        counts,
        noise,
    })
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradients {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss `-ln σ(u·v) - Σ ln σ(-u·v_n)` and its gradients.
pub fn sgns_loss_and_grads(
    center: &[f64],
    context: &[f64],
    negatives: &[&[f64]],
) -> Result<SgnsGradients> {
    let d = center.len();
    if context.len() != d || negatives.iter().any(|n| n.len() != d) {
        return Err(Error::invalid("vector dimensions differ"));
    }
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !finite(center) || !finite(context) || !negatives.iter().all(|n| finite(n)) {
        return Err(Error::NonFinite("sgns input"));
    }
    let pos = dot(center, context);
    let mut loss = softplus(-pos);
    let g_pos = sigmoid(pos) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|v| g_pos * v).collect();
    let g_context: Vec<f64> = center.iter().map(|u| g_pos * u).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let s = dot(center, n);
        loss += softplus(s);
        let g = sigmoid(s);
        for (gc, x) in g_center.iter_mut().zip(n.iter()) {
            *gc += g * x;
        }
        g_negs.push(center.iter().map(|u| g * u).collect());
    }
    Ok(SgnsGradients {
        loss,
        center: g_center,
        context: g_context,
        negatives: g_negs,
    })
}

/// Node vectors keyed by external id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    ids: Vec<String>,
    dim: usize,
    /// Row-major `rows × dim` input vectors; this is the embedding.
    vectors: Vec<f32>,
    /// Output vectors, present only straight after training.
    context_vectors: Option<Vec<f32>>,
}

impl EmbeddingMatrix {
    pub fn from_parts(ids: Vec<String>, dim: usize, vectors: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim must be >= 1"));
        }
        if vectors.len() != ids.len() * dim {
            return Err(Error::invalid("vector buffer does not match rows × dim"));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding"));
        }
        Ok(EmbeddingMatrix {
            ids,
            dim,
            vectors,
            context_vectors: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.ids.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value(&self, row: usize, d: usize) -> f32 {
        self.vectors[row * self.dim + d]
    }

    pub fn vectors(&self) -> &[f32] {
        &self.vectors
    }

    pub fn context_vectors(&self) -> Option<&[f32]> {
        self.context_vectors.as_deref()
    }

    pub fn column(&self, d: usize) -> Vec<f32> {
        (0..self.rows()).map(|r| self.value(r, d)).collect()
    }

    /// Multiply column `d` by `factor`.
    pub fn scale_column(&mut self, d: usize, factor: f32) {
        for r in 0..self.rows() {
            self.vectors[r * self.dim + d] *= factor;
        }
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect()
    }

    /// Rows reordered to follow `names`. Every name must be present.
    pub fn aligned_to(&self, names: &[String]) -> Result<EmbeddingMatrix> {
        let index = self.index();
        let mut missing = Vec::new();
        let mut vectors = Vec::with_capacity(names.len() * self.dim);
        for name in names {
            match index.get(name.as_str()) {
                Some(&r) => vectors.extend_from_slice(self.row(r)),
                None => missing.push(name.clone()),
            }
        }
        if !missing.is_empty() {
            missing.truncate(20);
            return Err(Error::UnknownNodes(missing));
        }
        Ok(EmbeddingMatrix {
            ids: names.to_vec(),
            dim: self.dim,
            vectors,
            context_vectors: None,
        })
    }

    /// Header `N D`, then `id v1 .. vD` per row.
    pub fn write_text<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        writeln!(w, "{} {}", self.rows(), self.dim)?;
        for (i, id) in self.ids.iter().enumerate() {
            w.write_all(id.as_bytes())?;
            for v in self.row(i) {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Little-endian f32, row-major, no header.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        for v in &self.vectors {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `N D` header"))??;
        let mut it = header.split_whitespace();
        let parse_usize = |t: Option<&str>| -> Result<usize> {
            t.and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(1, "bad `N D` header"))
        };
        let n = parse_usize(it.next())?;
        let dim = parse_usize(it.next())?;
        let mut ids = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut toks = line.split_whitespace();
            let id = toks.next().unwrap();
            let before = vectors.len();
            for t in toks {
                let v: f32 = t
                    .parse()
                    .map_err(|_| Error::parse(i + 2, format!("bad float `{t}`")))?;
                vectors.push(v);
            }
            if vectors.len() - before != dim {
                return Err(Error::parse(i + 2, format!("expected {dim} values")));
            }
            ids.push(id.to_owned());
        }
        if ids.len() != n {
            return Err(Error::parse(1, format!("header says {n} rows, found {}", ids.len())));
        }
        Self::from_parts(ids, dim, vectors)
    }

    pub fn read_binary<R: Read>(mut reader: R, ids: Vec<String>, dim: usize) -> Result<Self> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        if bytes.len() != ids.len() * dim * 4 {
            return Err(Error::invalid("binary embedding size mismatch"));
        }
        let vectors = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Self::from_parts(ids, dim, vectors)
    }
}

pub fn cosine_similarity(a: &[f32], b: &[f32]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        ab += x as f64 * y as f64;
        aa += x as f64 * x as f64;
        bb += y as f64 * y as f64;
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    ab / (aa.sqrt() * bb.sqrt())
}

/// Row-major f32 matrix shared across training threads.
struct SharedMatrix {
    cells: Vec<AtomicU32>,
    dim: usize,
}

impl SharedMatrix {
    fn from_vec(values: Vec<f32>, dim: usize) -> Self {
        SharedMatrix {
            cells: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
            dim,
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[AtomicU32] {
        &self.cells[r * self.dim..(r + 1) * self.dim]
    }

    fn into_vec(self) -> Vec<f32> {
        self.cells
            .into_iter()
            .map(|c| f32::from_bits(c.into_inner()))
            .collect()
    }
}

#[inline]
fn load(c: &AtomicU32) -> f32 {
    f32::from_bits(c.load(Ordering::Relaxed))
}

#[inline]
fn load_row(dst: &mut [f32], cells: &[AtomicU32]) {
    let mut d = dst.chunks_exact_mut(8);
    let mut c = cells.chunks_exact(8);
    for (d, c) in (&mut d).zip(&mut c) {
        for i in 0..8 {
            d[i] = load(&c[i]);
        }
    }
    for (d, c) in d.into_remainder().iter_mut().zip(c.remainder()) {
        *d = load(c);
    }
}

#[inline]
fn store_row(cells: &[AtomicU32], src: &[f32]) {
    let mut s = src.chunks_exact(8);
    let mut c = cells.chunks_exact(8);
    for (s, c) in (&mut s).zip(&mut c) {
        for i in 0..8 {
            store(&c[i], s[i]);
        }
    }
    for (s, c) in s.remainder().iter().zip(c.remainder()) {
        store(c, *s);
    }
}

#[inline]
fn store(c: &AtomicU32, v: f32) {
    c.store(v.to_bits(), Ordering::Relaxed)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    pub positive_pairs: u64,
    /// Mean loss per positive pair (including its negatives) in each epoch.
    pub epoch_losses: Vec<f64>,
}

pub struct Trained {
    pub embedding: EmbeddingMatrix,
    pub stats: TrainStats,
}

pub fn train(corpus: &WalkCorpus, config: &TrainConfig) -> Result<EmbeddingMatrix> {
    Ok(train_with_stats(corpus, config)?.embedding)
}

struct Shared<'a> {
    corpus: &'a WalkCorpus,
    vocab: &'a Vocab,
    sampler: &'a NoiseSampler,
    keep_prob: Option<Vec<f64>>,
    input: SharedMatrix,
    output: SharedMatrix,
    processed: AtomicU64,
    scheduled: u64,
    config: &'a TrainConfig,
}

#[derive(Default)]
struct WorkerTally {
    loss: f64,
    pairs: u64,
}

pub fn train_with_stats(corpus: &WalkCorpus, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    let vocab = build_vocab(corpus, config.unigram_exponent)?;
    let sampler = vocab.noise_sampler()?;
    let dim = config.dim;
    let rows = vocab.len();

    let mut init_rng = seed::rng_for(config.seed, &[0x696e_6974]);
    let input: Vec<f32> = (0..rows * dim)
        .map(|_| (init_rng.gen::<f32>() - 0.5) / dim as f32)
        .collect();

    let keep_prob = (config.subsample_threshold > 0.0).then(|| {
        let total = vocab.total() as f64;
        let t = config.subsample_threshold * total;
        vocab
            .counts()
            .iter()
            .map(|&c| {
                let c = c as f64;
                (((c / t).sqrt() + 1.0) * t / c).min(1.0)
            })
            .collect()
    });

    let shared = Shared {
        corpus,
        vocab: &vocab,
        sampler: &sampler,
        keep_prob,
        input: SharedMatrix::from_vec(input, dim),
        output: SharedMatrix::from_vec(vec![0.0; rows * dim], dim),
        processed: AtomicU64::new(0),
        scheduled: (config.epochs as u64 * corpus.total_tokens() as u64).max(1),
        config,
    };

    let workers = config.workers.min(corpus.num_walks()).max(1);
    let mut stats = TrainStats::default();
    for epoch in 0..config.epochs {
        let tallies: Vec<WorkerTally> = if workers == 1 {
            vec![run_shard(&shared, 0..corpus.num_walks(), epoch, 0)]
        } else {
            let n = corpus.num_walks();
            std::thread::scope(|s| {
                let handles: Vec<_> = (0..workers)
                    .map(|w| {
                        let range = (w * n / workers)..((w + 1) * n / workers);
                        let shared = &shared;
                        s.spawn(move || run_shard(shared, range, epoch, w))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            })
        };
        let (loss, pairs) = tallies
            .iter()
            .fold((0.0, 0u64), |(l, p), t| (l + t.loss, p + t.pairs));
        stats.positive_pairs += pairs;
        stats
            .epoch_losses
            .push(if pairs > 0 { loss / pairs as f64 } else { 0.0 });
        log::debug!("epoch {epoch}: {pairs} pairs, mean loss {:.5}", stats.epoch_losses[epoch]);
    }

    let ids = (0..rows)
        .map(|i| corpus.names()[vocab.corpus_id(i) as usize].clone())
        .collect();
    let vectors = shared.input.into_vec();
    let context = shared.output.into_vec();
    if vectors.iter().chain(&context).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("trained embedding"));
    }
    let mut embedding = EmbeddingMatrix::from_parts(ids, dim, vectors)?;
    embedding.context_vectors = Some(context);
    Ok(Trained { embedding, stats })
}

fn run_shard(
    shared: &Shared<'_>,
    walks: std::ops::Range<usize>,
    epoch: usize,
    worker: usize,
) -> WorkerTally {
    let cfg = shared.config;
    let dim = cfg.dim;
    let mut rng = seed::rng_for(cfg.seed, &[epoch as u64, worker as u64]);
    let lr0 = cfg.initial_learning_rate;
    let lr_min = cfg.min_learning_rate;
    let mut tally = WorkerTally::default();
    let mut sentence: Vec<usize> = Vec::new();
    let mut center = vec![0f32; dim];
    let mut delta = vec![0f32; dim];
    let mut scratch = vec![0f32; dim];

    for w in walks {
        let walk = shared.corpus.walk(w);
        sentence.clear();
        for &t in walk {
            let idx = shared
                .vocab
                .index_of(t)
                .expect("every corpus token is in the vocab");
            if let Some(keep) = &shared.keep_prob {
                if rng.gen::<f64>() >= keep[idx] {
                    continue;
                }
            }
            sentence.push(idx);
        }
        let done = shared
            .processed
            .fetch_add(walk.len() as u64, Ordering::Relaxed);
        let progress = done as f64 / shared.scheduled as f64;
        let lr = (lr0 - (lr0 - lr_min) * progress).max(lr_min) as f32;

        for pos in 0..sentence.len() {
            let b = if cfg.shrink_window {
                rng.gen_range(1..=cfg.window)
            } else {
                cfg.window
            };
            let lo = pos.saturating_sub(b);
            let hi = (pos + b).min(sentence.len() - 1);
            let c_idx = sentence[pos];
            for ctx_pos in lo..=hi {
                if ctx_pos == pos {
                    continue;
                }
                let ctx = sentence[ctx_pos];
                let u_row = shared.input.row(c_idx);
                load_row(&mut center, u_row);
                delta.iter_mut().for_each(|x| *x = 0.0);
                tally.loss += update_pair(&center, &mut delta, shared.output.row(ctx), &mut scratch, 1.0, lr);
                if shared.vocab.len() > 1 {
                    for _ in 0..cfg.negatives {
                        let neg = loop {
                            let s = shared.sampler.sample(&mut rng);
                            if s != ctx {
                                break s;
                            }
                        };
                        tally.loss +=
                            update_pair(&center, &mut delta, shared.output.row(neg), &mut scratch, 0.0, lr);
                    }
                }
                // re-read: other workers may have written this row meanwhile
                load_row(&mut center, u_row);
                for (c, d) in center.iter_mut().zip(&delta) {
                    *c += d;
                }
                store_row(u_row, &center);
                tally.pairs += 1;
            }
        }
    }
    tally
}

/// Dot product with independent accumulators so the loop vectorizes.
#[inline]
fn dot_f32(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0f32; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f32 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f32>() + tail
}

/// One logistic step on `(u, v)` with target `label`; updates `v` in place,
/// accumulates the step for `u` into `delta` and returns the pair's loss.
/// `scratch` holds a private copy of `v` for the arithmetic.
#[inline]
fn update_pair(
    u: &[f32],
    delta: &mut [f32],
    v: &[AtomicU32],
    scratch: &mut [f32],
    label: f32,
    lr: f32,
) -> f64 {
    load_row(scratch, v);
    let f = dot_f32(u, scratch) as f64;
    // sigmoid and the log loss share exp(-|f|)
    let e = (-f.abs()).exp();
    let p = if f >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
    let margin = if label > 0.5 { f } else { -f };
    let loss = (-margin).max(0.0) + e.ln_1p();
    let g = (label - p as f32) * lr;
    for (d, &vv) in delta.iter_mut().zip(scratch.iter()) {
        *d += g * vv;
    }
    for (s, &a) in scratch.iter_mut().zip(u) {
        *s += g * a;
    }
    store_row(v, scratch);
    loss
}
