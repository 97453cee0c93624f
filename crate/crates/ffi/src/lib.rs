//! C interface to graphlens.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function. Every fallible call returns a
//! `GlStatus`; on failure `gl_last_error_message` describes the error for
//! the calling thread. Panics never unwind into C; they surface as
//! `GL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use graphlens::graph::{self, Delimiter, EdgeListOptions};
use graphlens::interpret::{self, Agg, ISConfig};
use graphlens::walk::{generate_walks, WalkConfig};
use graphlens::{eval, louvain, sgns, EmbeddingMatrix, Error, Graph, NodeGrouping, TrainConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DataError = 4,
    IoError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Undirected graph handle.
pub struct GlGraph(Graph);

/// Embedding handle. Rows follow the node order of the graph it was
/// trained on.
pub struct GlEmbedding(EmbeddingMatrix);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GlGraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub components: usize,
}

/// Walk and training settings for `gl_embed_deepwalk`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlEmbedOptions {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub workers: usize,
}

/// Aggregation choice for interpretability scores.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GlAgg {
    Max = 0,
    Avg = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> GlStatus {
    match err {
        Error::Parse { .. } => GlStatus::ParseError,
        Error::InvalidArgument(_) | Error::Config(_) => GlStatus::InvalidArgument,
        Error::Io(_) | Error::File { .. } => GlStatus::IoError,
        Error::Stage { source, .. } => status_of(source),
        _ => GlStatus::DataError,
    }
}

struct Fail(GlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            GlStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build a graph with nodes `0..num_nodes` from `len` edges `(src[i], dst[i])`.
/// Duplicate edges collapse and self-loops are dropped.
///
/// # Safety
/// `src` and `dst` must point to `len` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_graph_from_edges(
    num_nodes: usize,
    src: *const u32,
    dst: *const u32,
    len: usize,
    out: *mut *mut GlGraph,
) -> GlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (s, d) = (slice(src, len, "src")?, slice(dst, len, "dst")?);
        let edges: Vec<(u32, u32)> = s.iter().copied().zip(d.iter().copied()).collect();
        let g = Graph::from_edges(num_nodes, &edges)?;
        *out = Box::into_raw(Box::new(GlGraph(g)));
        Ok(())
    })
}

/// Load an edge list. `comma` selects comma-separated lines instead of
/// whitespace.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_graph_load(path: *const c_char, comma: bool, out: *mut *mut GlGraph) -> GlStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(GlStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let file = std::fs::File::open(path).map_err(|e| Fail(GlStatus::IoError, format!("{path}: {e}")))?;
        let delimiter = if comma { Delimiter::Comma } else { Delimiter::Whitespace };
        let g = graph::load_edge_list(std::io::BufReader::new(file), EdgeListOptions { delimiter })?;
        *out = Box::into_raw(Box::new(GlGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_graph_free(graph: *mut GlGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_graph_stats(graph: *const GlGraph, out: *mut GlGraphStats) -> GlStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = graph::graph_stats(&g.0);
        *out = GlGraphStats {
            nodes: s.nodes,
            edges: s.edges,
            density: s.density,
            components: s.components,
        };
        Ok(())
    })
}

/// Louvain communities. Writes one label per node into `communities`
/// (length at least the node count).
///
/// # Safety
/// `graph` must be a live handle; `communities` must hold `len` values;
/// `modularity` and `num_communities` may be null.
#[no_mangle]
pub unsafe extern "C" fn gl_louvain(
    graph: *const GlGraph,
    resolution: f64,
    seed: u64,
    communities: *mut u32,
    len: usize,
    modularity: *mut f64,
    num_communities: *mut usize,
) -> GlStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let n = g.0.num_nodes();
        if len < n {
            return Err(Fail(GlStatus::BufferTooSmall, format!("need {n} slots, got {len}")));
        }
        let buf = slice_mut(communities, n, "communities")?;
        let a = louvain::louvain(&g.0, resolution, seed)?;
        buf.copy_from_slice(&a.communities);
        if let Some(q) = modularity.as_mut() {
            *q = a.modularity;
        }
        if let Some(k) = num_communities.as_mut() {
            *k = a.num_communities;
        }
        Ok(())
    })
}

/// Default DeepWalk settings: 80 walks of length 40, 128 dimensions.
#[no_mangle]
pub extern "C" fn gl_embed_default_options() -> GlEmbedOptions {
    let w = WalkConfig::deepwalk(0);
    let t = TrainConfig::default();
    GlEmbedOptions {
        walks_per_node: w.walks_per_node,
        walk_length: w.walk_length,
        dim: t.dim,
        window: t.window,
        negatives: t.negatives,
        epochs: t.epochs,
        learning_rate: t.initial_learning_rate,
        seed: 0,
        workers: t.workers,
    }
}

/// Generate uniform walks and train skip-gram embeddings.
///
/// # Safety
/// `graph` must be a live handle, `options` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_embed_deepwalk(
    graph: *const GlGraph,
    options: *const GlEmbedOptions,
    out: *mut *mut GlEmbedding,
) -> GlStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let o = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let walk = WalkConfig {
            walks_per_node: o.walks_per_node,
            walk_length: o.walk_length,
            seed: graphlens::seed::derive(o.seed, "walk"),
        };
        walk.validate()?;
        let train = TrainConfig {
            dim: o.dim,
            window: o.window,
            negatives: o.negatives,
            epochs: o.epochs,
            initial_learning_rate: o.learning_rate,
            min_learning_rate: TrainConfig::default().min_learning_rate.min(o.learning_rate),
            seed: graphlens::seed::derive(o.seed, "train"),
            workers: o.workers,
            ..TrainConfig::default()
        };
        let corpus = generate_walks(&g.0, &walk)?;
        let emb = sgns::train(&corpus, &train)?.aligned_to(g.0.ids())?;
        *out = Box::into_raw(Box::new(GlEmbedding(emb)));
        Ok(())
    })
}

/// Wrap a caller-owned row-major matrix of `rows × dim` floats. Row `i`
/// is node `i`.
///
/// # Safety
/// `data` must hold `rows * dim` readable floats; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_embedding_from_data(
    data: *const f32,
    rows: usize,
    dim: usize,
    out: *mut *mut GlEmbedding,
) -> GlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = rows
            .checked_mul(dim)
            .ok_or_else(|| Fail(GlStatus::InvalidArgument, "size overflow".into()))?;
        let values = slice(data, len, "data")?.to_vec();
        let ids = (0..rows).map(|i| i.to_string()).collect();
        let emb = EmbeddingMatrix::from_parts(ids, dim, values)?;
        *out = Box::into_raw(Box::new(GlEmbedding(emb)));
        Ok(())
    })
}

/// # Safety
/// `embedding` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_embedding_rows(embedding: *const GlEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.rows())
}

/// # Safety
/// `embedding` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_embedding_dim(embedding: *const GlEmbedding) -> usize {
    embedding.as_ref().map_or(0, |e| e.0.dim())
}

/// Copy the row-major matrix into `buf` (at least rows × dim floats).
///
/// # Safety
/// `embedding` must be a live handle; `buf` must hold `len` writable floats.
#[no_mangle]
pub unsafe extern "C" fn gl_embedding_copy(embedding: *const GlEmbedding, buf: *mut f32, len: usize) -> GlStatus {
    guard(|| {
        let e = embedding.as_ref().ok_or_else(|| null("embedding"))?;
        let v = e.0.vectors();
        if len < v.len() {
            return Err(Fail(GlStatus::BufferTooSmall, format!("need {} floats, got {len}", v.len())));
        }
        slice_mut(buf, v.len(), "buf")?.copy_from_slice(v);
        Ok(())
    })
}

/// # Safety
/// `embedding` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gl_embedding_free(embedding: *mut GlEmbedding) {
    if !embedding.is_null() {
        drop(Box::from_raw(embedding));
    }
}

/// Interpretability of each dimension against a partition of the rows.
/// `groups[i]` is the group of row `i`; `k` equals each group's size.
/// Writes one percentage per dimension into `per_dimension`.
///
/// # Safety
/// `embedding` must be a live handle; `groups` must hold `len` values equal
/// to the row count; `per_dimension` must hold `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_interpretability(
    embedding: *const GlEmbedding,
    groups: *const u32,
    len: usize,
    agg1: GlAgg,
    agg2: GlAgg,
    per_dimension: *mut f64,
    out_len: usize,
) -> GlStatus {
    guard(|| {
        let e = embedding.as_ref().ok_or_else(|| null("embedding"))?;
        if len != e.0.rows() {
            return Err(Fail(
                GlStatus::InvalidArgument,
                format!("{len} group labels for {} rows", e.0.rows()),
            ));
        }
        let dims = e.0.dim();
        if out_len < dims {
            return Err(Fail(GlStatus::BufferTooSmall, format!("need {dims} slots, got {out_len}")));
        }
        let labels = slice(groups, len, "groups")?;
        let grouping = NodeGrouping::partition(e.0.ids().to_vec(), labels)?;
        let agg = |a: GlAgg| match a {
            GlAgg::Max => Agg::Max,
            GlAgg::Avg => Agg::Avg,
        };
        let cfg = ISConfig {
            agg1: agg(agg1),
            agg2: agg(agg2),
            ..ISConfig::default()
        };
        let m = interpret::interpretability(&e.0, &grouping, &cfg)?;
        slice_mut(per_dimension, dims, "per_dimension")?.copy_from_slice(&m.per_dimension);
        Ok(())
    })
}

/// Area under the ROC curve of `scores` against 0/1 `labels`.
///
/// # Safety
/// `scores` and `labels` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_auc(scores: *const f64, labels: *const u8, len: usize, out: *mut f64) -> GlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = slice(scores, len, "scores")?;
        let l: Vec<bool> = slice(labels, len, "labels")?.iter().map(|&b| b != 0).collect();
        *out = eval::auc(s, &l)?;
        Ok(())
    })
}
