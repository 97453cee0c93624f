//! Run configuration, the staged pipeline, run manifests and cross-run
//! comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::suite::{run_task_suite, write_reports_csv, write_reports_json, EvalReport, SuiteConfig, TaskId};
use crate::eval::{ClassifierConfig, FeatureOp};
use crate::graph::{self, Delimiter, EdgeListOptions, Graph, LabelFormat, NodeGrouping};
use crate::interpret::{self, ISConfig};
use crate::louvain::{self, CommunityAssignment};
use crate::seed;
use crate::sgns::{self, EmbeddingMatrix, TrainConfig};
use crate::walk::{self, CooccurrenceConfig, TransactionLog, WalkConfig, WalkCorpus};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "GRAPHLENS_OUTPUT_DIR";

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Walk,
    Train,
    Communities,
    Interpret,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Walk,
        Stage::Train,
        Stage::Communities,
        Stage::Interpret,
        Stage::Evaluate,
    ];
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::invalid(format!("unknown stage `{s}`")))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub edges: Option<PathBuf>,
    #[serde(default)]
    pub edge_delimiter: Delimiter,
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub label_format: LabelFormat,
    pub transactions: Option<PathBuf>,
}

/// Walk settings. Walk count and length have no defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSettings {
    pub walks_per_node: usize,
    pub walk_length: usize,
    /// Co-occurrence window for transaction inputs.
    pub window_seconds: Option<u64>,
    #[serde(default)]
    pub dedup_per_account: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LouvainSettings {
    pub resolution: f64,
}

impl Default for LouvainSettings {
    fn default() -> Self {
        LouvainSettings { resolution: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterpretSettings {
    #[serde(flatten)]
    pub config: ISConfig,
    /// Dimensions exported to the heatmap CSV.
    pub heatmap_dims: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub tasks: Vec<TaskId>,
    pub feature_op: FeatureOp,
    pub test_fraction: f64,
    pub num_pairs: usize,
    pub holdout_fraction: f64,
    pub classifier: ClassifierConfig,
}

impl Default for EvalSettings {
    fn default() -> Self {
        let s = SuiteConfig::default();
        EvalSettings {
            tasks: s.tasks,
            feature_op: s.feature_op,
            test_fraction: s.test_fraction,
            num_pairs: s.num_pairs,
            holdout_fraction: s.holdout_fraction,
            classifier: s.classifier,
        }
    }
}

fn default_dims() -> Vec<usize> {
    vec![128]
}

fn default_stages() -> Vec<Stage> {
    Stage::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    pub inputs: Inputs,
    pub walk: WalkSettings,
    /// `dim` and `seed` are ignored; they come from `dims` and `seed`.
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub louvain: LouvainSettings,
    #[serde(default)]
    pub interpret: InterpretSettings,
    #[serde(default)]
    pub eval: EvalSettings,
}

impl RunConfig {
    /// Parse TOML, or JSON when the path ends in `.json`. Relative input and
    /// output paths resolve against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        let base = std::path::absolute(path)?
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.inputs.edges,
            &mut self.inputs.labels,
            &mut self.inputs.transactions,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.output_dir);
    }

    /// Apply the output-directory environment override.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            self.output_dir = std::path::absolute(PathBuf::from(dir))?;
        }
        Ok(())
    }

    pub fn has_stage(&self, s: Stage) -> bool {
        self.stages.contains(&s)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.inputs.edges, &self.inputs.transactions) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either inputs.edges or inputs.transactions".into()))
            }
            (None, None) => return Err(Error::Config("no graph input configured".into())),
            (None, Some(_)) if self.walk.window_seconds.is_none() => {
                return Err(Error::Config(
                    "transaction input needs walk.window_seconds".into(),
                ))
            }
            _ => {}
        }
        for p in [&self.inputs.edges, &self.inputs.labels, &self.inputs.transactions]
            .into_iter()
            .flatten()
        {
            if !p.is_file() {
                return Err(Error::Config(format!("input {} does not exist", p.display())));
            }
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Config("dims must be a non-empty list of positive sizes".into()));
        }
        WalkConfig {
            walks_per_node: self.walk.walks_per_node,
            walk_length: self.walk.walk_length,
            seed: 0,
        }
        .validate()?;
        TrainConfig {
            dim: 1,
            ..self.train.clone()
        }
        .validate()?;
        self.interpret.config.validate()?;

        let out = &self.output_dir;
        if self.has_stage(Stage::Train) && !self.has_stage(Stage::Walk) && !out.join("corpus.txt").is_file() {
            return Err(Error::Config("stage `train` needs `walk` or an existing corpus.txt".into()));
        }
        for stage in [Stage::Interpret, Stage::Evaluate] {
            if self.has_stage(stage) && !self.has_stage(Stage::Train) {
                for &d in &self.dims {
                    if !out.join(dim_dir(d)).join("embedding.txt").is_file() {
                        return Err(Error::Config(format!(
                            "stage `{stage:?}` needs `train` or an existing embedding for D = {d}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn suite_config(&self, dim: usize) -> SuiteConfig {
        SuiteConfig {
            tasks: self.eval.tasks.clone(),
            feature_op: self.eval.feature_op,
            test_fraction: self.eval.test_fraction,
            num_pairs: self.eval.num_pairs,
            holdout_fraction: self.eval.holdout_fraction,
            classifier: self.eval.classifier.clone(),
            walk: self.walk_config(),
            train: self.train_config(dim),
            seed: seed::derive(self.seed, &format!("eval/d={dim}")),
        }
    }

    fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            walks_per_node: self.walk.walks_per_node,
            walk_length: self.walk.walk_length,
            seed: seed::derive(self.seed, "walk"),
        }
    }

    fn train_config(&self, dim: usize) -> TrainConfig {
        TrainConfig {
            dim,
            seed: seed::derive(self.seed, &format!("train/d={dim}")),
            ..self.train.clone()
        }
    }
}

pub fn dim_dir(d: usize) -> String {
    format!("d{d}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub status: String,
    pub failed_stage: Option<String>,
    pub config: RunConfig,
    pub inputs: Vec<FileRecord>,
    /// Paths relative to the run directory.
    pub artifacts: Vec<FileRecord>,
    pub stages: Vec<StageTiming>,
    pub notices: Vec<String>,
}

impl RunManifest {
    pub fn read(run_dir: &Path) -> Result<Self> {
        let path = run_dir.join(MANIFEST);
        let f = fs::File::open(&path).map_err(|e| Error::File {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(serde_json::from_reader(BufReader::new(f))?)
    }

    /// Write to `manifest.json` through a temporary file and rename.
    pub fn write_atomic(&self, run_dir: &Path) -> Result<()> {
        let tmp = run_dir.join(format!("{MANIFEST}.tmp"));
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            serde_json::to_writer_pretty(&mut w, self)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        fs::rename(&tmp, run_dir.join(MANIFEST))?;
        Ok(())
    }

    /// Check every recorded artifact against its hash.
    pub fn verify(&self, run_dir: &Path) -> Result<()> {
        for a in &self.artifacts {
            let actual = hash_file(&run_dir.join(&a.path))?;
            if actual.sha256 != a.sha256 {
                return Err(Error::invalid(format!("artifact {} does not match its hash", a.path)));
            }
        }
        Ok(())
    }
}

pub fn hash_file(path: &Path) -> Result<FileRecord> {
    let mut f = fs::File::open(path).map_err(|e| Error::File {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut h = Sha256::new();
    let bytes = std::io::copy(&mut f, &mut h)?;
    Ok(FileRecord {
        path: path.display().to_string(),
        sha256: hex::encode(h.finalize()),
        bytes,
    })
}

/// File access for one run. Every read and write goes through here so the
/// run can account for exactly which files it touched.
pub struct RunIo {
    root: PathBuf,
    reads: Mutex<BTreeSet<PathBuf>>,
    writes: Mutex<Vec<String>>,
}

impl RunIo {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(RunIo {
            root: root.to_path_buf(),
            reads: Mutex::new(BTreeSet::new()),
            writes: Mutex::new(Vec::new()),
        })
    }

    pub fn open(&self, path: &Path) -> Result<BufReader<fs::File>> {
        self.reads.lock().unwrap().insert(path.to_path_buf());
        let f = fs::File::open(path).map_err(|e| Error::File {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(BufReader::new(f))
    }

    /// Create `rel` under the run directory and fill it with `fill`.
    pub fn write(&self, rel: &str, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(fs::File::create(&path)?);
        fill(&mut w)?;
        w.flush()?;
        let mut writes = self.writes.lock().unwrap();
        if !writes.iter().any(|p| p == rel) {
            writes.push(rel.to_owned());
        }
        Ok(())
    }

    pub fn reads(&self) -> Vec<PathBuf> {
        self.reads.lock().unwrap().iter().cloned().collect()
    }

    pub fn written(&self) -> Vec<String> {
        self.writes.lock().unwrap().clone()
    }
}

/// Result of a pipeline run.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub reads: Vec<PathBuf>,
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    io: RunIo,
    timings: Vec<StageTiming>,
    notices: Vec<String>,
}

impl Runner<'_> {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        log::info!("stage {name}");
        let out = f(self).map_err(|e| Error::Stage {
            stage: name.to_owned(),
            source: Box::new(e),
        })?;
        self.timings.push(StageTiming {
            stage: name.to_owned(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn load_graph(&mut self) -> Result<(Graph, Option<WalkCorpus>)> {
        let cfg = self.cfg;
        if let Some(edges) = &cfg.inputs.edges {
            let g = graph::load_edge_list(
                self.io.open(edges)?,
                EdgeListOptions {
                    delimiter: cfg.inputs.edge_delimiter,
                },
            )?;
            return Ok((g, None));
        }
        let path = cfg.inputs.transactions.as_ref().expect("validated");
        let log = TransactionLog::read_csv(self.io.open(path)?)?;
        let (corpus, g) = walk::generate_cooccurrence_pairs(
            &log,
            &CooccurrenceConfig {
                window_seconds: cfg.walk.window_seconds.expect("validated"),
                dedup_per_account: cfg.walk.dedup_per_account,
            },
        )?;
        Ok((g, Some(corpus)))
    }
}

/// Execute the configured stages and write the manifest.
///
/// On failure the manifest is still written (status `failed`) and the
/// returned error names the stage.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut runner = Runner {
        cfg,
        io: RunIo::new(&cfg.output_dir)?,
        timings: Vec::new(),
        notices: Vec::new(),
    };
    let result = execute(&mut runner);
    let (status, failed) = match &result {
        Ok(()) => ("complete".to_owned(), None),
        Err(Error::Stage { stage, .. }) => ("failed".to_owned(), Some(stage.clone())),
        Err(_) => ("failed".to_owned(), None),
    };

    let mut inputs = Vec::new();
    for p in [&cfg.inputs.edges, &cfg.inputs.labels, &cfg.inputs.transactions]
        .into_iter()
        .flatten()
    {
        inputs.push(hash_file(p)?);
    }
    let mut artifacts = Vec::new();
    for rel in runner.io.written() {
        let mut rec = hash_file(&cfg.output_dir.join(&rel))?;
        rec.path = rel;
        artifacts.push(rec);
    }
    let manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_owned(),
        status,
        failed_stage: failed,
        config: cfg.clone(),
        inputs,
        artifacts,
        stages: runner.timings.clone(),
        notices: runner.notices.clone(),
    };
    manifest.write_atomic(&cfg.output_dir)?;
    result?;
    Ok(RunOutcome {
        manifest,
        reads: runner.io.reads(),
    })
}

fn execute(r: &mut Runner<'_>) -> Result<()> {
    let cfg = r.cfg;
    let (graph, pair_corpus) = r.stage("load", |r| r.load_graph())?;
    r.stage("stats", |r| {
        let stats = graph::graph_stats(&graph);
        r.io.write("stats.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &stats)?;
            Ok(writeln!(w)?)
        })
    })?;

    let labels: Option<NodeGrouping> = match &cfg.inputs.labels {
        Some(p) => Some(r.stage("labels", |r| {
            graph::load_labels_with(r.io.open(p)?, &graph, cfg.inputs.label_format)
        })?),
        None => None,
    };

    let corpus: Option<WalkCorpus> = if cfg.has_stage(Stage::Walk) {
        Some(r.stage("walk", |r| {
            let corpus = match pair_corpus {
                Some(c) => c,
                None => walk::generate_walks(&graph, &cfg.walk_config())?,
            };
            r.io.write("corpus.txt", |w| corpus.write(w))?;
            Ok(corpus)
        })?)
    } else if cfg.has_stage(Stage::Train) {
        Some(r.stage("walk", |r| {
            WalkCorpus::read(r.io.open(&cfg.output_dir.join("corpus.txt"))?)
        })?)
    } else {
        None
    };

    let communities: Option<CommunityAssignment> = if cfg.has_stage(Stage::Communities) {
        Some(r.stage("communities", |r| {
            let a = louvain::louvain(&graph, cfg.louvain.resolution, seed::derive(cfg.seed, "louvain"))?;
            r.io.write("communities.csv", |w| a.write_csv(&graph, w))?;
            r.io.write("communities.json", |w| Ok(w.write_all(a.summary_json()?.as_bytes())?))?;
            Ok(a)
        })?)
    } else {
        let path = cfg.output_dir.join("communities.csv");
        if path.is_file() && (cfg.has_stage(Stage::Interpret) || cfg.has_stage(Stage::Evaluate)) {
            let grouping = graph::load_partition_csv(r.io.open(&path)?, &graph)?;
            let comm: Vec<u32> = grouping.membership().iter().map(|s| s[0]).collect();
            let k = grouping.num_groups();
            let q = louvain::modularity(&graph, &comm).unwrap_or(0.0);
            Some(CommunityAssignment {
                communities: comm,
                num_communities: k,
                modularity: q,
                seed: seed::derive(cfg.seed, "louvain"),
                resolution: cfg.louvain.resolution,
            })
        } else {
            None
        }
    };
    let internal = communities
        .as_ref()
        .map(|a| a.to_grouping(&graph))
        .transpose()?;

    for &dim in &cfg.dims {
        let dir = dim_dir(dim);
        let embedding: EmbeddingMatrix = if cfg.has_stage(Stage::Train) {
            r.stage(&format!("train/{dir}"), |r| {
                let corpus = corpus.as_ref().expect("corpus loaded for training");
                let emb = sgns::train(corpus, &cfg.train_config(dim))?;
                r.io.write(&format!("{dir}/embedding.txt"), |w| emb.write_text(w))?;
                r.io.write(&format!("{dir}/embedding.bin"), |w| emb.write_binary(w))?;
                Ok(emb)
            })?
        } else if cfg.has_stage(Stage::Interpret) || cfg.has_stage(Stage::Evaluate) {
            let path = cfg.output_dir.join(&dir).join("embedding.txt");
            r.stage(&format!("load-embedding/{dir}"), |r| EmbeddingMatrix::read_text(r.io.open(&path)?))?
        } else {
            continue;
        };

        if cfg.has_stage(Stage::Interpret) {
            r.stage(&format!("interpret/{dir}"), |r| {
                for (name, grouping) in [("internal", internal.as_ref()), ("external", labels.as_ref())] {
                    let Some(grouping) = grouping else {
                        r.notices.push(format!("interpret/{dir}: no {name} grouping"));
                        continue;
                    };
                    let m = interpret::interpretability(&embedding, grouping, &cfg.interpret.config)?;
                    let all: Vec<usize> = (0..m.dims).collect();
                    r.io.write(&format!("{dir}/is_{name}.csv"), |w| {
                        Ok(w.write_all(interpret::export_is_heatmap(&m, &all)?.as_bytes())?)
                    })?;
                    r.io.write(&format!("{dir}/is_{name}.json"), |w| {
                        Ok(w.write_all(interpret::summary_json(&m)?.as_bytes())?)
                    })?;
                    let sel: Vec<usize> = cfg.interpret.heatmap_dims.iter().copied().filter(|&d| d < m.dims).collect();
                    r.io.write(&format!("{dir}/is_{name}_heatmap.csv"), |w| {
                        Ok(w.write_all(interpret::export_is_heatmap(&m, &sel)?.as_bytes())?)
                    })?;
                }
                Ok(())
            })?;
        }

        if cfg.has_stage(Stage::Evaluate) {
            r.stage(&format!("evaluate/{dir}"), |r| {
                let outcome = run_task_suite(
                    &embedding,
                    &graph,
                    internal.as_ref(),
                    labels.as_ref(),
                    &cfg.suite_config(dim),
                )?;
                r.notices
                    .extend(outcome.notices.iter().map(|n| format!("evaluate/{dir}: {n}")));
                r.io.write(&format!("{dir}/reports.json"), |w| write_reports_json(&outcome.reports, w))?;
                r.io.write(&format!("{dir}/reports.csv"), |w| write_reports_csv(&outcome.reports, w))?;
                Ok(())
            })?;
        }
    }
    Ok(())
}

/// One row of a cross-run comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub run: String,
    pub dim: usize,
    pub task: String,
    pub metric: String,
    pub value: f64,
    /// Difference to the first run with the same (dim, task, metric).
    pub delta: Option<f64>,
}

/// Long-format comparison of the reports of several runs, restricted to the
/// (task, metric) cells every run produced.
pub fn compare_runs(run_dirs: &[PathBuf]) -> Result<Vec<ComparisonRow>> {
    if run_dirs.len() < 2 {
        return Err(Error::invalid("compare needs at least two runs"));
    }
    let mut per_run: Vec<(String, Vec<EvalReport>)> = Vec::new();
    for dir in run_dirs {
        let manifest = RunManifest::read(dir)?;
        let mut reports = Vec::new();
        for a in manifest.artifacts.iter().filter(|a| a.path.ends_with("reports.json")) {
            let f = fs::File::open(dir.join(&a.path))?;
            let rs: Vec<EvalReport> = serde_json::from_reader(BufReader::new(f))?;
            reports.extend(rs);
        }
        per_run.push((dir.display().to_string(), reports));
    }
    let cells = |rs: &[EvalReport]| -> BTreeSet<(TaskId, String)> {
        rs.iter().map(|r| (r.task, r.metric.as_str().to_owned())).collect()
    };
    let mut common = cells(&per_run[0].1);
    for (_, rs) in &per_run[1..] {
        common = common.intersection(&cells(rs)).cloned().collect();
    }
    if common.is_empty() {
        return Err(Error::invalid("runs share no evaluated tasks"));
    }
    let mut baseline: BTreeMap<(usize, TaskId, String), f64> = BTreeMap::new();
    let mut rows = Vec::new();
    for (run, reports) in &per_run {
        for r in reports {
            let metric = r.metric.as_str().to_owned();
            if !common.contains(&(r.task, metric.clone())) {
                continue;
            }
            let key = (r.config.dim, r.task, metric.clone());
            let delta = match baseline.get(&key) {
                Some(b) => Some(r.value - b),
                None => {
                    baseline.insert(key, r.value);
                    Some(0.0)
                }
            };
            rows.push(ComparisonRow {
                run: run.clone(),
                dim: r.config.dim,
                task: r.task.as_str().to_owned(),
                metric,
                value: r.value,
                delta,
            });
        }
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["run", "dim", "task", "metric", "value", "delta"])?;
    for r in rows {
        wr.write_record([
            r.run.clone(),
            r.dim.to_string(),
            r.task.clone(),
            r.metric.clone(),
            r.value.to_string(),
            r.delta.map(|d| d.to_string()).unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
