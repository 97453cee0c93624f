use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use graphlens::eval::suite::{run_task_suite, write_reports_csv, write_reports_json, SuiteConfig, TaskId};
use graphlens::eval::FeatureOp;
use graphlens::graph::{self, Delimiter, EdgeListOptions, Graph, LabelFormat, NodeGrouping};
use graphlens::interpret::{self, Agg, ISConfig, KMode};
use graphlens::pipeline::{self, RunConfig, Stage};
use graphlens::walk::{self, CooccurrenceConfig, TransactionLog, WalkConfig, WalkCorpus};
use graphlens::{louvain, seed, sgns, EmbeddingMatrix, Error, Result, TrainConfig};

#[derive(Parser)]
#[command(name = "graphlens", version, about = "Random-walk node embeddings, communities and interpretability scores")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print node count, edge count, density and component count as JSON.
    ///
    /// Density is 2E / (N (N - 1)). Published dataset tables sometimes print
    /// a different figure for the same counts; this command always reports the
    /// value implied by the counts. Flickr (80,513 nodes, 5,899,882 edges)
    /// comes out at about 1.82e-3, not the 1.18e-3 often printed for it.
    Stats {
        edges: PathBuf,
        #[arg(long, default_value = "whitespace")]
        delimiter: Delimiter,
    },
    /// Generate a walk corpus from an edge list or a transaction log.
    Walk(WalkCmd),
    /// Train skip-gram embeddings on a walk corpus.
    Train(TrainCmd),
    /// Detect communities with Louvain.
    Communities(CommunitiesCmd),
    /// Interpretability scores of an embedding against a node grouping.
    Interpret(InterpretCmd),
    /// Run the downstream task suite on an embedding.
    Evaluate(EvaluateCmd),
    /// Run a configured pipeline and write a manifest.
    Pipeline(PipelineCmd),
    /// Compare evaluation reports across run directories.
    Compare {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct WalkArgs {
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    /// Co-occurrence window for transaction logs.
    #[arg(long)]
    window_seconds: Option<u64>,
    /// Count each item pair once per account.
    #[arg(long)]
    dedup_per_account: bool,
}

#[derive(Args, Clone, Default)]
struct TrainArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    initial_learning_rate: Option<f64>,
    #[arg(long)]
    min_learning_rate: Option<f64>,
    #[arg(long)]
    unigram_exponent: Option<f64>,
    #[arg(long)]
    subsample_threshold: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    shrink_window: Option<bool>,
}

impl TrainArgs {
    fn apply(&self, c: &mut TrainConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(dim, window, negatives, epochs, initial_learning_rate, min_learning_rate,
             unigram_exponent, subsample_threshold, workers, shrink_window);
    }
}

#[derive(Args, Clone, Default)]
struct IsArgs {
    #[arg(long)]
    k_mode: Option<KMode>,
    #[arg(long)]
    fixed_k: Option<usize>,
    #[arg(long)]
    agg1: Option<Agg>,
    #[arg(long)]
    agg2: Option<Agg>,
}

impl IsArgs {
    fn apply(&self, c: &mut ISConfig) {
        if let Some(v) = self.k_mode {
            c.k_mode = v;
        }
        if let Some(v) = self.fixed_k {
            c.fixed_k = v;
            if self.k_mode.is_none() {
                c.k_mode = KMode::Fixed;
            }
        }
        if let Some(v) = self.agg1 {
            c.agg1 = v;
        }
        if let Some(v) = self.agg2 {
            c.agg2 = v;
        }
    }
}

#[derive(Args, Clone, Default)]
struct EvalArgs {
    /// Comma-separated task ids.
    #[arg(long, value_delimiter = ',')]
    tasks: Option<Vec<TaskId>>,
    #[arg(long)]
    pair_op: Option<FeatureOp>,
    /// Test fraction of the stratified split.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    holdout_fraction: Option<f64>,
    /// Number of labelled pairs for pair tasks.
    #[arg(long)]
    pairs: Option<usize>,
}

#[derive(Args, Clone)]
struct GraphInput {
    /// Edge list.
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, default_value = "whitespace")]
    delimiter: Delimiter,
}

#[derive(Args)]
struct WalkCmd {
    #[arg(long, required_unless_present = "transactions", conflicts_with = "transactions")]
    edges: Option<PathBuf>,
    #[arg(long, default_value = "whitespace")]
    delimiter: Delimiter,
    /// CSV with columns account,item,timestamp.
    #[arg(long)]
    transactions: Option<PathBuf>,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainCmd {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Text embedding output.
    #[arg(long)]
    out: PathBuf,
    /// Also write the binary sidecar.
    #[arg(long)]
    binary: Option<PathBuf>,
}

#[derive(Args)]
struct CommunitiesCmd {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assignment CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct GroupingInput {
    /// External labels.
    #[arg(long, conflicts_with = "communities")]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "tab")]
    label_format: LabelFormat,
    /// Community assignment CSV.
    #[arg(long)]
    communities: Option<PathBuf>,
}

#[derive(Args)]
struct InterpretCmd {
    #[arg(long)]
    embedding: PathBuf,
    #[command(flatten)]
    graph: GraphInput,
    #[command(flatten)]
    grouping: GroupingInput,
    #[command(flatten)]
    is: IsArgs,
    /// Dimensions for the heatmap export (all when omitted).
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Long-format CSV output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateCmd {
    #[arg(long)]
    embedding: PathBuf,
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value = "tab")]
    label_format: LabelFormat,
    #[arg(long)]
    communities: Option<PathBuf>,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    walk: WalkArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reports JSON; a CSV is written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineCmd {
    /// TOML or JSON run configuration.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Dimension sweep, e.g. 10,64,128.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    stages: Option<Vec<Stage>>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    heatmap_dims: Option<Vec<usize>>,
    #[command(flatten)]
    walk: WalkArgs,
    #[command(flatten)]
    train: TrainArgs,
    #[command(flatten)]
    is: IsArgs,
    #[command(flatten)]
    eval: EvalArgs,
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::File {
            path: path.display().to_string(),
            source: e,
        })
}

fn create(path: &Path) -> Result<io::BufWriter<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(io::BufWriter::new(fs::File::create(path)?))
}

fn load_graph(g: &GraphInput) -> Result<Graph> {
    graph::load_edge_list(open(&g.edges)?, EdgeListOptions { delimiter: g.delimiter })
}

fn walk_config(args: &WalkArgs, seed: u64) -> Result<WalkConfig> {
    let (Some(walks_per_node), Some(walk_length)) = (args.walks_per_node, args.walk_length) else {
        return Err(Error::InvalidArgument(
            "--walks-per-node and --walk-length are required".into(),
        ));
    };
    let cfg = WalkConfig {
        walks_per_node,
        walk_length,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_grouping(
    graph: &Graph,
    labels: Option<&Path>,
    format: LabelFormat,
    communities: Option<&Path>,
) -> Result<(Option<NodeGrouping>, Option<NodeGrouping>)> {
    let external = labels
        .map(|p| graph::load_labels_with(open(p)?, graph, format))
        .transpose()?;
    let internal = communities
        .map(|p| graph::load_partition_csv(open(p)?, graph))
        .transpose()?;
    Ok((internal, external))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { edges, delimiter } => {
            let g = graph::load_edge_list(open(&edges)?, EdgeListOptions { delimiter })?;
            if g.self_loops_dropped() > 0 {
                log::warn!("dropped {} self-loops", g.self_loops_dropped());
            }
            let stats = graph::graph_stats(&g);
            println!("{}", serde_json::to_string(&stats)?);
        }
        Command::Walk(cmd) => {
            let corpus = match (&cmd.edges, &cmd.transactions) {
                (Some(e), _) => {
                    let g = graph::load_edge_list(open(e)?, EdgeListOptions { delimiter: cmd.delimiter })?;
                    walk::generate_walks(&g, &walk_config(&cmd.walk, cmd.seed)?)?
                }
                (None, Some(t)) => {
                    let window_seconds = cmd.walk.window_seconds.ok_or_else(|| {
                        Error::InvalidArgument("--window-seconds is required for transactions".into())
                    })?;
                    let log = TransactionLog::read_csv(open(t)?)?;
                    walk::generate_cooccurrence_pairs(
                        &log,
                        &CooccurrenceConfig {
                            window_seconds,
                            dedup_per_account: cmd.walk.dedup_per_account,
                        },
                    )?
                    .0
                }
                (None, None) => unreachable!("clap enforces an input"),
            };
            corpus.write(create(&cmd.out)?)?;
            log::info!("{} walks, {} tokens", corpus.num_walks(), corpus.total_tokens());
        }
        Command::Train(cmd) => {
            let corpus = WalkCorpus::read(open(&cmd.corpus)?)?;
            let mut cfg = TrainConfig {
                seed: cmd.seed,
                ..TrainConfig::default()
            };
            cmd.train.apply(&mut cfg);
            let emb = sgns::train(&corpus, &cfg)?;
            emb.write_text(create(&cmd.out)?)?;
            if let Some(b) = &cmd.binary {
                emb.write_binary(create(b)?)?;
            }
        }
        Command::Communities(cmd) => {
            let g = load_graph(&cmd.graph)?;
            let a = louvain::louvain(&g, cmd.resolution, cmd.seed)?;
            a.write_csv(&g, create(&cmd.out)?)?;
            println!("{}", a.summary_json()?);
        }
        Command::Interpret(cmd) => {
            let g = load_graph(&cmd.graph)?;
            let (internal, external) = load_grouping(
                &g,
                cmd.grouping.labels.as_deref(),
                cmd.grouping.label_format,
                cmd.grouping.communities.as_deref(),
            )?;
            let grouping = internal.or(external).ok_or_else(|| {
                Error::InvalidArgument("give --labels or --communities".into())
            })?;
            let emb = EmbeddingMatrix::read_text(open(&cmd.embedding)?)?;
            let mut cfg = ISConfig::default();
            cmd.is.apply(&mut cfg);
            let m = interpret::interpretability(&emb, &grouping, &cfg)?;
            let dims: Vec<usize> = cmd.dims.unwrap_or_else(|| (0..m.dims).collect());
            create(&cmd.out)?.write_all(interpret::export_is_heatmap(&m, &dims)?.as_bytes())?;
            println!("{}", interpret::summary_json(&m)?);
        }
        Command::Evaluate(cmd) => {
            let g = load_graph(&cmd.graph)?;
            let (internal, external) = load_grouping(
                &g,
                cmd.labels.as_deref(),
                cmd.label_format,
                cmd.communities.as_deref(),
            )?;
            let emb = EmbeddingMatrix::read_text(open(&cmd.embedding)?)?;
            let mut cfg = SuiteConfig {
                seed: cmd.seed,
                ..SuiteConfig::default()
            };
            apply_eval(&cmd.eval, &mut cfg);
            if cfg.tasks.contains(&TaskId::LinkPrediction) {
                cfg.walk = walk_config(&cmd.walk, seed::derive(cmd.seed, "walk"))?;
            }
            cfg.train.seed = seed::derive(cmd.seed, "train");
            cmd.train.apply(&mut cfg.train);
            cfg.train.dim = emb.dim();
            let outcome = run_task_suite(&emb, &g, internal.as_ref(), external.as_ref(), &cfg)?;
            for n in &outcome.notices {
                eprintln!("skipped: {n}");
            }
            write_reports_json(&outcome.reports, create(&cmd.out)?)?;
            write_reports_csv(&outcome.reports, create(&cmd.out.with_extension("csv"))?)?;
        }
        Command::Pipeline(cmd) => {
            let mut cfg = RunConfig::load(&cmd.config)?;
            cfg.apply_env()?;
            apply_pipeline_overrides(&cmd, &mut cfg)?;
            let outcome = pipeline::run_pipeline(&cfg)?;
            for n in &outcome.manifest.notices {
                eprintln!("skipped: {n}");
            }
            println!("{}", cfg.output_dir.join(pipeline::MANIFEST).display());
        }
        Command::Compare { runs, out } => {
            let rows = pipeline::compare_runs(&runs)?;
            match out {
                Some(p) => pipeline::write_comparison_csv(&rows, create(&p)?)?,
                None => pipeline::write_comparison_csv(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn apply_eval(args: &EvalArgs, cfg: &mut SuiteConfig) {
    if let Some(t) = &args.tasks {
        cfg.tasks = t.clone();
    }
    if let Some(v) = args.pair_op {
        cfg.feature_op = v;
    }
    if let Some(v) = args.split {
        cfg.test_fraction = v;
    }
    if let Some(v) = args.holdout_fraction {
        cfg.holdout_fraction = v;
    }
    if let Some(v) = args.pairs {
        cfg.num_pairs = v;
    }
}

fn apply_pipeline_overrides(cmd: &PipelineCmd, cfg: &mut RunConfig) -> Result<()> {
    if let Some(v) = cmd.seed {
        cfg.seed = v;
    }
    if let Some(v) = &cmd.output_dir {
        cfg.output_dir = std::path::absolute(v)?;
    }
    if let Some(v) = &cmd.dims {
        cfg.dims = v.clone();
    }
    if let Some(v) = &cmd.stages {
        cfg.stages = v.clone();
    }
    if let Some(v) = cmd.resolution {
        cfg.louvain.resolution = v;
    }
    if let Some(v) = &cmd.heatmap_dims {
        cfg.interpret.heatmap_dims = v.clone();
    }
    if let Some(v) = cmd.walk.walks_per_node {
        cfg.walk.walks_per_node = v;
    }
    if let Some(v) = cmd.walk.walk_length {
        cfg.walk.walk_length = v;
    }
    if cmd.walk.window_seconds.is_some() {
        cfg.walk.window_seconds = cmd.walk.window_seconds;
    }
    if cmd.walk.dedup_per_account {
        cfg.walk.dedup_per_account = true;
    }
    cmd.train.apply(&mut cfg.train);
    cmd.is.apply(&mut cfg.interpret.config);

    let mut suite = SuiteConfig {
        tasks: cfg.eval.tasks.clone(),
        feature_op: cfg.eval.feature_op,
        test_fraction: cfg.eval.test_fraction,
        num_pairs: cfg.eval.num_pairs,
        holdout_fraction: cfg.eval.holdout_fraction,
        ..SuiteConfig::default()
    };
    apply_eval(&cmd.eval, &mut suite);
    cfg.eval.tasks = suite.tasks;
    cfg.eval.feature_op = suite.feature_op;
    cfg.eval.test_fraction = suite.test_fraction;
    cfg.eval.num_pairs = suite.num_pairs;
    cfg.eval.holdout_fraction = suite.holdout_fraction;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
