//! Experiment runner: every algorithm as a subcommand with seeded configs
//! and persisted artifacts (manifest.json, results.csv, curves/*.csv).

mod artifacts;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constructive::{
    auto_forward_thinking, cascor_train, caser_re_train, forward_thinking_train,
    prune_to_tradeoff, AftConfig, CandidatePoolConfig, InsertKind, PoolObjective, ReusePolicy,
};
use crate::data::{load_mnist, synthetic_polygons, Dataset};
use crate::error::{Error, Result};
use crate::network::{build_layered, AnyNetwork, ArchitectureSpec, Network};
use crate::numerics::{Activation, Rng};
use crate::search::{
    evolve, exploration_report, random_search, EvaluatedSpec, EvolutionParams, FitnessConfig,
    SearchSpace,
};
use crate::training::{evaluate, fit, Monitor, OptimizerKind, TrainConfig};

use artifacts::ArtifactWriter;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Io(_)
        | Error::BadMagic { .. }
        | Error::Truncated { .. }
        | Error::CountMismatch { .. } => 3,
        _ => 4,
    }
}

#[derive(Parser, Debug)]
#[command(name = "archforge", version, about = "Architecture design experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize, Default)]
pub struct CommonOpts {
    /// Master seed; every run is replay-identical given the same seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for manifest.json, results.csv, curves/.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use the synthetic polygon dataset instead of MNIST.
    #[arg(long, global = true, default_value_t = false)]
    #[serde(default)]
    pub synthetic: bool,
    /// Number of synthetic points to sample.
    #[arg(long, global = true)]
    pub synthetic_size: Option<usize>,
    /// Directory with the four MNIST IDX files (optionally .gz).
    #[arg(long, global = true)]
    pub mnist_dir: Option<PathBuf>,
    /// Keep only the first N training patterns (before the split).
    #[arg(long, global = true)]
    pub subset: Option<usize>,
    /// Validation fraction of the training data.
    #[arg(long, global = true)]
    pub val_fraction: Option<f64>,
    /// Worker threads; 1 is the reference deterministic mode.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Zero the seconds columns so replays compare byte-for-byte.
    #[arg(long, global = true, default_value_t = false)]
    #[serde(default)]
    pub no_timings: bool,
}

impl CommonOpts {
    /// Fills unset flags from a JSON config file, if one was given.
    fn merged(&self) -> Result<CommonOpts> {
        let mut out = self.clone();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)?;
            let file: CommonOpts = serde_json::from_str(&text)
                .map_err(|e| Error::config(format!("bad config file: {e}")))?;
            out.seed = out.seed.or(file.seed);
            out.out = out.out.or(file.out);
            out.synthetic |= file.synthetic;
            out.synthetic_size = out.synthetic_size.or(file.synthetic_size);
            out.mnist_dir = out.mnist_dir.or(file.mnist_dir);
            out.subset = out.subset.or(file.subset);
            out.val_fraction = out.val_fraction.or(file.val_fraction);
            out.jobs = out.jobs.or(file.jobs);
            out.no_timings |= file.no_timings;
        }
        Ok(out)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn out_dir(&self, default_name: &str) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("runs/{default_name}")))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one fixed architecture with early stopping.
    Train(TrainArgs),
    /// Random search over the architecture space.
    RandomSearch(RandomSearchArgs),
    /// Evolutionary search over the architecture space.
    Evolve(EvolveArgs),
    /// Cascade-correlation constructive training.
    Cascor(CascorArgs),
    /// Caser/CaserRe constructive training (loss-minimizing cascade).
    Caser(CaserArgs),
    /// Greedy layer-wise (forward thinking) training of a fixed plan.
    ForwardThinking(ForwardThinkingArgs),
    /// Automated forward thinking with width search and pruning.
    Aft(AftArgs),
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long, default_value = "rmsprop")]
    pub optimizer: String,
    #[arg(long, default_value_t = 100)]
    pub max_epochs: usize,
    /// Early-stopping patience on validation accuracy.
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
}

#[derive(Args, Debug)]
pub struct RandomSearchArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Number of sampled configurations.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Trainings per spec (different initial weights).
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    /// Epochs per training.
    #[arg(long, default_value_t = 3)]
    pub fit_epochs: usize,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    #[arg(long, default_value_t = 50)]
    pub population: usize,
    #[arg(long, default_value_t = 0.10)]
    pub mutation: f64,
    #[arg(long, default_value_t = 0.40)]
    pub retain: f64,
    #[arg(long, default_value_t = 0.10)]
    pub random_select: f64,
    /// Allow duplicate specs within a generation.
    #[arg(long, default_value_t = false)]
    pub no_dedupe: bool,
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    #[arg(long, default_value_t = 3)]
    pub fit_epochs: usize,
}

#[derive(Args, Debug)]
pub struct CascorArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Units to insert.
    #[arg(long, default_value_t = 10)]
    pub units: usize,
    #[arg(long, default_value_t = 8)]
    pub pool: usize,
    #[arg(long, default_value_t = 2)]
    pub candidate_epochs: usize,
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long, default_value = "rmsprop")]
    pub optimizer: String,
    #[arg(long, default_value_t = 50)]
    pub max_epochs: usize,
    /// Output-training patience on validation accuracy.
    #[arg(long, default_value_t = 3)]
    pub patience: usize,
}

#[derive(Args, Debug)]
pub struct CaserArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[arg(long, default_value_t = 10)]
    pub insertions: usize,
    #[arg(long, default_value_t = 8)]
    pub pool: usize,
    #[arg(long, default_value_t = 1)]
    pub candidate_epochs: usize,
    /// never | always | threshold | pool-member
    #[arg(long, default_value = "never")]
    pub reuse_policy: String,
    /// Accuracy drop that triggers reuse under the threshold policy.
    #[arg(long, default_value_t = 0.05)]
    pub threshold_drop: f64,
    /// Insert width-W cascading layers instead of single units.
    #[arg(long)]
    pub layer_width: Option<usize>,
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long, default_value = "rmsprop")]
    pub optimizer: String,
    #[arg(long, default_value_t = 50)]
    pub max_epochs: usize,
}

#[derive(Args, Debug)]
pub struct ForwardThinkingArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    /// Comma-separated hidden widths, e.g. 512,512.
    #[arg(long, default_value = "512,512")]
    pub layers: String,
    #[arg(long, default_value = "tanh")]
    pub activation: String,
    #[arg(long, default_value = "rmsprop")]
    pub optimizer: String,
    #[arg(long, default_value_t = 100)]
    pub max_epochs: usize,
}

#[derive(Args, Debug)]
pub struct AftArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[arg(long, default_value_t = 10)]
    pub max_layers: usize,
    #[arg(long, default_value_t = 8)]
    pub pool: usize,
    #[arg(long, default_value_t = 2)]
    pub candidate_epochs: usize,
    #[arg(long, default_value_t = 50)]
    pub width_min: usize,
    #[arg(long, default_value_t = 1000)]
    pub width_max: usize,
    #[arg(long, default_value_t = 50)]
    pub width_step: usize,
    /// Allow widths to increase with depth.
    #[arg(long, default_value_t = false)]
    pub no_monotone: bool,
    /// Pruning tolerance below the peak validation accuracy.
    #[arg(long, default_value_t = 0.001)]
    pub epsilon: f64,
    #[arg(long, default_value = "relu")]
    pub activation: String,
    #[arg(long, default_value = "rmsprop")]
    pub optimizer: String,
    #[arg(long, default_value_t = 50)]
    pub max_epochs: usize,
}

/// Train/validation/test data resolved from the flags.
struct LoadedData {
    train: Dataset,
    val: Dataset,
    test: Option<Dataset>,
    source: String,
}

fn load_data(common: &CommonOpts) -> Result<LoadedData> {
    let seed = common.seed();
    let val_fraction = common.val_fraction.unwrap_or(0.2);
    if !(0.0 < val_fraction && val_fraction < 1.0) {
        return Err(Error::config("val-fraction must be in (0,1)"));
    }
    if common.synthetic {
        let n = common.synthetic_size.unwrap_or(2000);
        let data = synthetic_polygons(n, Rng::new(seed).derive(0xDA7A).seed())?;
        let (train, val) = data.split(1.0 - val_fraction, &mut Rng::new(seed).derive(0x5917))?;
        return Ok(LoadedData {
            train,
            val,
            test: None,
            source: format!("synthetic:{n}"),
        });
    }
    let dir = common.mnist_dir.clone().ok_or_else(|| {
        Error::config("no data source: pass --synthetic or --mnist-dir <DIR>")
    })?;
    let (mut full_train, test) = load_mnist(&dir)?;
    if let Some(n) = common.subset {
        full_train = full_train.take(n);
    }
    let (train, val) = full_train.split(1.0 - val_fraction, &mut Rng::new(seed).derive(0x5917))?;
    Ok(LoadedData {
        train,
        val,
        test: Some(test),
        source: format!("mnist:{}", dir.display()),
    })
}

fn parse_activation(s: &str) -> Result<Activation> {
    Activation::from_str(s)
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind> {
    OptimizerKind::from_str(s)
}

fn configure_jobs(common: &CommonOpts) {
    if let Some(jobs) = common.jobs {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Train(a) => run_train(a),
        Command::RandomSearch(a) => run_random_search(a),
        Command::Evolve(a) => run_evolve(a),
        Command::Cascor(a) => run_cascor(a),
        Command::Caser(a) => run_caser(a),
        Command::ForwardThinking(a) => run_forward_thinking(a),
        Command::Aft(a) => run_aft(a),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn search_csv(
    rows: &[EvaluatedSpec],
    strategy: &str,
    runs: usize,
    epochs: usize,
    initial: &[ArchitectureSpec],
    include_timings: bool,
) -> String {
    let initial: std::collections::HashSet<&ArchitectureSpec> = initial.iter().collect();
    let mut out = String::from(
        "strategy,generation,depth,width,activation,optimizer,fitness,runs,epochs,seconds,in_initial_population\n",
    );
    for e in rows {
        let seconds = if include_timings { e.seconds } else { 0.0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            strategy,
            e.generation.unwrap_or(0),
            e.spec.depth,
            e.spec.width,
            e.spec.hidden_activation.name(),
            e.spec.optimizer.name(),
            e.fitness,
            runs,
            epochs,
            seconds,
            u8::from(initial.contains(&e.spec)),
        ));
    }
    out
}

fn run_train(args: TrainArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    let activation = parse_activation(&args.activation)?;
    let optimizer = parse_optimizer(&args.optimizer)?;
    if args.depth == 0 || args.width == 0 {
        return Err(Error::config("depth and width must be >= 1"));
    }
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let spec = ArchitectureSpec {
        depth: args.depth,
        width: args.width,
        hidden_activation: activation,
        optimizer,
    };
    let cfg = TrainConfig::for_kind(optimizer)
        .with_max_epochs(args.max_epochs)
        .with_early_stop(Monitor::ValAccuracy, args.patience);
    let mut rng = Rng::new(common.seed()).derive(1);
    let mut net = build_layered(data.train.input_dim(), &spec.hidden_plan(), data.train.class_count)?;
    net.init_weights(&mut rng);
    let record = fit(&mut net, &data.train, &data.val, &cfg, &mut rng)?;

    let (val_loss, val_acc) = evaluate(&net, &data.val, cfg.batch_size)?;
    let test_acc = match &data.test {
        Some(test) => Some(evaluate(&net, test, cfg.batch_size)?.1),
        None => None,
    };

    let mut w = ArtifactWriter::new(&common.out_dir("train"))?;
    let outcome: Result<()> = (|| {
        w.write("results.csv", record.to_csv(!common.no_timings))?;
        w.save_network(&AnyNetwork::Layered(net.clone()), common.seed())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "train",
            "seed": common.seed(),
            "data": data.source,
            "config": {
                "spec": spec,
                "train": cfg,
                "val_fraction": common.val_fraction.unwrap_or(0.2),
            },
            "timings": { "total_seconds": started.elapsed().as_secs_f64() },
            "summary": {
                "stopped_epoch": record.stopped_epoch,
                "best_epoch": record.best_epoch,
                "val_loss": val_loss,
                "val_accuracy": val_acc,
                "test_accuracy": test_acc,
                "diverged": record.diverged,
            },
        }))
    })();
    w.finish(outcome)?;
    println!(
        "train {spec}: stopped epoch {}, best epoch {}, val acc {:.4}{}",
        record.stopped_epoch,
        record.best_epoch,
        val_acc,
        test_acc.map_or(String::new(), |t| format!(", test acc {t:.4}")),
    );
    Ok(())
}

fn run_random_search(args: RandomSearchArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    if args.n == 0 {
        return Err(Error::config("--n must be >= 1"));
    }
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let space = SearchSpace::default();
    let fitness = FitnessConfig {
        runs: args.runs,
        epochs: args.fit_epochs,
    };
    let ranked = random_search(&space, args.n, &data.train, &data.val, &fitness, common.seed())?;
    let specs: Vec<ArchitectureSpec> = ranked.iter().map(|e| e.spec).collect();
    let report = exploration_report(&ranked, &space, &specs);

    let mut w = ArtifactWriter::new(&common.out_dir("random-search"))?;
    let outcome: Result<()> = (|| {
        w.write(
            "results.csv",
            search_csv(&ranked, "random", args.runs, args.fit_epochs, &specs, !common.no_timings),
        )?;
        w.write("curves/histograms.csv", report.histograms_csv())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "random-search",
            "seed": common.seed(),
            "data": data.source,
            "config": { "n": args.n, "fitness": fitness },
            "timings": { "total_seconds": started.elapsed().as_secs_f64() },
            "summary": {
                "best": ranked.first().map(|e| (e.spec, e.fitness)),
                "distinct_specs": report.distinct_specs,
                "space_coverage": report.space_coverage,
            },
        }))
    })();
    w.finish(outcome)?;
    if let Some(best) = ranked.first() {
        println!(
            "random-search: best {} fitness {:.4} ({} distinct of {} sampled)",
            best.spec, best.fitness, report.distinct_specs, args.n
        );
    }
    Ok(())
}

fn run_evolve(args: EvolveArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let space = SearchSpace::default();
    let params = EvolutionParams {
        population_size: args.population,
        mutation_chance: args.mutation,
        retain_rate: args.retain,
        random_select_rate: args.random_select,
        dedupe: !args.no_dedupe,
        budget: args.budget,
        fitness: FitnessConfig {
            runs: args.runs,
            epochs: args.fit_epochs,
        },
    };
    let outcome = evolve(&space, &params, &data.train, &data.val, common.seed())?;
    let initial: Vec<ArchitectureSpec> = outcome
        .history
        .iter()
        .filter(|e| e.generation == Some(0))
        .map(|e| e.spec)
        .collect();
    let report = exploration_report(&outcome.history, &space, &initial);

    let mut w = ArtifactWriter::new(&common.out_dir("evolve"))?;
    let best = outcome.population.first().cloned();
    let write_outcome: Result<()> = (|| {
        w.write(
            "results.csv",
            search_csv(
                &outcome.history,
                "evolution",
                args.runs,
                args.fit_epochs,
                &initial,
                !common.no_timings,
            ),
        )?;
        w.write("curves/histograms.csv", report.histograms_csv())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "evolve",
            "seed": common.seed(),
            "data": data.source,
            "config": params,
            "timings": { "total_seconds": started.elapsed().as_secs_f64() },
            "summary": {
                "best": best.as_ref().map(|e| (e.spec, e.fitness)),
                "generations": outcome.generations,
                "evaluations": outcome.evaluations,
                "distinct_specs": report.distinct_specs,
                "in_initial_fraction": report.in_initial_fraction,
            },
        }))
    })();
    w.finish(write_outcome)?;
    if let Some(best) = best {
        println!(
            "evolve: best {} fitness {:.4} over {} generations ({} evaluations)",
            best.spec, best.fitness, outcome.generations, outcome.evaluations
        );
    }
    Ok(())
}

fn run_cascor(args: CascorArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    let activation = parse_activation(&args.activation)?;
    let optimizer = parse_optimizer(&args.optimizer)?;
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let pool = CandidatePoolConfig {
        pool_size: args.pool,
        candidate_epochs: args.candidate_epochs,
        objective: PoolObjective::CorrelationMax,
        reuse_policy: ReusePolicy::Never,
        insert_kind: InsertKind::Unit,
    };
    let cfg = TrainConfig::for_kind(optimizer)
        .with_max_epochs(args.max_epochs)
        .with_early_stop(Monitor::ValAccuracy, args.patience);
    let (net, record) = cascor_train(
        &data.train,
        &data.val,
        args.units,
        activation,
        &pool,
        &cfg,
        common.seed(),
    )?;
    let (_, val_acc) = evaluate(&net, &data.val, cfg.batch_size)?;

    let mut w = ArtifactWriter::new(&common.out_dir("cascor"))?;
    let outcome: Result<()> = (|| {
        w.write("results.csv", record.to_csv())?;
        w.save_network(&AnyNetwork::Cascade(net.clone()), common.seed())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "cascor",
            "seed": common.seed(),
            "data": data.source,
            "config": { "units": args.units, "pool": pool, "train": cfg },
            "timings": {
                "total_seconds": started.elapsed().as_secs_f64(),
                "candidate_seconds": record.candidate_seconds,
                "main_seconds": record.main_seconds,
            },
            "summary": { "insertions": record.insertions.len(), "val_accuracy": val_acc },
        }))
    })();
    w.finish(outcome)?;
    println!(
        "cascor: {} units inserted, val acc {:.4}",
        record.insertions.len(),
        val_acc
    );
    Ok(())
}

fn run_caser(args: CaserArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    let activation = parse_activation(&args.activation)?;
    let optimizer = parse_optimizer(&args.optimizer)?;
    let reuse_policy = match args.reuse_policy.as_str() {
        "never" => ReusePolicy::Never,
        "always" => ReusePolicy::Always,
        "threshold" => ReusePolicy::Threshold {
            drop: args.threshold_drop,
        },
        "pool-member" => ReusePolicy::PoolMember,
        other => return Err(Error::config(format!("unknown reuse policy: {other}"))),
    };
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let pool = CandidatePoolConfig {
        pool_size: args.pool,
        candidate_epochs: args.candidate_epochs,
        objective: PoolObjective::LossMin,
        reuse_policy,
        insert_kind: match args.layer_width {
            Some(width) => InsertKind::Layer { width },
            None => InsertKind::Unit,
        },
    };
    let cfg = TrainConfig::for_kind(optimizer).with_max_epochs(args.max_epochs);
    let (net, record) = caser_re_train(
        &data.train,
        &data.val,
        args.insertions,
        activation,
        &pool,
        &cfg,
        common.seed(),
    )?;
    let (_, val_acc) = evaluate(&net, &data.val, cfg.batch_size)?;

    let mut w = ArtifactWriter::new(&common.out_dir("caser"))?;
    let outcome: Result<()> = (|| {
        w.write("results.csv", record.to_csv())?;
        w.save_network(&AnyNetwork::Cascade(net.clone()), common.seed())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "caser",
            "seed": common.seed(),
            "data": data.source,
            "config": { "insertions": args.insertions, "pool": pool, "train": cfg },
            "timings": {
                "total_seconds": started.elapsed().as_secs_f64(),
                "candidate_seconds": record.candidate_seconds,
                "main_seconds": record.main_seconds,
            },
            "summary": { "insertions": record.insertions.len(), "val_accuracy": val_acc },
        }))
    })();
    w.finish(outcome)?;
    println!(
        "caser ({}): {} insertions, val acc {:.4}",
        args.reuse_policy,
        record.insertions.len(),
        val_acc
    );
    Ok(())
}

fn parse_layer_plan(s: &str, activation: Activation) -> Result<Vec<(usize, Activation)>> {
    let widths: Vec<usize> = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::config(format!("bad layer width: {part:?}")))
        })
        .collect::<Result<_>>()?;
    if widths.is_empty() || widths.iter().any(|&w| w == 0) {
        return Err(Error::config("layer widths must be >= 1"));
    }
    Ok(widths.into_iter().map(|w| (w, activation)).collect())
}

fn run_forward_thinking(args: ForwardThinkingArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    let activation = parse_activation(&args.activation)?;
    let optimizer = parse_optimizer(&args.optimizer)?;
    let plan = parse_layer_plan(&args.layers, activation)?;
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let cfg = TrainConfig::for_kind(optimizer).with_max_epochs(args.max_epochs);
    let (net, records) =
        forward_thinking_train(&data.train, &data.val, &plan, &cfg, common.seed())?;
    let (_, val_acc) = evaluate(&net, &data.val, cfg.batch_size)?;
    let test_acc = match &data.test {
        Some(test) => Some(evaluate(&net, test, cfg.batch_size)?.1),
        None => None,
    };

    let mut w = ArtifactWriter::new(&common.out_dir("forward-thinking"))?;
    let outcome: Result<()> = (|| {
        let mut csv = String::from("layer,epoch,train_loss,train_acc,val_loss,val_acc,seconds\n");
        for (layer, rec) in records.iter().enumerate() {
            for e in &rec.epochs {
                let seconds = if common.no_timings { 0.0 } else { e.seconds };
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    layer + 1,
                    e.epoch,
                    e.train_loss,
                    e.train_acc,
                    e.val_loss,
                    e.val_acc,
                    seconds
                ));
            }
        }
        w.write("results.csv", csv)?;
        w.save_network(&AnyNetwork::Layered(net.clone()), common.seed())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "forward-thinking",
            "seed": common.seed(),
            "data": data.source,
            "config": { "layers": args.layers, "train": cfg },
            "timings": { "total_seconds": started.elapsed().as_secs_f64() },
            "summary": { "val_accuracy": val_acc, "test_accuracy": test_acc },
        }))
    })();
    w.finish(outcome)?;
    println!(
        "forward-thinking [{}]: val acc {:.4}{}",
        args.layers,
        val_acc,
        test_acc.map_or(String::new(), |t| format!(", test acc {t:.4}")),
    );
    Ok(())
}

fn run_aft(args: AftArgs) -> Result<()> {
    let common = args.common.merged()?;
    configure_jobs(&common);
    let activation = parse_activation(&args.activation)?;
    let optimizer = parse_optimizer(&args.optimizer)?;
    let data = load_data(&common)?;
    let started = std::time::Instant::now();

    let aft = AftConfig {
        pool_size: args.pool,
        width_min: args.width_min,
        width_max: args.width_max,
        width_step: args.width_step,
        candidate_epochs: args.candidate_epochs,
        monotone: !args.no_monotone,
        max_layers: args.max_layers,
        activation,
    };
    let cfg = TrainConfig::for_kind(optimizer).with_max_epochs(args.max_epochs);
    let (net, curve, records) =
        auto_forward_thinking(&data.train, &data.val, &aft, &cfg, common.seed())?;
    let (pruned, chosen_depth) = prune_to_tradeoff(
        &curve,
        &net,
        args.epsilon,
        &data.train,
        &data.val,
        &cfg,
        common.seed(),
    )?;
    let (_, built_acc) = evaluate(&net, &data.val, cfg.batch_size)?;
    let (_, pruned_acc) = evaluate(&pruned, &data.val, cfg.batch_size)?;
    let test_acc = match &data.test {
        Some(test) => Some(evaluate(&pruned, test, cfg.batch_size)?.1),
        None => None,
    };

    let mut w = ArtifactWriter::new(&common.out_dir("aft"))?;
    let outcome: Result<()> = (|| {
        w.write("results.csv", curve.to_csv())?;
        for (layer, rec) in records.iter().enumerate() {
            w.write(
                &format!("curves/layer_{}.csv", layer + 1),
                rec.to_csv(!common.no_timings),
            )?;
        }
        w.save_network(&AnyNetwork::Layered(pruned.clone()), common.seed())?;
        w.manifest(json!({
            "tool_version": TOOL_VERSION,
            "command": "aft",
            "seed": common.seed(),
            "data": data.source,
            "config": { "aft": aft, "epsilon": args.epsilon, "train": cfg },
            "timings": { "total_seconds": started.elapsed().as_secs_f64() },
            "summary": {
                "built_depth": curve.points.len(),
                "chosen_depth": chosen_depth,
                "widths": curve.points.iter().map(|p| p.width).collect::<Vec<_>>(),
                "built_val_accuracy": built_acc,
                "pruned_val_accuracy": pruned_acc,
                "test_accuracy": test_acc,
                "stopped_early": curve.stopped_early,
            },
        }))
    })();
    w.finish(outcome)?;
    println!(
        "aft: built depth {}, pruned to {}, val acc {:.4}{}",
        curve.points.len(),
        chosen_depth,
        pruned_acc,
        test_acc.map_or(String::new(), |t| format!(", test acc {t:.4}")),
    );
    Ok(())
}
