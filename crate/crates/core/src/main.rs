use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use metric_gate::corpus::{self, baseline_flag, is_held_out, SchemaDef};
use metric_gate::gate::{
    batch_json, batch_text, collect_inputs, validate_threshold, verdict_json, verdict_text, EmbedderKind,
    GateConfig, OutputFormat,
};
use metric_gate::gbdt::{self, GbdtHyperparams, GbdtModel};
use metric_gate::metrics::{evaluate, metrics_from_scores, EvalMetrics};
use metric_gate::{Error, Result};

const CONFIG_ENV: &str = "METRIC_GATE_CONFIG";

#[derive(Parser)]
#[command(name = "metric-gate", version, about = "Pre-execution privacy gate for metric SQL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a single query. Exits 0 if approved, 2 if blocked, 1 on error.
    Analyze(AnalyzeArgs),
    /// Score many query files.
    Batch(BatchArgs),
    /// Train a model on the training split of a corpus.
    Train(TrainArgs),
    /// Evaluate a model on the held-out split of a corpus.
    Eval(EvalArgs),
    /// Generate a labeled synthetic corpus.
    GenCorpus(GenCorpusArgs),
}

#[derive(Args, Clone, Default)]
struct PipelineArgs {
    /// Sensitive-column lexicon file.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, value_parser = ["builtin", "external"])]
    embedder: Option<String>,
    /// Executable for the external embedder.
    #[arg(long)]
    embedder_cmd: Option<PathBuf>,
    #[arg(long)]
    embed_dim: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct QuerySource {
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    stdin: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: QuerySource,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_parser = ["json", "text"])]
    format: Option<String>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct BatchArgs {
    /// Directories (their `.sql` files) or individual files.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_parser = ["json", "text"])]
    format: Option<String>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct GenCorpusArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Keys accepted in the file named by `METRIC_GATE_CONFIG`.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    threshold: Option<f64>,
    model: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    embedder: Option<EmbedderKind>,
    embedder_cmd: Option<PathBuf>,
    embed_dim: Option<usize>,
    format: Option<OutputFormat>,
}

fn load_config_file() -> Result<GateConfig> {
    let mut config = GateConfig::default();
    let Some(path) = std::env::var_os(CONFIG_ENV) else {
        return Ok(config);
    };
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    let file: ConfigFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    // relative paths in the file are resolved against its directory
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
    config.threshold = file.threshold.unwrap_or(config.threshold);
    config.model_path = file.model.map(resolve);
    config.lexicon_path = file.lexicon.map(resolve);
    config.embedder = file.embedder.unwrap_or_default();
    config.embedder_cmd = file.embedder_cmd.map(resolve);
    config.embed_dim = file.embed_dim.unwrap_or(config.embed_dim);
    config.format = file.format.unwrap_or_default();
    Ok(config)
}

fn build_config(
    model: Option<PathBuf>,
    threshold: Option<f64>,
    format: Option<&str>,
    pipeline: &PipelineArgs,
) -> Result<GateConfig> {
    let mut config = load_config_file()?;
    if model.is_some() {
        config.model_path = model;
    }
    if let Some(t) = threshold {
        config.threshold = t;
    }
    match format {
        Some("text") => config.format = OutputFormat::Text,
        Some(_) => config.format = OutputFormat::Json,
        None => {}
    }
    if pipeline.lexicon.is_some() {
        config.lexicon_path = pipeline.lexicon.clone();
    }
    match pipeline.embedder.as_deref() {
        Some("external") => config.embedder = EmbedderKind::External,
        Some(_) => config.embedder = EmbedderKind::Builtin,
        None => {}
    }
    if pipeline.embedder_cmd.is_some() {
        config.embedder_cmd = pipeline.embedder_cmd.clone();
    }
    if let Some(d) = pipeline.embed_dim {
        config.embed_dim = d;
    }
    validate_threshold(config.threshold)?;
    Ok(config)
}

fn read_source(source: &QuerySource) -> Result<(String, String)> {
    if let Some(q) = &source.query {
        Ok(("query".to_string(), q.clone()))
    } else if let Some(path) = &source.file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        Ok((path.to_string_lossy().into_owned(), text))
    } else {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Io { path: PathBuf::from("<stdin>"), source: e })?;
        Ok(("stdin".to_string(), text))
    }
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let config = build_config(args.model, args.threshold, args.format.as_deref(), &args.pipeline)?;
    let gate = config.load_gate()?;
    let (query_id, sql) = read_source(&args.source)?;
    let verdict = gate.detect_overexposure(&query_id, &sql)?;
    match config.format {
        OutputFormat::Json => println!("{}", verdict_json(&verdict)),
        OutputFormat::Text => println!("{}", verdict_text(&verdict)),
    }
    Ok(ExitCode::from(verdict.exit_code() as u8))
}

fn batch(args: BatchArgs) -> Result<ExitCode> {
    let config = build_config(args.model, args.threshold, args.format.as_deref(), &args.pipeline)?;
    let gate = config.load_gate()?;
    let inputs = collect_inputs(&args.paths)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let report = pool.install(|| gate.analyze_batch(&inputs));
    match config.format {
        OutputFormat::Json => println!("{}", batch_json(&report)),
        OutputFormat::Text => println!("{}", batch_text(&report)),
    }
    Ok(ExitCode::SUCCESS)
}

fn train(args: TrainArgs) -> Result<ExitCode> {
    let config = build_config(None, None, None, &args.pipeline)?;
    let pipeline = config.build_pipeline()?;
    let defaults = GbdtHyperparams::default();
    let hp = GbdtHyperparams {
        rounds: args.rounds.unwrap_or(defaults.rounds),
        max_depth: args.max_depth.unwrap_or(defaults.max_depth),
        learning_rate: args.eta.unwrap_or(defaults.learning_rate),
        l2_lambda: args.lambda.unwrap_or(defaults.l2_lambda),
        seed: args.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let entries = corpus::read_corpus(&args.corpus)?;
    let training: Vec<_> = entries.into_iter().filter(|e| !is_held_out(&e.query_id)).collect();
    let examples = pipeline.examples(&training)?;
    let model = gbdt::train(&examples, &hp, &pipeline.schema())?;
    model.save(&args.out)?;
    eprintln!(
        "trained {} trees on {} examples ({} positive); model {}",
        model.trees.len(),
        model.training_meta.n_examples,
        model.training_meta.n_positive,
        model.model_id()
    );
    Ok(ExitCode::SUCCESS)
}

fn print_metrics(label: &str, m: &EvalMetrics) {
    println!(
        "{label:<8} accuracy {:.6}  precision {:.6}  recall {:.6}  auc {:.6}  (tp {} fp {} tn {} fn {})",
        m.accuracy, m.precision, m.recall, m.auc, m.tp, m.fp, m.tn, m.fn_
    );
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let config = build_config(args.model, args.threshold, None, &args.pipeline)?;
    let pipeline = config.build_pipeline()?;
    let model_path = config.model_path.as_ref().ok_or_else(|| Error::Config("no model given".into()))?;
    let model = GbdtModel::load(model_path)?;
    model.check_schema(&pipeline.schema())?;

    let entries = corpus::read_corpus(&args.corpus)?;
    let held_out: Vec<_> = entries.into_iter().filter(|e| is_held_out(&e.query_id)).collect();
    if held_out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let examples = pipeline.examples(&held_out)?;
    let model_metrics = evaluate(&model, &examples, config.threshold)?;

    let baseline_scores = held_out
        .iter()
        .map(|e| pipeline.analyze(&e.sql).map(|a| (f64::from(baseline_flag(&a.features)), e.label)))
        .collect::<Result<Vec<_>>>()?;
    let baseline_metrics = metrics_from_scores(&baseline_scores, 0.5)?;

    println!("held-out queries: {}  threshold: {:.6}", held_out.len(), config.threshold);
    print_metrics("model", &model_metrics);
    print_metrics("baseline", &baseline_metrics);
    Ok(ExitCode::SUCCESS)
}

fn gen_corpus(args: GenCorpusArgs) -> Result<ExitCode> {
    let entries = corpus::generate_corpus(args.n, args.seed, &SchemaDef::patient_data())?;
    corpus::write_corpus(&entries, &args.out)?;
    let positives = entries.iter().filter(|e| e.label == 1).count();
    eprintln!("wrote {} queries ({} labeled risky) to {}", entries.len(), positives, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Batch(a) => batch(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::GenCorpus(a) => gen_corpus(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}
