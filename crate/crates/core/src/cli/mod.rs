//! Commands behind the `sokoeval` binary.
//!
//! Exit codes: 0 success, 1 domain failure (unsolved levels, invalid input,
//! schema mismatch), 2 I/O or environment failure.

pub mod pipeline;
pub mod report;
pub mod sweep;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::corpus::{
    self, AnnotatedLevel, Annotation, AnnotationKind, AugmentScheme, Corpus, CorpusError,
    SolutionCache,
};
use crate::generator::{GenerationParams, GeneratorAdapter, NGramModel};
use crate::metrics::{
    evaluate, DistinctnessConfig, EvalConfig, Sample, SampleEvaluation, Tolerances,
};
use crate::solver::SolverConfig;

use pipeline::{produce_samples, GeneratorSource};
use report::LabeledReport;
use sweep::{SweepInputs, SweepResult, SweepSpec};

/// Environment variable overriding the default solution cache path.
pub const CACHE_ENV: &str = "SOKOEVAL_CACHE";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Domain(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Domain(_) | CliError::Schema(_) => 1,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sokoeval",
    version,
    about = "Sokoban level-generation evaluation toolkit"
)]
pub struct Cli {
    /// Worker threads for solving and distance computation (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve every level of a file and print a per-level table.
    Solve(SolveArgs),
    /// Load, slice, augment and optionally annotate a dataset.
    Prepare(PrepareArgs),
    /// Train the n-gram baseline on a corpus file.
    Train(TrainArgs),
    /// Generate samples with a trained n-gram model.
    Generate(GenerateArgs),
    /// Compute metrics for samples or a generator against a training corpus.
    Evaluate(EvaluateArgs),
    /// Grid sweep over temperature, top-p and beams.
    Sweep(SweepArgs),
    /// Render metrics report files as a table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InputFormat {
    /// Directory: Boxoban layout; file: corpus/Microban grammar.
    Auto,
    Microban,
    Boxoban,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Node-expansion budget.
    #[arg(long, default_value_t = crate::solver::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Disable corner-deadlock pruning.
    #[arg(long)]
    pub no_deadlock_pruning: bool,
    /// Solution cache file (falls back to $SOKOEVAL_CACHE).
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            budget: self.budget.max(1),
            deadlock_pruning: !self.no_deadlock_pruning,
        }
    }

    pub fn open_cache(&self) -> Result<Option<SolutionCache>, CliError> {
        let path = self
            .cache
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from));
        match path {
            Some(p) => match SolutionCache::open(&p) {
                Ok(c) => Ok(Some(c)),
                Err(e) => {
                    log::warn!("{e}; continuing without cache");
                    Ok(None)
                }
            },
            None => Ok(None),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Level file, or a directory of Boxoban-layout files.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub format: InputFormat,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AugmentArg {
    None,
    Flip,
    FlipRotate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AnnotationArg {
    Both,
    PropEmpty,
    SolutionLen,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Microban-layout file (blank-line separated, `;` comments).
    #[arg(long, conflicts_with = "boxoban", required_unless_present = "boxoban")]
    pub microban: Option<PathBuf>,
    /// Boxoban-layout file or directory of `*.txt` files (10x10 levels).
    #[arg(long)]
    pub boxoban: Option<PathBuf>,
    /// Fraction of levels to keep, sampled without replacement.
    #[arg(long, default_value_t = 1.0)]
    pub slice: f64,
    /// Seed for slicing.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = AugmentArg::None)]
    pub augment: AugmentArg,
    /// Prepend annotation lines; unsolvable levels are dropped.
    #[arg(long)]
    pub annotate: bool,
    /// Which annotation lines to write with --annotate.
    #[arg(long, value_enum, default_value_t = AnnotationArg::Both)]
    pub annotation: AnnotationArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output corpus file.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus file (plain or annotated).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Context length in characters.
    #[arg(long, default_value_t = 16)]
    pub order: usize,
    /// Output model file (JSON).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct GenArgs {
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    pub top_p: f64,
    #[arg(long, default_value_t = 1)]
    pub beams: usize,
    #[arg(long, default_value_t = 512)]
    pub max_chars: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GenArgs {
    pub fn params(&self) -> GenerationParams {
        GenerationParams {
            temperature: self.temperature,
            top_p: self.top_p,
            beams: self.beams,
            max_chars: self.max_chars,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub n_samples: usize,
    #[command(flatten)]
    pub gen: GenArgs,
    /// Prompt with annotations drawn from the model's training pool.
    #[arg(long)]
    pub controlled: bool,
    /// Output samples file (JSON lines).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// n-gram model file.
    #[arg(long, group = "source")]
    pub model: Option<PathBuf>,
    /// External generator command line, split on whitespace; it speaks the
    /// line protocol on stdin/stdout.
    #[arg(long, group = "source")]
    pub adapter_cmd: Option<String>,
    /// Exchange directory for a file-based external generator.
    #[arg(long, group = "source")]
    pub adapter_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 600)]
    pub adapter_timeout_secs: u64,
}

impl SourceArgs {
    fn is_set(&self) -> bool {
        self.model.is_some() || self.adapter_cmd.is_some() || self.adapter_dir.is_some()
    }

    fn load(&self) -> Result<GeneratorSource, CliError> {
        let timeout = Duration::from_secs(self.adapter_timeout_secs);
        if let Some(path) = &self.model {
            return Ok(GeneratorSource::NGram(read_model(path)?));
        }
        if let Some(cmd) = &self.adapter_cmd {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if argv.is_empty() {
                return Err(CliError::Domain("--adapter-cmd is empty".to_string()));
            }
            return Ok(GeneratorSource::Adapter(
                GeneratorAdapter::subprocess(argv).with_timeout(timeout),
            ));
        }
        if let Some(dir) = &self.adapter_dir {
            return Ok(GeneratorSource::Adapter(
                GeneratorAdapter::file_exchange(dir).with_timeout(timeout),
            ));
        }
        Err(CliError::Domain(
            "one of --model, --adapter-cmd or --adapter-dir is required".to_string(),
        ))
    }
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Training corpus file for novelty (and annotation pool with --prompts).
    #[arg(long)]
    pub train: PathBuf,
    /// Minimum edit distance for novelty and distinctness.
    #[arg(long, default_value_t = crate::metrics::DEFAULT_K)]
    pub k: usize,
    /// Iteration cap for the maximum-clique search.
    #[arg(long, default_value_t = crate::metrics::DEFAULT_CLIQUE_CAP)]
    pub clique_cap: u64,
    #[arg(long, default_value_t = 0.01)]
    pub tol_empty: f64,
    #[arg(long, default_value_t = 5)]
    pub tol_len: usize,
    /// Prompt with training annotations and report accuracy and control score.
    #[arg(long)]
    pub prompts: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

impl MetricArgs {
    fn config(&self) -> EvalConfig {
        EvalConfig {
            distinct: DistinctnessConfig {
                k: self.k.max(1),
                clique_iteration_cap: self.clique_cap.max(1),
            },
            solver: self.solver.config(),
            tolerances: Tolerances {
                prop_empty: self.tol_empty,
                solution_len: self.tol_len,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Samples file (JSON lines of `{"text": ..., "prompt": ...}`).
    #[arg(long, group = "input")]
    pub samples: Option<PathBuf>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 100)]
    pub n_samples: usize,
    #[command(flatten)]
    pub gen: GenArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Row label in the report (default: output file stem).
    #[arg(long)]
    pub label: Option<String>,
    /// Per-sample evaluations as JSON lines.
    #[arg(long)]
    pub evaluations: Option<PathBuf>,
    /// Report file (JSON).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.7, 1.0, 1.3])]
    pub temperatures: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.9, 1.0])]
    pub top_ps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 5])]
    pub beams: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1, 2, 3, 4])]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub samples_per_config: usize,
    #[arg(long, default_value_t = 512)]
    pub max_chars: usize,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Sweep result file (JSON).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report files written by `evaluate`.
    pub reports: Vec<PathBuf>,
}

/// Primary output plus exit code for a command that completed.
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            exit_code: 0,
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(n) = cli.workers {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read_model(path: &Path) -> Result<NGramModel, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

pub fn cmd_solve(args: &SolveArgs) -> Result<Outcome, CliError> {
    let path = &args.input;
    let entries: Vec<Result<crate::Level, CliError>> = match args.format {
        InputFormat::Boxoban => corpus::load_boxoban(path)?
            .levels
            .into_iter()
            .map(Ok)
            .collect(),
        InputFormat::Auto if path.is_dir() => corpus::load_boxoban(path)?
            .levels
            .into_iter()
            .map(Ok)
            .collect(),
        _ => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            corpus::parse_entries(&text)
                .into_iter()
                .map(|r| r.map(|e| e.level).map_err(CliError::from))
                .collect()
        }
    };
    let config = args.solver.config();
    let cache = args.solver.open_cache()?;

    let mut out = String::new();
    writeln!(out, "level\tstatus\tsolution_len\tpushes\tnodes_expanded").unwrap();
    let (mut solved, mut total) = (0, 0);
    for (i, entry) in entries.iter().enumerate() {
        total += 1;
        match entry {
            Ok(level) => {
                let r = match &cache {
                    Some(c) => c.solve(level, &config),
                    None => crate::solver::solve(level, &config),
                };
                solved += r.is_solved() as usize;
                let opt = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
                writeln!(
                    out,
                    "{i}\t{}\t{}\t{}\t{}",
                    r.status,
                    opt(r.solution_len),
                    opt(r.pushes),
                    r.nodes_expanded
                )
                .unwrap();
            }
            Err(e) => writeln!(out, "{i}\tparse-error\t-\t-\t0\t{e}").unwrap(),
        }
    }
    writeln!(out, "solved {solved}/{total}").unwrap();
    Ok(Outcome {
        stdout: out,
        exit_code: if solved == total { 0 } else { 1 },
    })
}

pub fn cmd_prepare(args: &PrepareArgs) -> Result<Outcome, CliError> {
    let loaded: Corpus = match (&args.microban, &args.boxoban) {
        (Some(p), _) => corpus::load_microban(p)?,
        (None, Some(p)) => corpus::load_boxoban(p)?,
        (None, None) => {
            return Err(CliError::Domain(
                "--microban or --boxoban is required".into(),
            ))
        }
    };
    let levels_in = loaded.len();
    let sliced = corpus::slice(&loaded, args.slice, args.seed)?;
    let scheme = match args.augment {
        AugmentArg::None => AugmentScheme::None,
        AugmentArg::Flip => AugmentScheme::Flip,
        AugmentArg::FlipRotate => AugmentScheme::FlipRotate,
    };
    let augmented = corpus::augment(&sliced, scheme);

    let (entries, skipped) = if args.annotate {
        let kind = match args.annotation {
            AnnotationArg::Both => AnnotationKind::Both,
            AnnotationArg::PropEmpty => AnnotationKind::PropEmpty,
            AnnotationArg::SolutionLen => AnnotationKind::SolutionLen,
        };
        let cache = args.solver.open_cache()?;
        let outcome = corpus::annotate(&augmented, kind, &args.solver.config(), cache.as_ref());
        let texts: Vec<String> = outcome.entries.iter().map(AnnotatedLevel::render).collect();
        (texts, outcome.skipped.len())
    } else {
        (augmented.texts(), 0)
    };
    write_file(
        &args.out,
        &corpus::render_corpus_file(entries.iter().map(String::as_str)),
    )?;
    Ok(Outcome::ok(format!(
        "levels in: {levels_in}\nafter slice: {}\nafter augment: {}\nskipped unsolvable: {skipped}\nlevels out: {}\n",
        sliced.len(),
        augmented.len(),
        entries.len()
    )))
}

pub fn cmd_train(args: &TrainArgs) -> Result<Outcome, CliError> {
    let entries = corpus::load_annotated(&args.corpus)?;
    let texts: Vec<String> = entries.iter().map(AnnotatedLevel::render).collect();
    let model =
        NGramModel::train(&texts, args.order).map_err(|e| CliError::Domain(e.to_string()))?;
    let json = serde_json::to_string(&model).expect("model serializes");
    write_file(&args.out, &json)?;
    Ok(Outcome::ok(format!(
        "trained order-{} model on {} levels ({} contexts, annotated: {})\n",
        model.order,
        texts.len(),
        model.counts.len(),
        model.annotated
    )))
}

fn render_samples(samples: &[Sample]) -> String {
    let mut out = String::new();
    for s in samples {
        out.push_str(&serde_json::to_string(s).expect("sample serializes"));
        out.push('\n');
    }
    out
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Schema(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<Outcome, CliError> {
    let model = read_model(&args.model)?;
    let pool = args.controlled.then(|| model.annotation_pool.clone());
    let samples = produce_samples(
        &GeneratorSource::NGram(model),
        args.n_samples,
        &args.gen.params(),
        pool.as_deref(),
    )?;
    write_file(&args.out, &render_samples(&samples))?;
    Ok(Outcome::ok(format!("wrote {} samples\n", samples.len())))
}

struct Training {
    texts: Vec<String>,
    pool: Vec<Annotation>,
}

fn load_training(path: &Path) -> Result<Training, CliError> {
    let entries = corpus::load_annotated(path)?;
    Ok(Training {
        texts: entries.iter().map(|e| e.level.serialize()).collect(),
        pool: entries
            .iter()
            .map(|e| e.annotation)
            .filter(|a| !a.is_empty())
            .collect(),
    })
}

fn evaluations_jsonl(evals: &[SampleEvaluation]) -> String {
    let mut out = String::new();
    for e in evals {
        out.push_str(&serde_json::to_string(e).expect("evaluation serializes"));
        out.push('\n');
    }
    out
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<Outcome, CliError> {
    let training = load_training(&args.metrics.train)?;
    let pool = args.metrics.prompts.then_some(training.pool.as_slice());
    let samples = match &args.samples {
        Some(path) => {
            let mut samples = read_samples(path)?;
            if !args.metrics.prompts {
                samples.iter_mut().for_each(|s| s.prompt = None);
            }
            samples
        }
        None if args.source.is_set() => produce_samples(
            &args.source.load()?,
            args.n_samples,
            &args.gen.params(),
            pool,
        )?,
        None => {
            return Err(CliError::Domain(
                "--samples or a generator source is required".to_string(),
            ))
        }
    };

    let cache = args.metrics.solver.open_cache()?;
    let (evals, report) = evaluate(
        &samples,
        &training.texts,
        &args.metrics.config(),
        cache.as_ref(),
    );
    let label = args.label.clone().unwrap_or_else(|| {
        args.out
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "samples".to_string())
    });
    let labeled = LabeledReport { label, report };
    if let Some(out) = &args.out {
        write_file(out, &labeled.to_json())?;
    }
    if let Some(path) = &args.evaluations {
        write_file(path, &evaluations_jsonl(&evals))?;
    }
    report::render_table(std::slice::from_ref(&labeled)).map(Outcome::ok)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Outcome, CliError> {
    let training = load_training(&args.metrics.train)?;
    let source = args.source.load()?;
    let spec = SweepSpec {
        temperatures: args.temperatures.clone(),
        top_ps: args.top_ps.clone(),
        beam_counts: args.beams.clone(),
        seeds: args.seeds.clone(),
        samples_per_config: args.samples_per_config,
        max_chars: args.max_chars,
    };
    let cache = args.metrics.solver.open_cache()?;
    let config = args.metrics.config();
    let result: SweepResult = sweep::run_sweep(
        &spec,
        &SweepInputs {
            source: &source,
            training: &training.texts,
            annotation_pool: args.metrics.prompts.then_some(training.pool.as_slice()),
            config: &config,
            cache: cache.as_ref(),
        },
    )?;
    let mut json = serde_json::to_string_pretty(&result).expect("sweep serializes");
    json.push('\n');
    write_file(&args.out, &json)?;

    let rows: Vec<LabeledReport> = result
        .cells
        .iter()
        .filter_map(|c| {
            c.mean.clone().map(|report| LabeledReport {
                label: format!(
                    "t={} p={} beams={}",
                    c.config.temperature, c.config.top_p, c.config.beams
                ),
                report,
            })
        })
        .collect();
    let mut out = if rows.is_empty() {
        "no sweep cell completed\n".to_string()
    } else {
        report::render_table(&rows)?
    };
    match result.best_config {
        Some(b) => writeln!(
            out,
            "best: temperature={} top_p={} beams={} mean score={:.2}",
            b.temperature,
            b.top_p,
            b.beams,
            result.best_mean_score.unwrap_or(0.0)
        )
        .unwrap(),
        None => return Err(CliError::Domain(out)),
    }
    Ok(Outcome::ok(out))
}

pub fn cmd_report(args: &ReportArgs) -> Result<Outcome, CliError> {
    let reports = args
        .reports
        .iter()
        .map(|p| report::read_report(p))
        .collect::<Result<Vec<_>, _>>()?;
    report::render_table(&reports).map(Outcome::ok)
}
