//! Command-line pipeline for ReliK reliability scoring: ingest triple and
//! embedding files, train toy embeddings, score triples exactly or by
//! sampling, and run the correlation, approximation, decomposition, and
//! margin studies. Artifacts go to stdout (or `--out`) as canonical JSON
//! with an embedded run manifest, or as CSV rows.

mod emit;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use relik::embed::{self, EmbeddingStore, ScorerKind};
use relik::eval::{self, CorrelationTask, EvalReport, MetricValue};
use relik::graphops::{self, SubgraphSample, WeightedTriple};
use relik::kg::{KnowledgeGraph, Triple};
use relik::relik::{
    relik_candidate_batch, relik_set, RelikResult, SampleSize, SampledEstimator, ScoreMode,
};
use relik::trainer::{self, TrainConfig};
use relik::{seeds, Error as CoreError};

use manifest::Manifest;

#[derive(Parser)]
#[command(
    name = "relik",
    version,
    about = "ReliK reliability scoring for knowledge graph embeddings",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Global seed; every random stream derives from it
    #[arg(long, global = true, default_value_t = seeds::DEFAULT_SEED)]
    seed: u64,
    /// Worker thread cap (0 = automatic); outputs never depend on it
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Artifact format on stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the artifact to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `wall` measures real seconds (and gives up byte-reproducibility of
    /// timing fields); `off` reports zeros
    #[arg(long, global = true, value_enum, default_value_t = Timing::Off)]
    timing: Timing,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Timing {
    Off,
    Wall,
}

impl Timing {
    fn name(self) -> &'static str {
        match self {
            Timing::Off => "off",
            Timing::Wall => "wall",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FactScope {
    /// All given triple files define the fact set
    Union,
    /// Only the first (train) file defines it; later files extend the
    /// vocabulary and the validation surface
    Train,
}

#[derive(Args)]
struct KgArgs {
    /// Triple file(s); repeat for train/valid/test splits sharing one
    /// vocabulary
    #[arg(long = "kg", required = true)]
    kg: Vec<PathBuf>,
    /// Which facts define negative neighborhoods
    #[arg(long = "facts", value_enum, default_value_t = FactScope::Union)]
    facts: FactScope,
}

#[derive(Args)]
struct StoreArgs {
    /// Embedding file in the relik-embeddings v1 format
    #[arg(long)]
    embeddings: PathBuf,
    /// transe-l1 | transe-l2 | distmult | rotate | pairre | complex
    #[arg(long, value_parser = parse_scorer)]
    scorer: ScorerKind,
}

fn parse_scorer(s: &str) -> Result<ScorerKind, String> {
    ScorerKind::from_name(s).ok_or_else(|| {
        format!(
            "unknown scorer {s:?}; expected one of {}",
            ScorerKind::ALL.map(|k| k.name()).join(", ")
        )
    })
}

#[derive(Args)]
struct ModeArgs {
    /// exact | lb | apx
    #[arg(long, value_enum, default_value_t = Mode::Apx)]
    mode: Mode,
    /// Per-side sample fraction for the estimators
    #[arg(long, default_value_t = 0.10)]
    fraction: f64,
    /// Absolute per-side sample size, overriding --fraction
    #[arg(long)]
    sample_k: Option<u64>,
    /// Refuse exact mode when |entities| * |relations| exceeds this
    #[arg(long, default_value_t = 10_000_000)]
    exact_limit: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Lb,
    Apx,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Lb => "lb",
            Mode::Apx => "apx",
        }
    }
}

impl ModeArgs {
    fn sample_size(&self) -> SampleSize {
        match self.sample_k {
            Some(k) => SampleSize::Absolute(k),
            None => SampleSize::Fraction(self.fraction),
        }
    }

    fn score_mode(&self, kg: &KnowledgeGraph) -> Result<ScoreMode, CoreError> {
        match self.mode {
            Mode::Exact => {
                let space = kg.entity_count() as u64 * kg.relation_count() as u64;
                if space > self.exact_limit {
                    return Err(CoreError::Config(format!(
                        "exact mode scans {space} candidates per side; \
                         above --exact-limit {} (raise it to force the scan)",
                        self.exact_limit
                    )));
                }
                Ok(ScoreMode::Exact)
            }
            Mode::Lb => Ok(ScoreMode::Sampled {
                estimator: SampledEstimator::LowerBound,
                size: self.sample_size(),
            }),
            Mode::Apx => Ok(ScoreMode::Sampled {
                estimator: SampledEstimator::Scaled,
                size: self.sample_size(),
            }),
        }
    }

    fn describe(&self, m: &mut Manifest) {
        m.parameter("mode", self.mode.name());
        m.parameter("fraction", self.fraction);
        if let Some(k) = self.sample_k {
            m.parameter("sample_k", k);
        }
        m.parameter("exact_limit", self.exact_limit);
    }
}

#[derive(Subcommand)]
enum Command {
    /// Reliability of individual triples
    Score {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// One triple inline...
        #[arg(long, requires = "relation", requires = "tail")]
        head: Option<String>,
        #[arg(long, requires = "head")]
        relation: Option<String>,
        #[arg(long, requires = "head")]
        tail: Option<String>,
        /// ...or a triple file to score line by line
        #[arg(long, conflicts_with = "head")]
        triples: Option<PathBuf>,
    },
    /// Mean reliability of a triple set or a sampled subgraph
    ScoreSet {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Triple file defining the set
        #[arg(long, conflicts_with = "nodes")]
        triples: Option<PathBuf>,
        /// Sample a random-walk subgraph with this many nodes instead
        #[arg(long)]
        nodes: Option<usize>,
        /// Restart probability of the walk
        #[arg(long, default_value_t = 0.2)]
        restart: f64,
    },
    /// Estimator accuracy and time against the exact measure
    StudyApprox {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        /// Comma-separated sample fractions
        #[arg(long, default_value = "0.05,0.1,0.2,0.4,0.8")]
        fractions: String,
        /// Repetitions per fraction
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Triple file to study (defaults to every fact)
        #[arg(long)]
        triples: Option<PathBuf>,
    },
    /// Correlate per-subgraph reliability with a downstream metric
    Correlate {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        /// tail_mrr | relation_mrr | classification
        #[arg(long, value_parser = parse_task)]
        task: CorrelationTask,
        /// Number of sampled subgraphs
        #[arg(long, default_value_t = 100)]
        subgraphs: usize,
        /// Nodes per subgraph
        #[arg(long, default_value_t = 60)]
        size: usize,
        /// Restart probability of the walk
        #[arg(long, default_value_t = 0.2)]
        restart: f64,
        /// Sample fraction of the reliability estimator
        #[arg(long, default_value_t = 0.10)]
        fraction: f64,
    },
    /// Densest subgraph of the reliability-weighted fact graph
    Densest {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// relik | rr edge weighting
        #[arg(long, value_enum, default_value_t = Weighting::Relik)]
        weight: Weighting,
    },
    /// Full peeling decomposition of the weighted fact graph
    Peel {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, value_enum, default_value_t = Weighting::Relik)]
        weight: Weighting,
    },
    /// Mean reliability of positives against corrupted or given negatives
    Margin {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        /// Positive triples (must be facts)
        #[arg(long)]
        positives: PathBuf,
        /// Negative triples (must not be facts); generated by corruption
        /// when omitted
        #[arg(long)]
        negatives: Option<PathBuf>,
        /// Sample fraction of the scaled estimator
        #[arg(long, default_value_t = 0.10)]
        fraction: f64,
    },
    /// Train TransE or DistMult embeddings on the loaded facts
    Train {
        #[command(flatten)]
        kg: KgArgs,
        /// transe-l1 | transe-l2 | distmult
        #[arg(long, value_parser = parse_scorer)]
        scorer: ScorerKind,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        /// Corrupted negatives per positive and epoch
        #[arg(long, default_value_t = 1)]
        negatives: usize,
        /// Where to write the embedding file
        #[arg(long)]
        out_embeddings: PathBuf,
    },
    /// Score histogram of facts against sampled non-facts
    Histogram {
        #[command(flatten)]
        kg: KgArgs,
        #[command(flatten)]
        store: StoreArgs,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        /// Non-facts to sample (defaults to the fact count)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Lint triple and embedding files
    Validate {
        /// Triple file(s)
        #[arg(long = "kg")]
        kg: Vec<PathBuf>,
        /// Embedding file
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
}

fn parse_task(s: &str) -> Result<CorrelationTask, String> {
    CorrelationTask::from_name(s)
        .ok_or_else(|| format!("unknown task {s:?}; expected tail_mrr, relation_mrr or classification"))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Weighting {
    Relik,
    Rr,
}

impl Weighting {
    fn name(self) -> &'static str {
        match self {
            Weighting::Relik => "relik",
            Weighting::Rr => "rr",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments");
            eprintln!("relik: error: {}", line.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("relik: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// CLI failure: a single-line message plus the documented exit code
/// (1 usage/validation, 2 runtime).
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 1 }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 2 }
    }

    fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::Parse { .. }
            | CoreError::Domain(_)
            | CoreError::Config(_)
            | CoreError::Degenerate(_)
            | CoreError::Input(_) => 1,
            CoreError::Sampling(_)
            | CoreError::Divergence { .. }
            | CoreError::WalkTruncated { .. } => 2,
        };
        CliError { message: e.to_string(), code }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn read_text(path: &Path) -> CliResult<String> {
    let bytes = read_input(path)?;
    String::from_utf8(bytes)
        .map_err(|_| CliError::usage(format!("{} is not valid UTF-8", path.display())))
}

struct LoadedKg {
    union: KnowledgeGraph,
    scope: KnowledgeGraph,
    scope_name: &'static str,
    files: Vec<(PathBuf, Vec<u8>)>,
}

fn load_kg(args: &KgArgs) -> CliResult<LoadedKg> {
    let mut files = Vec::new();
    for path in &args.kg {
        files.push((path.clone(), read_input(path)?));
    }
    let texts: Vec<String> = files
        .iter()
        .map(|(path, bytes)| {
            String::from_utf8(bytes.clone())
                .map_err(|_| CliError::usage(format!("{} is not valid UTF-8", path.display())))
        })
        .collect::<CliResult<_>>()?;
    let docs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
    let (union, per_doc) = KnowledgeGraph::parse_documents(&docs)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.kg[0].display())))?;
    let (scope, scope_name) = match args.facts {
        FactScope::Union => (union.clone(), "union"),
        FactScope::Train => (
            KnowledgeGraph::from_parts(
                union.entity_labels().to_vec(),
                union.relation_labels().to_vec(),
                per_doc[0].iter().copied(),
            )
            .map_err(CliError::from)?,
            "train",
        ),
    };
    Ok(LoadedKg { union, scope, scope_name, files })
}

fn load_store(
    args: &StoreArgs,
    kg: &KnowledgeGraph,
) -> CliResult<(EmbeddingStore, Vec<u8>)> {
    let bytes = read_input(&args.embeddings)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::usage(format!("{} is not valid UTF-8", args.embeddings.display())))?;
    let store = EmbeddingStore::load(&text, kg)
        .map_err(|e| CliError::usage(format!("{}: {e}", args.embeddings.display())))?;
    Ok((store, bytes))
}

/// Parse a triple list against an existing vocabulary.
fn parse_triple_list(text: &str, kg: &KnowledgeGraph, path: &Path) -> CliResult<Vec<Triple>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(CliError::usage(format!(
                "{}: line {}: expected 3 tab-separated fields, found {}",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        let lookup_entity = |label: &str| {
            kg.entity_id(label).ok_or_else(|| {
                CliError::usage(format!(
                    "{}: line {}: unknown entity {label:?}",
                    path.display(),
                    idx + 1
                ))
            })
        };
        let head = lookup_entity(fields[0])?;
        let relation = kg.relation_id(fields[1]).ok_or_else(|| {
            CliError::usage(format!(
                "{}: line {}: unknown relation {:?}",
                path.display(),
                idx + 1,
                fields[1]
            ))
        })?;
        let tail = lookup_entity(fields[2])?;
        out.push(Triple::new(head, relation, tail));
    }
    Ok(out)
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(|e| CliError::runtime(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    let (report, detail, manifest) = dispatch(&cli.command, g)?;
    let artifact = match g.format {
        Format::Json => emit::to_json_string(&emit::report_to_json(manifest, &report, detail)),
        Format::Csv => emit::to_csv_string(&report),
    };
    match &g.out {
        Some(path) => std::fs::write(path, artifact)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(artifact.as_bytes())
                .map_err(|e| CliError::runtime(format!("stdout: {e}")))?;
        }
    }
    Ok(())
}

fn base_manifest(command: &str, g: &GlobalArgs) -> Manifest {
    Manifest::new(command, g.seed, g.format.name(), g.timing.name())
}

fn kg_manifest(m: &mut Manifest, loaded: &LoadedKg, scope: &FactScope) {
    for (i, (path, bytes)) in loaded.files.iter().enumerate() {
        m.input(if i == 0 { "kg" } else { "kg_extra" }, path, bytes);
    }
    m.parameter(
        "facts",
        match scope {
            FactScope::Union => "union",
            FactScope::Train => "train",
        },
    );
}

fn relik_result_row(kg: &KnowledgeGraph, x: Triple, r: &RelikResult, scope_fact: bool) -> Vec<MetricValue> {
    vec![
        MetricValue::Text(kg.entity_label(x.head).unwrap_or("?").into()),
        MetricValue::Text(kg.relation_label(x.relation).unwrap_or("?").into()),
        MetricValue::Text(kg.entity_label(x.tail).unwrap_or("?").into()),
        MetricValue::Int(scope_fact as i64),
        MetricValue::Text(r.estimator.name().into()),
        MetricValue::Float(r.value),
        MetricValue::Int(r.head_rank as i64),
        MetricValue::Int(r.tail_rank as i64),
        MetricValue::Int(r.head_neg_size as i64),
        MetricValue::Int(r.tail_neg_size as i64),
        MetricValue::Int(r.head_sample_size as i64),
        MetricValue::Int(r.tail_sample_size as i64),
    ]
}

const RESULT_COLUMNS: [&str; 12] = [
    "head",
    "relation",
    "tail",
    "scope_fact",
    "estimator",
    "value",
    "head_rank",
    "tail_rank",
    "head_neg",
    "tail_neg",
    "head_k",
    "tail_k",
];

fn subgraph_detail(kg: &KnowledgeGraph, sub: &SubgraphSample) -> Value {
    let mut map = Map::new();
    map.insert(
        "nodes".into(),
        Value::Array(
            sub.nodes
                .iter()
                .map(|&n| Value::from(kg.entity_label(n).unwrap_or("?")))
                .collect(),
        ),
    );
    map.insert(
        "triples".into(),
        Value::Array(sub.triples.iter().map(|t| triple_value(kg, *t)).collect()),
    );
    if let Some(origin) = &sub.origin {
        let mut o = Map::new();
        o.insert("start".into(), Value::from(kg.entity_label(origin.start).unwrap_or("?")));
        o.insert("seed".into(), Value::from(origin.seed));
        map.insert("origin".into(), Value::Object(o));
    }
    Value::Object(map)
}

fn triple_value(kg: &KnowledgeGraph, t: Triple) -> Value {
    Value::Array(vec![
        Value::from(kg.entity_label(t.head).unwrap_or("?")),
        Value::from(kg.relation_label(t.relation).unwrap_or("?")),
        Value::from(kg.entity_label(t.tail).unwrap_or("?")),
    ])
}

/// Per-fact edge weights for the decomposition commands.
fn fact_weights(
    kg: &KnowledgeGraph,
    store: &EmbeddingStore,
    scorer: ScorerKind,
    weighting: Weighting,
    mode: ScoreMode,
    seed: u64,
) -> CliResult<Vec<WeightedTriple>> {
    let facts = kg.facts();
    let weights = match weighting {
        Weighting::Relik => {
            let results = relik_candidate_batch(kg, store, scorer, facts, mode, seed)?;
            facts
                .iter()
                .zip(results)
                .map(|(&t, r)| WeightedTriple { triple: t, weight: r.value })
                .collect()
        }
        Weighting::Rr => {
            use rayon::prelude::*;
            let values: Vec<relik::Result<f64>> = facts
                .par_iter()
                .map(|&t| eval::reciprocal_rank_weight(kg, store, scorer, t, kg.fact_set()))
                .collect();
            let mut out = Vec::with_capacity(facts.len());
            for (t, v) in facts.iter().zip(values) {
                out.push(WeightedTriple { triple: *t, weight: v? });
            }
            out
        }
    };
    Ok(weights)
}

fn zero_timing(report: &mut EvalReport, seconds_column: &str) {
    if let Some(idx) = report.columns.iter().position(|c| c == seconds_column) {
        for row in &mut report.rows {
            row[idx] = MetricValue::Float(0.0);
        }
    }
    for (key, value) in &mut report.summary {
        if key.ends_with("seconds") {
            *value = MetricValue::Float(0.0);
        }
    }
}

fn dispatch(
    command: &Command,
    g: &GlobalArgs,
) -> CliResult<(EvalReport, Option<Value>, Value)> {
    match command {
        Command::Score { kg, store, mode, head, relation, tail, triples } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("score", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            mode.describe(&mut m);

            let list: Vec<Triple> = match (head, triples) {
                (Some(h), None) => {
                    let (r, t) = (relation.as_ref().unwrap(), tail.as_ref().unwrap());
                    m.parameter("triple", format!("{h}\t{r}\t{t}"));
                    let text = format!("{h}\t{r}\t{t}\n");
                    parse_triple_list(&text, &loaded.union, Path::new("<triple>"))?
                }
                (None, Some(path)) => {
                    let text = read_text(path)?;
                    m.input("triples", path, text.as_bytes());
                    parse_triple_list(&text, &loaded.union, path)?
                }
                _ => {
                    return Err(CliError::usage(
                        "give either --head/--relation/--tail or --triples",
                    ))
                }
            };
            for &x in &list {
                if !loaded.union.contains(x).map_err(CliError::from)? {
                    return Err(CliError::usage(format!(
                        "{} is not a fact of the loaded graph",
                        loaded.union.display(x)
                    )));
                }
            }
            let score_mode = mode.score_mode(&loaded.scope)?;
            let results =
                relik_candidate_batch(&loaded.scope, &embeddings, store.scorer, &list, score_mode, g.seed)?;
            let mut report = EvalReport::new("score", &RESULT_COLUMNS);
            report.config_entry("scorer", store.scorer);
            report.config_entry("mode", mode.mode.name());
            report.config_entry("facts", loaded.scope_name);
            for (&x, r) in list.iter().zip(&results) {
                let scope_fact = loaded.scope.contains(x).map_err(CliError::from)?;
                report.rows.push(relik_result_row(&loaded.union, x, r, scope_fact));
            }
            report.summary_entry("triples", list.len());
            Ok((report, None, m.finish()))
        }

        Command::ScoreSet { kg, store, mode, triples, nodes, restart } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("score-set", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            mode.describe(&mut m);

            let (list, detail) = match (triples, nodes) {
                (Some(path), None) => {
                    let text = read_text(path)?;
                    m.input("triples", path, text.as_bytes());
                    (parse_triple_list(&text, &loaded.union, path)?, None)
                }
                (None, Some(n)) => {
                    m.parameter("nodes", *n as u64);
                    m.parameter("restart", *restart);
                    let sub = graphops::rwr_subgraph_seeded(
                        &loaded.scope,
                        *n,
                        *restart,
                        seeds::derive(g.seed, &[seeds::stream::SUBGRAPH]),
                    )?;
                    let detail = subgraph_detail(&loaded.union, &sub);
                    (sub.triples, Some(detail))
                }
                _ => {
                    return Err(CliError::usage("give either --triples or --nodes"));
                }
            };
            if list.is_empty() {
                return Err(CliError::usage("the triple set is empty"));
            }
            for &x in &list {
                if !loaded.union.contains(x).map_err(CliError::from)? {
                    return Err(CliError::usage(format!(
                        "{} is not a fact of the loaded graph",
                        loaded.union.display(x)
                    )));
                }
            }
            let score_mode = mode.score_mode(&loaded.scope)?;
            let results =
                relik_candidate_batch(&loaded.scope, &embeddings, store.scorer, &list, score_mode, g.seed)?;
            let mut report = EvalReport::new("score_set", &RESULT_COLUMNS);
            report.config_entry("scorer", store.scorer);
            report.config_entry("mode", mode.mode.name());
            report.config_entry("facts", loaded.scope_name);
            for (&x, r) in list.iter().zip(&results) {
                let scope_fact = loaded.scope.contains(x).map_err(CliError::from)?;
                report.rows.push(relik_result_row(&loaded.union, x, r, scope_fact));
            }
            report.summary_entry("relik_set", relik_set(&results)?);
            report.summary_entry("triples", list.len());
            Ok((report, detail, m.finish()))
        }

        Command::StudyApprox { kg, store, fractions, reps, triples } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("study-approx", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            m.parameter("fractions", fractions.as_str());
            m.parameter("reps", *reps as u64);

            let fracs: Vec<f64> = fractions
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::usage(format!("bad fraction {s:?}")))
                })
                .collect::<CliResult<_>>()?;
            let list = match triples {
                Some(path) => {
                    let text = read_text(path)?;
                    m.input("triples", path, text.as_bytes());
                    parse_triple_list(&text, &loaded.union, path)?
                }
                None => loaded.scope.facts().to_vec(),
            };
            let mut report = eval::approximation_study(
                &loaded.scope,
                &embeddings,
                store.scorer,
                &list,
                &fracs,
                *reps,
                g.seed,
            )?;
            report.config_entry("facts", loaded.scope_name);
            if g.timing == Timing::Off {
                zero_timing(&mut report, "seconds");
            }
            Ok((report, None, m.finish()))
        }

        Command::Correlate { kg, store, task, subgraphs, size, restart, fraction } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("correlate", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            m.parameter("task", task.name());
            m.parameter("subgraphs", *subgraphs as u64);
            m.parameter("size", *size as u64);
            m.parameter("restart", *restart);
            m.parameter("fraction", *fraction);

            let report = eval::subgraph_correlation(
                &loaded.scope,
                &embeddings,
                store.scorer,
                *subgraphs,
                *size,
                *restart,
                *task,
                SampleSize::Fraction(*fraction),
                g.seed,
            )?;
            Ok((report, None, m.finish()))
        }

        Command::Densest { kg, store, mode, weight } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("densest", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            m.parameter("weight", weight.name());
            mode.describe(&mut m);

            let score_mode = mode.score_mode(&loaded.scope)?;
            let weights =
                fact_weights(&loaded.scope, &embeddings, store.scorer, *weight, score_mode, g.seed)?;
            let (dense_nodes, density) = graphops::densest_subgraph(&loaded.scope, &weights)?;
            let sub = graphops::induced_closure(&loaded.scope, &dense_nodes);
            let mut report = EvalReport::new("densest", &["entity"]);
            report.config_entry("scorer", store.scorer);
            report.config_entry("weight", weight.name());
            report.config_entry("facts", loaded.scope_name);
            for &n in &dense_nodes {
                report
                    .rows
                    .push(vec![MetricValue::Text(loaded.union.entity_label(n).unwrap_or("?").into())]);
            }
            report.summary_entry("density", density);
            report.summary_entry("node_count", dense_nodes.len());
            report.summary_entry("edge_count", sub.triples.len());
            let detail = subgraph_detail(&loaded.union, &sub);
            Ok((report, Some(detail), m.finish()))
        }

        Command::Peel { kg, store, mode, weight } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("peel", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            m.parameter("weight", weight.name());
            mode.describe(&mut m);

            let score_mode = mode.score_mode(&loaded.scope)?;
            let weights =
                fact_weights(&loaded.scope, &embeddings, store.scorer, *weight, score_mode, g.seed)?;
            let layers = graphops::peel_decomposition(&loaded.scope, &weights)?;
            let cumulative = graphops::cumulative_sizes(&layers);
            let mut report = EvalReport::new(
                "peel",
                &["layer", "nodes", "edges", "density", "cumulative_nodes", "cumulative_edges"],
            );
            report.config_entry("scorer", store.scorer);
            report.config_entry("weight", weight.name());
            report.config_entry("facts", loaded.scope_name);
            let mut layer_details = Vec::new();
            for (i, (layer, cum)) in layers.iter().zip(&cumulative).enumerate() {
                report.rows.push(vec![
                    i.into(),
                    layer.sample.nodes.len().into(),
                    layer.edges.len().into(),
                    layer.density.into(),
                    cum.0.into(),
                    cum.1.into(),
                ]);
                let mut detail = Map::new();
                detail.insert("layer".into(), Value::from(i as u64));
                detail.insert("density".into(), Value::from(layer.density));
                detail.insert("subgraph".into(), subgraph_detail(&loaded.union, &layer.sample));
                layer_details.push(Value::Object(detail));
            }
            report.summary_entry("layers", layers.len());
            report.summary_entry("edges", weights.len());
            Ok((report, Some(Value::Array(layer_details)), m.finish()))
        }

        Command::Margin { kg, store, positives, negatives, fraction } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("margin", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            m.parameter("fraction", *fraction);

            let pos_text = read_text(positives)?;
            m.input("positives", positives, pos_text.as_bytes());
            let pos = parse_triple_list(&pos_text, &loaded.union, positives)?;
            let neg = match negatives {
                Some(path) => {
                    let text = read_text(path)?;
                    m.input("negatives", path, text.as_bytes());
                    m.parameter("negatives_source", "file");
                    parse_triple_list(&text, &loaded.union, path)?
                }
                None => {
                    m.parameter("negatives_source", "corrupted");
                    let mut rng = seeds::rng(seeds::derive(g.seed, &[seeds::stream::CORRUPT]));
                    eval::corrupted_negatives(&loaded.scope, &pos, &mut rng)?
                }
            };
            let report = eval::margin_report(
                &loaded.scope,
                &embeddings,
                store.scorer,
                &pos,
                &neg,
                SampleSize::Fraction(*fraction),
                g.seed,
            )?;
            Ok((report, None, m.finish()))
        }

        Command::Train { kg, scorer, dim, epochs, lr, margin, negatives, out_embeddings } => {
            let loaded = load_kg(kg)?;
            let mut m = base_manifest("train", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.parameter("scorer", scorer.name());
            m.parameter("dim", *dim as u64);
            m.parameter("epochs", *epochs as u64);
            m.parameter("lr", *lr);
            m.parameter("margin", *margin);
            m.parameter("negatives", *negatives as u64);
            m.parameter("out_embeddings", out_embeddings.display().to_string());

            let cfg = TrainConfig {
                dim: *dim,
                epochs: *epochs,
                learning_rate: *lr,
                margin: *margin,
                negatives_per_positive: *negatives,
                seed: g.seed,
            };
            let store = trainer::train(&loaded.scope, *scorer, &cfg)?;
            let text = store.save(&loaded.scope);
            std::fs::write(out_embeddings, &text).map_err(|e| {
                CliError::runtime(format!("cannot write {}: {e}", out_embeddings.display()))
            })?;
            let mut report = EvalReport::new("train", &[]);
            report.config_entry("scorer", scorer);
            report.config_entry("facts", loaded.scope_name);
            report.summary_entry("entities", loaded.scope.entity_count());
            report.summary_entry("relations", loaded.scope.relation_count());
            report.summary_entry("facts", loaded.scope.fact_count());
            report.summary_entry("dim", *dim);
            report.summary_entry("epochs", *epochs);
            use sha2::Digest;
            let digest = sha2::Sha256::digest(text.as_bytes());
            report.summary_entry("embeddings_sha256", MetricValue::Text(format!("{digest:x}")));
            Ok((report, None, m.finish()))
        }

        Command::Histogram { kg, store, bins, samples } => {
            let loaded = load_kg(kg)?;
            let (embeddings, emb_bytes) = load_store(store, &loaded.union)?;
            let mut m = base_manifest("histogram", g);
            kg_manifest(&mut m, &loaded, &kg.facts);
            m.input("embeddings", &store.embeddings, &emb_bytes);
            m.parameter("scorer", store.scorer.name());
            m.parameter("bins", *bins as u64);
            let n_samples = samples.unwrap_or(loaded.scope.fact_count());
            m.parameter("samples", n_samples as u64);
            let report = eval::score_histogram(
                &loaded.scope,
                &embeddings,
                store.scorer,
                *bins,
                n_samples,
                g.seed,
            )?;
            Ok((report, None, m.finish()))
        }

        Command::Validate { kg, embeddings } => {
            if kg.is_empty() && embeddings.is_none() {
                return Err(CliError::usage("nothing to validate; give --kg or --embeddings"));
            }
            let mut m = base_manifest("validate", g);
            let mut report = EvalReport::new("validate", &["role", "path", "status"]);
            let mut union: Option<KnowledgeGraph> = None;
            if !kg.is_empty() {
                let args = KgArgs { kg: kg.clone(), facts: FactScope::Union };
                let loaded = load_kg(&args)?;
                for (path, bytes) in &loaded.files {
                    m.input("kg", path, bytes);
                }
                report.rows.push(vec![
                    "kg".into(),
                    MetricValue::Text(
                        kg.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" "),
                    ),
                    MetricValue::Text(format!(
                        "ok: entities={} relations={} facts={}",
                        loaded.union.entity_count(),
                        loaded.union.relation_count(),
                        loaded.union.fact_count()
                    )),
                ]);
                union = Some(loaded.union);
            }
            if let Some(path) = embeddings {
                let text = read_text(path)?;
                m.input("embeddings", path, text.as_bytes());
                let summary = embed::validate_text(&text)
                    .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                if let Some(kg) = &union {
                    EmbeddingStore::load(&text, kg)
                        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
                }
                report.rows.push(vec![
                    "embeddings".into(),
                    MetricValue::Text(path.display().to_string()),
                    MetricValue::Text(format!(
                        "ok: dim={} field={} entities={} relations={} tails={}",
                        summary.dim,
                        summary.field,
                        summary.entity_rows,
                        summary.relation_rows,
                        summary.relation_tail_rows
                    )),
                ]);
            }
            report.summary_entry("checked", report.rows.len());
            Ok((report, None, m.finish()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scorer_names_round_trip() {
        for kind in ScorerKind::ALL {
            assert_eq!(parse_scorer(kind.name()).unwrap(), kind);
        }
        assert!(parse_scorer("nope").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
