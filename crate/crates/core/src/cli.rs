//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when input fails validation or a stage
//! reports an error, 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::candidates::{self, CandidateOptions, CandidatePair, CandidateSet};
use crate::closure::{close_links, ConflictKind};
use crate::corpus::{self, Corpus, Severity, StatsTable};
use crate::emitter::{self, EmitReport, Instance};
use crate::parallel::{self, Exec};
use crate::sampling::{self, SamplingReport, Strategy};
use crate::scorer::{self, ScoreOptions};

pub const THREADS_ENV: &str = "TEMPREL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "temprel", version, about = "Direct temporal relation dataset builder and scorer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Flags shared by every subcommand. Any of them may also come from
/// `--config`; flags given on the command line win.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// JSON file with default values for the flags below.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Corpus directory of {id}.txt / {id}.ann pairs, optionally split into train/ and test/.
    #[arg(long, global = true, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Training-set sampling: none, down or up.
    #[arg(long, global = true, value_name = "S")]
    pub strategy: Option<Strategy>,
    /// JSON augmenter chain used by `--strategy up`.
    #[arg(long, global = true, value_name = "FILE")]
    pub chain: Option<PathBuf>,
    /// Treat validation warnings and closure conflicts as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Label pairs with a contradictory closed relation NOREL instead of dropping them.
    #[arg(long, global = true)]
    pub conflicts_as_norel: bool,
    /// Score gold pairs missing from the predictions as NOREL.
    #[arg(long, global = true)]
    pub missing_as_norel: bool,
    /// Omit generation timestamps from output files.
    #[arg(long, global = true)]
    pub no_header: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a corpus for annotation errors and warnings.
    Validate,
    /// Write the closed link set of every document and a conflict report.
    Closure,
    /// Write intra-sentential candidate pairs as TSV.
    Candidates,
    /// Write tagged instances as JSONL.
    Emit,
    /// Balance an instance file.
    Sample {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Defaults to {out}/sampled.jsonl.
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Score predictions against gold candidate pairs.
    Score {
        #[arg(long, value_name = "FILE")]
        gold: PathBuf,
        #[arg(long, value_name = "FILE")]
        pred: PathBuf,
    },
    /// Print relation-type counts per split.
    Stats,
    /// Verify the tag invariant on every line of an instance file.
    ValidateInstances {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
    },
    /// Run every stage: train.jsonl, test.jsonl, candidates.tsv and report.json.
    Pipeline,
}

/// Flags merged with the optional config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub strategy: Option<Strategy>,
    pub chain: Option<PathBuf>,
    pub strict: bool,
    pub conflicts_as_norel: bool,
    pub missing_as_norel: bool,
    pub no_header: bool,
}

impl PipelineConfig {
    pub fn resolve(flags: &Flags) -> Result<PipelineConfig, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?
            }
            None => PipelineConfig::default(),
        };
        if flags.corpus.is_some() {
            cfg.corpus = flags.corpus.clone();
        }
        if flags.out.is_some() {
            cfg.out = flags.out.clone();
        }
        if flags.seed.is_some() {
            cfg.seed = flags.seed;
        }
        if flags.strategy.is_some() {
            cfg.strategy = flags.strategy;
        }
        if flags.chain.is_some() {
            cfg.chain = flags.chain.clone();
        }
        cfg.strict |= flags.strict;
        cfg.conflicts_as_norel |= flags.conflicts_as_norel;
        cfg.missing_as_norel |= flags.missing_as_norel;
        cfg.no_header |= flags.no_header;
        Ok(cfg)
    }

    fn corpus(&self) -> Result<&Path, CliError> {
        let p = self.corpus.as_deref().ok_or_else(|| CliError::Usage("--corpus is required".into()))?;
        if !p.is_dir() {
            return Err(CliError::Usage(format!("corpus directory {} does not exist", p.display())));
        }
        Ok(p)
    }

    fn out(&self) -> Result<&Path, CliError> {
        let out = self.out.as_deref().ok_or_else(|| CliError::Usage("--out is required".into()))?;
        fs::create_dir_all(out).map_err(|e| CliError::Failure(format!("{}: {e}", out.display())))?;
        Ok(out)
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))
    }

    fn candidate_options(&self) -> CandidateOptions {
        CandidateOptions { conflicted_as_norel: self.conflicts_as_norel }
    }

    fn header(&self) -> Option<String> {
        if self.no_header {
            return None;
        }
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Some(format!("temprel {} generated at unix time {secs}", env!("CARGO_PKG_VERSION")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

fn fail(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn write(path: &Path, content: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    s.push('\n');
    s
}

/// Output directory for a split: `out` itself for an unsplit corpus.
fn split_dir(out: &Path, split: &str) -> Result<PathBuf, CliError> {
    let dir = if split == "all" { out.to_path_buf() } else { out.join(split) };
    fs::create_dir_all(&dir).map_err(|e| fail(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        parallel::configure_threads(n);
    }
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = PipelineConfig::resolve(&cli.flags)?;
    match &cli.command {
        Command::Validate => cmd_validate(&cfg),
        Command::Closure => cmd_closure(&cfg),
        Command::Candidates => cmd_candidates(&cfg),
        Command::Emit => cmd_emit(&cfg),
        Command::Sample { input, output } => cmd_sample(&cfg, input, output.as_deref()),
        Command::Score { gold, pred } => cmd_score(&cfg, gold, pred),
        Command::Stats => cmd_stats(&cfg),
        Command::ValidateInstances { input } => cmd_validate_instances(input),
        Command::Pipeline => cmd_pipeline(&cfg),
    }
}

fn load_splits(cfg: &PipelineConfig) -> Result<Vec<(String, Corpus)>, CliError> {
    corpus::parse_split_corpus(cfg.corpus()?).map_err(fail)
}

/// Prints diagnostics and fails on errors, or on warnings under `--strict`.
fn check_diagnostics(cfg: &PipelineConfig, splits: &[(String, Corpus)]) -> Result<(usize, usize), CliError> {
    let mut errors = 0;
    let mut warnings = 0;
    for (_, docs) in splits {
        for d in corpus::validate(docs) {
            eprintln!("{d}");
            match d.severity {
                Severity::Error => errors += 1,
                Severity::Warning => warnings += 1,
            }
        }
    }
    if errors > 0 || (cfg.strict && warnings > 0) {
        return Err(fail(format!("validation failed: {errors} error(s), {warnings} warning(s)")));
    }
    Ok((errors, warnings))
}

fn cmd_validate(cfg: &PipelineConfig) -> Result<(), CliError> {
    let splits = load_splits(cfg)?;
    let docs: usize = splits.iter().map(|(_, c)| c.len()).sum();
    let (_, warnings) = check_diagnostics(cfg, &splits)?;
    println!("{docs} document(s) valid, {warnings} warning(s)");
    Ok(())
}

fn cmd_closure(cfg: &PipelineConfig) -> Result<(), CliError> {
    let splits = load_splits(cfg)?;
    let out = cfg.out()?;
    let mut total_conflicts = 0;
    for (name, docs) in &splits {
        let dir = split_dir(out, name)?;
        let closures = parallel::map(Exec::default(), docs, |_, d| close_links(&d.links));
        let mut report = String::new();
        if let Some(h) = cfg.header() {
            report.push_str(&format!("# {h}\n"));
        }
        for (doc, closure) in docs.iter().zip(&closures) {
            let mut ann = String::new();
            if let Some(h) = cfg.header() {
                ann.push_str(&format!("# {h}\n"));
            }
            let mut n = 0;
            for (a, b) in closure.links.before.iter().filter(|(a, b)| a != b) {
                n += 1;
                ann.push_str(&format!("TLINK\tc{n}\t{a}\t{b}\tBEFORE\n"));
            }
            for (a, b) in &closure.links.overlap {
                n += 1;
                ann.push_str(&format!("TLINK\tc{n}\t{a}\t{b}\tOVERLAP\n"));
            }
            write(&dir.join(format!("{}.closure.ann", doc.doc_id)), ann)?;
            for c in &closure.conflicts {
                let kinds: Vec<&str> = c
                    .kinds
                    .iter()
                    .map(|k| match k {
                        ConflictKind::CyclicBefore => "CyclicBefore",
                        ConflictKind::BeforeVsOverlap => "BeforeVsOverlap",
                        ConflictKind::SelfBefore => "SelfBefore",
                    })
                    .collect();
                report.push_str(&format!("{}\t{}\t{}\t{}\n", doc.doc_id, c.pair.0, c.pair.1, kinds.join(",")));
            }
            total_conflicts += closure.conflicts.len();
        }
        write(&dir.join("conflicts.tsv"), report)?;
    }
    eprintln!("{total_conflicts} conflicted pair(s)");
    if cfg.strict && total_conflicts > 0 {
        return Err(fail(format!("{total_conflicts} closure conflict(s) under --strict")));
    }
    Ok(())
}

struct SplitData {
    name: String,
    docs: Corpus,
    candidates: CandidateSet,
    instances: Vec<Instance>,
    emit: EmitReport,
}

fn build_split(name: String, docs: Corpus, opts: CandidateOptions, exec: Exec) -> SplitData {
    let per_doc = candidates::corpus_candidates(&docs, opts, exec);
    let built = parallel::map(exec, &docs, |i, d| emitter::build_instances(d, &per_doc[i].pairs));
    let mut instances = Vec::new();
    let mut emit = EmitReport::default();
    for (inst, rep) in built {
        instances.extend(inst);
        emit.emitted += rep.emitted;
        emit.skipped += rep.skipped;
    }
    SplitData { name, docs, candidates: CandidateSet::merge(per_doc), instances, emit }
}

fn report_exclusions(cfg: &PipelineConfig, split: &SplitData) -> Result<(), CliError> {
    let c = &split.candidates;
    if c.excluded_conflicted + c.excluded_overlapping + c.cross_sentence_entities + split.emit.skipped > 0 {
        eprintln!(
            "{}: {} pair(s) excluded as conflicted, {} as overlapping, {} cross-sentence entit(ies), {} untaggable pair(s)",
            split.name, c.excluded_conflicted, c.excluded_overlapping, c.cross_sentence_entities, split.emit.skipped
        );
    }
    if cfg.strict && c.excluded_conflicted > 0 {
        return Err(fail(format!("{}: closure conflicts under --strict", split.name)));
    }
    Ok(())
}

fn build_all(cfg: &PipelineConfig) -> Result<Vec<SplitData>, CliError> {
    let splits = load_splits(cfg)?;
    check_diagnostics(cfg, &splits)?;
    let data: Vec<SplitData> = splits
        .into_iter()
        .map(|(name, docs)| build_split(name, docs, cfg.candidate_options(), Exec::default()))
        .collect();
    for s in &data {
        report_exclusions(cfg, s)?;
    }
    Ok(data)
}

fn cmd_candidates(cfg: &PipelineConfig) -> Result<(), CliError> {
    let data = build_all(cfg)?;
    let out = cfg.out()?;
    for s in &data {
        let path = split_dir(out, &s.name)?.join("candidates.tsv");
        write(&path, candidates::to_tsv(&s.candidates.pairs, cfg.header().as_deref()))?;
        eprintln!("{}: {} candidate pair(s) from {} document(s)", s.name, s.candidates.pairs.len(), s.docs.len());
    }
    Ok(())
}

fn cmd_emit(cfg: &PipelineConfig) -> Result<(), CliError> {
    let data = build_all(cfg)?;
    let out = cfg.out()?;
    for s in &data {
        let path = split_dir(out, &s.name)?.join("instances.jsonl");
        write(&path, emitter::to_jsonl(&s.instances))?;
        eprintln!("{}: {} instance(s)", s.name, s.instances.len());
    }
    Ok(())
}

fn sampling_config(cfg: &PipelineConfig) -> Result<(sampling::SamplingConfig, PathBuf), CliError> {
    let seed = cfg.seed()?;
    let strategy = cfg.strategy.unwrap_or_default();
    let (chain, base) = match (&cfg.chain, strategy) {
        (Some(path), _) => (
            sampling::read_chain_specs(path).map_err(|e| CliError::Usage(e.to_string()))?,
            path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        ),
        (None, Strategy::UpSamplePositives) => {
            return Err(CliError::Usage("--strategy up requires --chain".into()));
        }
        (None, _) => (Vec::new(), PathBuf::from(".")),
    };
    Ok((sampling::SamplingConfig { strategy, seed, augmenter_chain: chain }, base))
}

fn cmd_sample(cfg: &PipelineConfig, input: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let (config, base) = sampling_config(cfg)?;
    let instances = emitter::read_instances(input).map_err(|e| fail(format!("{}: {e}", input.display())))?;
    let (sampled, report) = sampling::apply(&instances, &config, &base, Exec::default()).map_err(fail)?;
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => cfg.out()?.join("sampled.jsonl"),
    };
    write(&path, emitter::to_jsonl(&sampled))?;
    eprintln!("{}", to_json(&report).trim_end());
    Ok(())
}

fn cmd_score(cfg: &PipelineConfig, gold: &Path, pred: &Path) -> Result<(), CliError> {
    let gold_pairs: Vec<CandidatePair> =
        candidates::read_tsv(gold).map_err(|e| fail(format!("{}: {e}", gold.display())))?;
    let preds = emitter::read_predictions(pred).map_err(|e| fail(format!("{}: {e}", pred.display())))?;
    let report =
        scorer::score(&gold_pairs, &preds, ScoreOptions { missing_as_norel: cfg.missing_as_norel }).map_err(fail)?;
    print!("{report}");
    let json = to_json(&report);
    match &cfg.out {
        Some(_) => write(&cfg.out()?.join("score.json"), json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn cmd_stats(cfg: &PipelineConfig) -> Result<(), CliError> {
    let data = build_all(cfg)?;
    let table = stats_table(&data);
    print!("{table}");
    if cfg.out.is_some() {
        write(&cfg.out()?.join("stats.json"), to_json(&table))?;
    }
    Ok(())
}

fn stats_table(data: &[SplitData]) -> StatsTable {
    let splits: Vec<(String, Vec<CandidatePair>)> =
        data.iter().map(|s| (s.name.clone(), s.candidates.pairs.clone())).collect();
    corpus::stats(&splits)
}

fn cmd_validate_instances(input: &Path) -> Result<(), CliError> {
    let content = fs::read_to_string(input).map_err(|e| fail(format!("{}: {e}", input.display())))?;
    let problems = emitter::validate_instances(&content);
    for p in &problems {
        eprintln!("{}: {p}", input.display());
    }
    if problems.is_empty() {
        let n = content.lines().filter(|l| !l.trim().is_empty()).count();
        println!("{n} instance(s) valid");
        Ok(())
    } else {
        Err(fail(format!("{} invalid line(s)", problems.len())))
    }
}

#[derive(Serialize)]
struct SplitSummary<'a> {
    split: &'a str,
    documents: usize,
    candidates: usize,
    excluded_conflicted: usize,
    excluded_overlapping: usize,
    cross_sentence_entities: usize,
    instances: usize,
    untaggable: usize,
}

#[derive(Serialize)]
struct PipelineReport<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated: Option<String>,
    seed: u64,
    splits: Vec<SplitSummary<'a>>,
    stats: StatsTable,
    sampling: SamplingReport,
}

fn cmd_pipeline(cfg: &PipelineConfig) -> Result<(), CliError> {
    let (sampling_cfg, base) = sampling_config(cfg)?;
    let data = build_all(cfg)?;
    let names: Vec<&str> = data.iter().map(|s| s.name.as_str()).collect();
    if names != ["train", "test"] {
        return Err(CliError::Usage("pipeline needs a corpus with train/ and test/ subdirectories".into()));
    }
    let out = cfg.out()?;
    let (train, test) = (&data[0], &data[1]);
    let (sampled, sampling_report) =
        sampling::apply(&train.instances, &sampling_cfg, &base, Exec::default()).map_err(fail)?;

    write(&out.join("train.jsonl"), emitter::to_jsonl(&sampled))?;
    write(&out.join("test.jsonl"), emitter::to_jsonl(&test.instances))?;
    // Gold for scoring: the test pairs that were actually emitted.
    let emitted: std::collections::HashSet<(&str, &str, &str)> =
        test.instances.iter().map(|i| (i.doc_id.as_str(), i.event_id.as_str(), i.timex_id.as_str())).collect();
    let gold: Vec<CandidatePair> =
        test.candidates.pairs.iter().filter(|p| emitted.contains(&p.key())).cloned().collect();
    write(&out.join("candidates.tsv"), candidates::to_tsv(&gold, cfg.header().as_deref()))?;

    let report = PipelineReport {
        generated: cfg.header(),
        seed: sampling_cfg.seed,
        splits: data
            .iter()
            .map(|s| SplitSummary {
                split: &s.name,
                documents: s.docs.len(),
                candidates: s.candidates.pairs.len(),
                excluded_conflicted: s.candidates.excluded_conflicted,
                excluded_overlapping: s.candidates.excluded_overlapping,
                cross_sentence_entities: s.candidates.cross_sentence_entities,
                instances: s.instances.len(),
                untaggable: s.emit.skipped,
            })
            .collect(),
        stats: stats_table(&data),
        sampling: sampling_report,
    };
    write(&out.join("report.json"), to_json(&report))?;
    print!("{}", report.stats);
    Ok(())
}
