//! Command-line front end. Every subcommand reads the file formats of the
//! library modules and calls one library operation.
//!
//! Exit codes: 0 success, 1 bad arguments or config, 2 malformed or
//! unreadable input, 3 error reported by the operation itself.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::bpe::{
    diff_merge_tables, merge_graph, tokenization_tree, train_bpe, MergeTable, Mode, Weighting,
};
use crate::comparative::{
    boundary_eval, build_distance_matrix, family_separation, find_homographs, homograph_report,
    mantel_test, phylo_distance_matrix, read_gold_tsv, vocabulary, write_boundary_tsv,
    write_separation_tsv, DistanceMatrix, Level, PhyloClassification,
};
use crate::corpus::{
    contamination_report, filter_paragraphs, read_paragraphs, write_paragraphs, Script,
};
use crate::crosslingual::{
    build_rank_matrix, identify_language_fertility, identify_language_rank, score_distribution,
    write_scores, RankMatrix, DEFAULT_MISSING_PENALTY,
};
use crate::error::Error;
use crate::glottoset::{
    build_glottoset, lexical_stats, merge_glottosets, write_stats_tsv, Glottoset, MergedGlottoset,
};

pub const DEFAULT_MIN_WORDS: usize = 10;
pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_BASELINE_TRIALS: usize = 100;
pub const DEFAULT_MIN_TF: u64 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn from_lib(path: Option<&Path>, e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Malformed { .. } | Error::MalformedGold { .. } => 2,
            _ => 3,
        };
        let message = match path {
            Some(p) => format!("{}: {e}", p.display()),
            None => e.to_string(),
        };
        CliError { code, message }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn at(self, path: &Path) -> CliResult<T>;
    fn op(self) -> CliResult<T>;
}

impl<T> Context<T> for crate::Result<T> {
    fn at(self, path: &Path) -> CliResult<T> {
        self.map_err(|e| CliError::from_lib(Some(path), e))
    }

    fn op(self) -> CliResult<T> {
        self.map_err(|e| CliError::from_lib(None, e))
    }
}

/// Settings that can come from a `key=value` file. Flags win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub corpus_dir: Option<PathBuf>,
    pub glottoset_dir: Option<PathBuf>,
    pub tables_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub script: Option<Script>,
    pub min_words: Option<usize>,
    pub mode: Option<Mode>,
    pub weighting: Option<Weighting>,
    pub min_tf: Option<u64>,
    pub permutations: Option<usize>,
    pub mantel_seed: Option<u64>,
    pub baseline_trials: Option<usize>,
    pub baseline_seed: Option<u64>,
    pub missing_penalty: Option<f64>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "corpus_dir",
    "glottoset_dir",
    "tables_dir",
    "output_dir",
    "script",
    "min_words",
    "mode",
    "vocab_size",
    "weighting",
    "min_tf",
    "permutations",
    "mantel_seed",
    "baseline_trials",
    "baseline_seed",
    "missing_penalty",
];

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> CliResult<T> {
    value.parse().map_err(|_| {
        CliError::usage(format!(
            "config line {line}: invalid value {value:?} for {key}"
        ))
    })
}

impl PipelineConfig {
    /// Parses `key=value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut c = PipelineConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| {
                CliError::usage(format!("config line {line}: expected key=value"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "corpus_dir" => c.corpus_dir = Some(value.into()),
                "glottoset_dir" => c.glottoset_dir = Some(value.into()),
                "tables_dir" => c.tables_dir = Some(value.into()),
                "output_dir" => c.output_dir = Some(value.into()),
                "script" => c.script = Some(parse_value(key, value, line)?),
                "min_words" => c.min_words = Some(parse_value(key, value, line)?),
                "mode" => c.mode = Some(parse_value(key, value, line)?),
                "vocab_size" => c.mode = Some(Mode::FixedVocab(parse_value(key, value, line)?)),
                "weighting" => c.weighting = Some(parse_value(key, value, line)?),
                "min_tf" => c.min_tf = Some(parse_value(key, value, line)?),
                "permutations" => c.permutations = Some(parse_value(key, value, line)?),
                "mantel_seed" => c.mantel_seed = Some(parse_value(key, value, line)?),
                "baseline_trials" => c.baseline_trials = Some(parse_value(key, value, line)?),
                "baseline_seed" => c.baseline_seed = Some(parse_value(key, value, line)?),
                "missing_penalty" => {
                    let v: f64 = parse_value(key, value, line)?;
                    if v.is_nan() || v <= 0.0 || v.is_infinite() {
                        return Err(CliError::usage(format!(
                            "config line {line}: missing_penalty must be positive"
                        )));
                    }
                    c.missing_penalty = Some(v);
                }
                _ => {
                    return Err(CliError::usage(format!(
                        "config line {line}: unknown key {key:?}"
                    )))
                }
            }
        }
        if c.baseline_trials == Some(0) {
            return Err(CliError::usage("baseline_trials must be at least 1"));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("{}: cannot read config: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn resolve(dir: &Option<PathBuf>, path: &Path) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() => d.join(path),
        _ => path.to_path_buf(),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "glottobpe",
    version,
    about = "Word-level BPE tokenizers and subword statistics for comparing languages"
)]
pub struct Cli {
    /// key=value settings file; command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Human-readable output instead of TSV
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Keep paragraphs in the target script with enough words; report token scripts
    Ingest(IngestArgs),
    /// Count term and document frequencies of a filtered corpus
    Glottoset(GlottosetArgs),
    /// Sum several glottosets into one lexicon
    MergeGlottosets(MergeArgs),
    /// Train a BPE merge table on a glottoset
    Train(TrainArgs),
    /// Tokenize words with a merge table
    Encode(EncodeArgs),
    /// Show how a word is assembled from merges
    Tree(TreeArgs),
    /// Export the merge graph as DOT or JSON
    Graph(GraphArgs),
    /// Compare the merge lists of two tables
    Diff(DiffArgs),
    /// Rank every universal token in each language's table
    RankMatrix(RankMatrixArgs),
    /// Score candidate languages for a text
    Identify(IdentifyArgs),
    /// Vocabulary or phylogenetic distance matrix
    Distances(DistancesArgs),
    /// Mantel permutation test between two distance matrices
    Mantel(MantelArgs),
    /// Within- versus between-family distances
    Separation(SeparationArgs),
    /// Segmentation divergence of words shared between languages
    Homographs(HomographsArgs),
    /// Morpheme-boundary precision and recall against a gold segmentation
    BoundaryEval(BoundaryArgs),
    /// Lexical statistics of glottosets
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Corpus file, one paragraph per line
    #[arg(long)]
    pub input: PathBuf,
    /// Output file for the retained paragraphs
    #[arg(long)]
    pub out: PathBuf,
    /// Target script: latin or cyrillic
    #[arg(long)]
    pub script: Option<Script>,
    /// Minimum words per paragraph [default: 10]
    #[arg(long)]
    pub min_words: Option<usize>,
    /// Write the contamination report here instead of standard output
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GlottosetArgs {
    /// Filtered corpus, one paragraph per line
    #[arg(long)]
    pub input: PathBuf,
    /// Language code [default: input file name up to the first dot]
    #[arg(long)]
    pub lang: Option<String>,
    /// Output TSV (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// Glottoset TSV, optionally as CODE=PATH; repeat for each language
    #[arg(long = "input", required = true)]
    pub inputs: Vec<String>,
    /// Output TSV (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Glottoset or merged glottoset TSV
    #[arg(long)]
    pub input: PathBuf,
    /// ultimate or fixed:N [default: ultimate]
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Shorthand for --mode fixed:N
    #[arg(long, conflicts_with = "mode")]
    pub vocab_size: Option<usize>,
    /// Pair weighting: tf or types [default: tf]
    #[arg(long)]
    pub weighting: Option<Weighting>,
    /// Language code [default: input file name up to the first dot]
    #[arg(long)]
    pub lang: Option<String>,
    /// Output merge table (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Merge table file
    #[arg(long)]
    pub table: PathBuf,
    /// Word to tokenize; repeatable
    #[arg(long = "word")]
    pub words: Vec<String>,
    /// File with one word per line
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TreeFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    /// Merge table file
    #[arg(long)]
    pub table: PathBuf,
    /// Word to decompose
    #[arg(long)]
    pub word: String,
    /// Output format
    #[arg(long, value_enum, default_value = "text")]
    pub format: TreeFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Merge table file
    #[arg(long)]
    pub table: PathBuf,
    /// Number of leading merges to include
    #[arg(long, default_value_t = 100)]
    pub top_n: usize,
    /// Output format
    #[arg(long, value_enum, default_value = "dot")]
    pub format: GraphFormat,
    /// Output file (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    /// First merge table
    #[arg(long)]
    pub a: PathBuf,
    /// Second merge table
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankMatrixArgs {
    /// Merge table trained on the merged glottoset
    #[arg(long)]
    pub universal: PathBuf,
    /// Per-language merge table; repeat for each language
    #[arg(long = "table", required = true)]
    pub tables: Vec<PathBuf>,
    /// Output TSV (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IdentifyMethod {
    Fertility,
    Rank,
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Text to identify
    #[arg(long, conflicts_with = "input")]
    pub text: Option<String>,
    /// File containing the text
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Scoring method
    #[arg(long, value_enum, default_value = "fertility")]
    pub method: IdentifyMethod,
    /// Per-language merge table (fertility method); repeatable
    #[arg(long = "table")]
    pub tables: Vec<PathBuf>,
    /// Universal merge table (rank method)
    #[arg(long)]
    pub universal: Option<PathBuf>,
    /// Rank matrix TSV (rank method)
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Extra cost of a token missing from a language [default: 0.5]
    #[arg(long)]
    pub missing_penalty: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DistancesArgs {
    /// Merge table whose vocabulary enters the Jaccard matrix; repeatable
    #[arg(long = "table")]
    pub tables: Vec<PathBuf>,
    /// Build the phylogenetic matrix from this classification instead
    #[arg(long, requires = "langs")]
    pub classification: Option<PathBuf>,
    /// Comma-separated language codes for the phylogenetic matrix
    #[arg(long = "langs", value_delimiter = ',')]
    pub langs: Vec<String>,
    /// Output CSV (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MantelArgs {
    /// First distance matrix CSV
    #[arg(long)]
    pub a: PathBuf,
    /// Second distance matrix CSV
    #[arg(long)]
    pub b: PathBuf,
    /// Number of permutations [default: 999]
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Permutation seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SeparationArgs {
    /// Distance matrix CSV
    #[arg(long)]
    pub matrix: PathBuf,
    /// Classification TSV: code, family, subfamily, branch
    #[arg(long)]
    pub classification: PathBuf,
    /// Grouping level: family, subfamily or branch
    #[arg(long, default_value = "family")]
    pub level: Level,
}

#[derive(Debug, Args)]
pub struct HomographsArgs {
    /// Glottoset TSV, optionally as CODE=PATH; repeatable
    #[arg(long = "glottoset", required = true)]
    pub glottosets: Vec<String>,
    /// Merge table for each glottoset language; repeatable
    #[arg(long = "table", required = true)]
    pub tables: Vec<PathBuf>,
    /// Minimum term frequency in each language [default: 1]
    #[arg(long)]
    pub min_tf: Option<u64>,
    /// Output TSV for the summary (standard output if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output TSV with every segmentation
    #[arg(long)]
    pub segmentations: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    /// Gold segmentation TSV: word, morphs separated by |
    #[arg(long)]
    pub gold: PathBuf,
    /// Merge table file
    #[arg(long)]
    pub table: PathBuf,
    /// Random baseline trials [default: 100]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Baseline seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Glottoset TSV, optionally as CODE=PATH; repeatable
    #[arg(long = "input", required = true)]
    pub inputs: Vec<String>,
    /// Number of most frequent words to list
    #[arg(long, default_value_t = 3)]
    pub top_k: usize,
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit code. Data goes to `stdout`, diagnostics to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

struct Ctx<'a> {
    config: PipelineConfig,
    pretty: bool,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn open(&self, path: &Path) -> CliResult<BufReader<File>> {
        File::open(path)
            .map(BufReader::new)
            .map_err(|e| CliError::from_lib(Some(path), Error::Io(e)))
    }

    /// Runs `f` against the output file, or standard output if `path` is None.
    fn emit(
        &mut self,
        path: Option<&Path>,
        f: impl FnOnce(&mut dyn Write) -> crate::Result<()>,
    ) -> CliResult<()> {
        match path {
            Some(p) => {
                let p = resolve(&self.config.output_dir, p);
                if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)
                        .map_err(|e| CliError::from_lib(Some(parent), Error::Io(e)))?;
                }
                let file =
                    File::create(&p).map_err(|e| CliError::from_lib(Some(&p), Error::Io(e)))?;
                let mut w = BufWriter::new(file);
                f(&mut w)
                    .and_then(|_| w.flush().map_err(Error::Io))
                    .at(&p)?;
                info!("wrote {}", p.display());
                Ok(())
            }
            None => {
                f(self.stdout).op()?;
                self.stdout
                    .flush()
                    .map_err(|e| CliError::from_lib(None, Error::Io(e)))
            }
        }
    }

    fn read_table(&self, path: &Path) -> CliResult<MergeTable> {
        let p = resolve(&self.config.tables_dir, path);
        MergeTable::read(self.open(&p)?).at(&p)
    }

    fn read_glottoset(&self, arg: &str) -> CliResult<Glottoset> {
        let (code, path) = code_and_path(arg);
        let p = resolve(&self.config.glottoset_dir, &path);
        Glottoset::read_tsv(self.open(&p)?, code).at(&p)
    }
}

/// Language code from the file name: everything before the first dot.
fn stem_code(path: &Path) -> String {
    path.file_name()
        .and_then(|n| n.to_str())
        .map(|n| n.split('.').next().unwrap_or(n).to_string())
        .unwrap_or_default()
}

/// `CODE=PATH` or a bare path whose code is taken from the file name.
fn code_and_path(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((code, path)) if !code.is_empty() && !code.contains(['/', '\\']) => {
            (code.to_string(), path.into())
        }
        _ => {
            let path = PathBuf::from(arg);
            (stem_code(&path), path)
        }
    }
}

fn is_merged_glottoset(path: &Path) -> CliResult<bool> {
    let mut first = String::new();
    BufReader::new(File::open(path).map_err(|e| CliError::from_lib(Some(path), Error::Io(e)))?)
        .read_line(&mut first)
        .map_err(|e| CliError::from_lib(Some(path), Error::Io(e)))?;
    Ok(first.trim_end() == "word\ttf\tdf\tn_langs")
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let mut ctx = Ctx {
        config,
        pretty: cli.pretty,
        stdout,
    };
    match cli.command {
        Command::Ingest(a) => ingest(&mut ctx, a),
        Command::Glottoset(a) => glottoset(&mut ctx, a),
        Command::MergeGlottosets(a) => merge(&mut ctx, a),
        Command::Train(a) => train(&mut ctx, a),
        Command::Encode(a) => encode(&mut ctx, a),
        Command::Tree(a) => tree(&mut ctx, a),
        Command::Graph(a) => graph(&mut ctx, a),
        Command::Diff(a) => diff(&mut ctx, a),
        Command::RankMatrix(a) => rank_matrix(&mut ctx, a),
        Command::Identify(a) => identify(&mut ctx, a),
        Command::Distances(a) => distances(&mut ctx, a),
        Command::Mantel(a) => mantel(&mut ctx, a),
        Command::Separation(a) => separation(&mut ctx, a),
        Command::Homographs(a) => homographs(&mut ctx, a),
        Command::BoundaryEval(a) => boundary(&mut ctx, a),
        Command::Stats(a) => stats(&mut ctx, a),
    }
}

fn ingest(ctx: &mut Ctx, a: IngestArgs) -> CliResult<()> {
    let script = a
        .script
        .or(ctx.config.script)
        .ok_or_else(|| CliError::usage("--script is required (or script= in the config)"))?;
    let min_words = a
        .min_words
        .or(ctx.config.min_words)
        .unwrap_or(DEFAULT_MIN_WORDS);
    let input = resolve(&ctx.config.corpus_dir, &a.input);
    let paragraphs = read_paragraphs(ctx.open(&input)?).at(&input)?;
    let total = paragraphs.len();
    let kept: Vec<_> = filter_paragraphs(paragraphs, script, min_words).collect();
    info!("kept {} of {} paragraphs", kept.len(), total);
    let report = contamination_report(&kept, script);
    ctx.emit(Some(&a.out), |w| write_paragraphs(w, &kept))?;
    let pretty = ctx.pretty;
    ctx.emit(a.report.as_deref(), |w| {
        if pretty {
            writeln!(w, "kept {} of {} paragraphs", kept.len(), total)?;
            for s in Script::ALL {
                writeln!(w, "{:<9} {}", s.name(), report.counts.get(s))?;
            }
            Ok(())
        } else {
            report.write_tsv(w)
        }
    })
}

fn glottoset(ctx: &mut Ctx, a: GlottosetArgs) -> CliResult<()> {
    let input = resolve(&ctx.config.corpus_dir, &a.input);
    let code = a.lang.unwrap_or_else(|| stem_code(&a.input));
    let paragraphs = read_paragraphs(ctx.open(&input)?).at(&input)?;
    let g = build_glottoset(&paragraphs, &code);
    info!(
        "{}: {} words from {} paragraphs",
        code,
        g.len(),
        paragraphs.len()
    );
    ctx.emit(a.out.as_deref(), |w| g.write_tsv(w))
}

fn merge(ctx: &mut Ctx, a: MergeArgs) -> CliResult<()> {
    let sets = a
        .inputs
        .iter()
        .map(|s| ctx.read_glottoset(s))
        .collect::<CliResult<Vec<_>>>()?;
    let merged = merge_glottosets(&sets).op()?;
    ctx.emit(a.out.as_deref(), |w| merged.write_tsv(w))
}

fn train(ctx: &mut Ctx, a: TrainArgs) -> CliResult<()> {
    let mode = a
        .vocab_size
        .map(Mode::FixedVocab)
        .or(a.mode)
        .or(ctx.config.mode)
        .unwrap_or(Mode::Ultimate);
    let weighting = a.weighting.or(ctx.config.weighting).unwrap_or_default();
    let input = resolve(&ctx.config.glottoset_dir, &a.input);
    let table = if is_merged_glottoset(&input)? {
        let merged = MergedGlottoset::read_tsv(ctx.open(&input)?).at(&input)?;
        let mut t = train_bpe(&merged, mode, weighting).op()?;
        if let Some(code) = a.lang {
            t.language_code = code;
        }
        t
    } else {
        let code = a.lang.unwrap_or_else(|| stem_code(&a.input));
        let g = Glottoset::read_tsv(ctx.open(&input)?, code).at(&input)?;
        train_bpe(&g, mode, weighting).op()?
    };
    info!(
        "{}: {} merges, {} tokens ({mode}, {weighting})",
        table.language_code,
        table.merges().len(),
        table.vocab_size()
    );
    ctx.emit(a.out.as_deref(), |w| table.write(w))
}

fn encode(ctx: &mut Ctx, a: EncodeArgs) -> CliResult<()> {
    let table = ctx.read_table(&a.table)?;
    let mut words = a.words;
    if let Some(p) = &a.input {
        let reader = ctx.open(p)?;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CliError::from_lib(Some(p), io_error(e, idx + 1)))?;
            let word = line.trim();
            if !word.is_empty() {
                words.push(word.to_string());
            }
        }
    }
    if words.is_empty() {
        return Err(CliError::usage(
            "give at least one --word or an --input file",
        ));
    }
    let pretty = ctx.pretty;
    ctx.emit(None, |w| {
        for word in &words {
            let tokens = table.encode_word(word);
            if pretty {
                writeln!(w, "{word}: {}", tokens.join(" | "))?;
            } else {
                writeln!(w, "{}", tokens.join(" "))?;
            }
        }
        Ok(())
    })
}

fn io_error(e: io::Error, line: usize) -> Error {
    if e.kind() == io::ErrorKind::InvalidData {
        Error::Malformed {
            line,
            message: "invalid UTF-8".into(),
        }
    } else {
        Error::Io(e)
    }
}

fn tree(ctx: &mut Ctx, a: TreeArgs) -> CliResult<()> {
    let table = ctx.read_table(&a.table)?;
    let forest = tokenization_tree(&table, &a.word);
    ctx.emit(None, |w| {
        match a.format {
            TreeFormat::Text => {
                for t in &forest {
                    w.write_all(t.render().as_bytes())?;
                }
            }
            TreeFormat::Json => {
                serde_json::to_writer_pretty(&mut *w, &forest).map_err(io::Error::from)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })
}

fn graph(ctx: &mut Ctx, a: GraphArgs) -> CliResult<()> {
    let table = ctx.read_table(&a.table)?;
    let g = merge_graph(&table, a.top_n);
    let text = match a.format {
        GraphFormat::Dot => g.to_dot(),
        GraphFormat::Json => g.to_json() + "\n",
    };
    ctx.emit(a.out.as_deref(), |w| Ok(w.write_all(text.as_bytes())?))
}

fn diff(ctx: &mut Ctx, a: DiffArgs) -> CliResult<()> {
    let ta = ctx.read_table(&a.a)?;
    let tb = ctx.read_table(&a.b)?;
    let d = diff_merge_tables(&ta, &tb);
    let pretty = ctx.pretty;
    ctx.emit(None, |w| {
        if pretty {
            writeln!(w, "{} vs {}", ta.language_code, tb.language_code)?;
            writeln!(w, "shared merges:    {}", d.shared.len())?;
            writeln!(w, "only in {}: {}", ta.language_code, d.unique_to_a.len())?;
            writeln!(w, "only in {}: {}", tb.language_code, d.unique_to_b.len())?;
            writeln!(w, "common prefix:    {}", d.common_prefix)?;
            return Ok(());
        }
        writeln!(w, "#common_prefix\t{}", d.common_prefix)?;
        writeln!(w, "status\tleft\tright")?;
        for (status, merges) in [
            ("shared", &d.shared),
            ("a_only", &d.unique_to_a),
            ("b_only", &d.unique_to_b),
        ] {
            for m in merges {
                writeln!(w, "{status}\t{}\t{}", m.left, m.right)?;
            }
        }
        Ok(())
    })
}

fn read_tables(ctx: &Ctx, paths: &[PathBuf]) -> CliResult<Vec<MergeTable>> {
    paths.iter().map(|p| ctx.read_table(p)).collect()
}

fn labelled(tables: &[MergeTable]) -> Vec<(&str, &MergeTable)> {
    tables
        .iter()
        .map(|t| (t.language_code.as_str(), t))
        .collect()
}

fn rank_matrix(ctx: &mut Ctx, a: RankMatrixArgs) -> CliResult<()> {
    let universal = ctx.read_table(&a.universal)?;
    let tables = read_tables(ctx, &a.tables)?;
    let m = build_rank_matrix(&universal, &labelled(&tables)).op()?;
    ctx.emit(a.out.as_deref(), |w| m.write_tsv(w))
}

fn identify(ctx: &mut Ctx, a: IdentifyArgs) -> CliResult<()> {
    let text = match (&a.text, &a.input) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => {
            let mut s = String::new();
            io::Read::read_to_string(&mut ctx.open(p)?, &mut s)
                .map_err(|e| CliError::from_lib(Some(p), io_error(e, 1)))?;
            s
        }
        (None, None) => return Err(CliError::usage("give --text or --input")),
    };
    let scores = match a.method {
        IdentifyMethod::Fertility => {
            if a.tables.is_empty() {
                return Err(CliError::usage(
                    "the fertility method needs at least one --table",
                ));
            }
            let tables = read_tables(ctx, &a.tables)?;
            identify_language_fertility(&text, &labelled(&tables)).op()?
        }
        IdentifyMethod::Rank => {
            let (Some(u), Some(m)) = (&a.universal, &a.matrix) else {
                return Err(CliError::usage(
                    "the rank method needs --universal and --matrix",
                ));
            };
            let universal = ctx.read_table(u)?;
            let mp = resolve(&ctx.config.output_dir, m);
            let matrix = RankMatrix::read_tsv(ctx.open(&mp)?).at(&mp)?;
            let penalty = a
                .missing_penalty
                .or(ctx.config.missing_penalty)
                .unwrap_or(DEFAULT_MISSING_PENALTY);
            identify_language_rank(&text, &universal, &matrix, penalty).op()?
        }
    };
    let pretty = ctx.pretty;
    ctx.emit(None, |w| {
        if !pretty {
            return write_scores(w, &scores);
        }
        let probs = score_distribution(&scores, 1.0);
        for (i, (s, (_, p))) in scores.iter().zip(&probs).enumerate() {
            writeln!(
                w,
                "{:>2}. {:<8} score {:<10.4} weight {:.3}",
                i + 1,
                s.language_code,
                s.score,
                p
            )?;
        }
        Ok(())
    })
}

fn distances(ctx: &mut Ctx, a: DistancesArgs) -> CliResult<()> {
    let matrix = if let Some(cp) = &a.classification {
        let classification = PhyloClassification::read_tsv(ctx.open(cp)?).at(cp)?;
        let codes: Vec<&str> = a.langs.iter().map(String::as_str).collect();
        phylo_distance_matrix(&classification, &codes).op()?
    } else {
        if a.tables.len() < 2 {
            return Err(CliError::usage(
                "give at least two --table files or a --classification",
            ));
        }
        let tables = read_tables(ctx, &a.tables)?;
        let vocabs: Vec<_> = tables
            .iter()
            .map(|t| (t.language_code.as_str(), vocabulary(t)))
            .collect();
        build_distance_matrix(&vocabs).op()?
    };
    ctx.emit(a.out.as_deref(), |w| matrix.write_csv(w))
}

fn read_matrix(ctx: &Ctx, path: &Path) -> CliResult<DistanceMatrix> {
    let p = resolve(&ctx.config.output_dir, path);
    DistanceMatrix::read_csv(ctx.open(&p)?).at(&p)
}

fn mantel(ctx: &mut Ctx, a: MantelArgs) -> CliResult<()> {
    let ma = read_matrix(ctx, &a.a)?;
    let mb = read_matrix(ctx, &a.b)?;
    let permutations = a
        .permutations
        .or(ctx.config.permutations)
        .unwrap_or(DEFAULT_PERMUTATIONS);
    let seed = a.seed.or(ctx.config.mantel_seed).unwrap_or(0);
    let res = mantel_test(&ma, &mb, permutations, seed).op()?;
    let pretty = ctx.pretty;
    ctx.emit(None, |w| {
        if pretty {
            writeln!(w, "Mantel r = {:.4}", res.r)?;
            writeln!(
                w,
                "p-value  = {:.4} ({} permutations, seed {})",
                res.p, res.permutations, res.seed
            )?;
        } else {
            writeln!(
                w,
                "r={} p={} permutations={}",
                res.r, res.p, res.permutations
            )?;
        }
        Ok(())
    })
}

fn separation(ctx: &mut Ctx, a: SeparationArgs) -> CliResult<()> {
    let m = read_matrix(ctx, &a.matrix)?;
    let classification =
        PhyloClassification::read_tsv(ctx.open(&a.classification)?).at(&a.classification)?;
    let s = family_separation(&m, &classification.groups(a.level)).op()?;
    ctx.emit(None, |w| write_separation_tsv(w, &s))
}

fn homographs(ctx: &mut Ctx, a: HomographsArgs) -> CliResult<()> {
    let sets = a
        .glottosets
        .iter()
        .map(|s| ctx.read_glottoset(s))
        .collect::<CliResult<Vec<_>>>()?;
    let tables = read_tables(ctx, &a.tables)?;
    let min_tf = a.min_tf.or(ctx.config.min_tf).unwrap_or(DEFAULT_MIN_TF);
    let refs: Vec<&Glottoset> = sets.iter().collect();
    let found = find_homographs(&refs, min_tf).op()?;
    info!("{} homographs", found.len());
    let tokenizers: BTreeMap<String, &MergeTable> = tables
        .iter()
        .map(|t| (t.language_code.clone(), t))
        .collect();
    let report = homograph_report(&found, &tokenizers).op()?;
    if let Some(p) = &a.segmentations {
        ctx.emit(Some(p), |w| report.write_segmentations(w))?;
    }
    let pretty = ctx.pretty;
    ctx.emit(a.out.as_deref(), |w| {
        if pretty {
            writeln!(
                w,
                "{} homographs, {} segmented differently ({:.1}%)",
                report.total(),
                report.different,
                100.0 * report.fraction_different
            )?;
            Ok(())
        } else {
            report.write_tsv(w)
        }
    })
}

fn boundary(ctx: &mut Ctx, a: BoundaryArgs) -> CliResult<()> {
    let gold = read_gold_tsv(ctx.open(&a.gold)?).at(&a.gold)?;
    let table = ctx.read_table(&a.table)?;
    let trials = a
        .trials
        .or(ctx.config.baseline_trials)
        .unwrap_or(DEFAULT_BASELINE_TRIALS);
    let seed = a.seed.or(ctx.config.baseline_seed).unwrap_or(0);
    let res = boundary_eval(&gold, &table, trials, seed).op()?;
    let pretty = ctx.pretty;
    ctx.emit(None, |w| {
        if pretty {
            writeln!(w, "{} ({} words)", table.language_code, res.words)?;
            writeln!(
                w,
                "BPE     P {:.3}  R {:.3}  F1 {:.3}",
                res.bpe.precision, res.bpe.recall, res.bpe.f1
            )?;
            writeln!(
                w,
                "random  P {:.3}  R {:.3}  F1 {:.3}",
                res.random.precision, res.random.recall, res.random.f1
            )?;
            writeln!(w, "F1 improvement {:+.1}%", res.improvement_percent())?;
            Ok(())
        } else {
            write_boundary_tsv(w, [(table.language_code.as_str(), &res)])
        }
    })
}

fn stats(ctx: &mut Ctx, a: StatsArgs) -> CliResult<()> {
    let sets = a
        .inputs
        .iter()
        .map(|s| ctx.read_glottoset(s))
        .collect::<CliResult<Vec<_>>>()?;
    let computed = sets
        .iter()
        .map(|g| lexical_stats(g, g.total_tokens(), a.top_k))
        .collect::<crate::Result<Vec<_>>>()
        .op()?;
    ctx.emit(None, |w| {
        write_stats_tsv(
            w,
            sets.iter()
                .zip(&computed)
                .map(|(g, s)| (g.language_code.as_str(), g.script, s)),
        )
    })
}
