//! The `ccg` command: parse, normalize, enumerate, train, check.
//!
//! Every subcommand writes one JSON object per line to standard output.
//! Diagnostics go to standard error. Exit status is 0 on success, 1 when
//! parsing fails or a check is violated, and 2 on usage or I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ccg_core::check::{self, CheckOptions};
use ccg_core::config::EngineConfig;
use ccg_core::derivation::DerivationRecord;
use ccg_core::gen::{backward_chain, forward_chain};
use ccg_core::lexicon::{parse_corpus, Lexicon};
use ccg_core::oracle::{enumerate_all_limited, enumerate_sentence, sem_partition};
use ccg_core::parser::{parse, ParseError, ParseMode, TraceEvent};
use ccg_core::viability::{train, ViabilityModel};
use ccg_core::{bundled, normalize, parse_bracketed, Category, Derivation, RewriteStrategy};

#[derive(Parser, Debug)]
#[command(name = "ccg", version, about = "Incremental CCG parsing toolkit")]
struct Cli {
    /// Engine settings in TOML; command-line flags override them.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a sentence word by word, printing the surviving analyses.
    Parse(ParseArgs),
    /// Rewrite a derivation to its right-branching normal form.
    Normalize(NormalizeArgs),
    /// Count every derivation of a chain or sentence.
    Enumerate(EnumerateArgs),
    /// Learn a viability model from a corpus.
    Train(TrainArgs),
    /// Run the invariant suites.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct GrammarArgs {
    /// Lexicon file.
    #[arg(long, conflicts_with = "bundled")]
    lexicon: Option<PathBuf>,
    /// One of the bundled grammars, by name.
    #[arg(long)]
    bundled: Option<String>,
}

#[derive(Args, Debug)]
struct ParseArgs {
    #[command(flatten)]
    grammar: GrammarArgs,
    /// exhaustive or eager.
    #[arg(long)]
    policy: Option<ParseMode>,
    /// Disable attachment by rewriting in eager mode.
    #[arg(long)]
    no_reveal: bool,
    /// Goal category; repeat for several.
    #[arg(long = "goal")]
    goals: Vec<Category>,
    /// Viability model to filter analyses with.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Also print every trace event.
    #[arg(long)]
    trace: bool,
    /// The sentence; several arguments are joined with spaces.
    #[arg(required = true)]
    sentence: Vec<String>,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    /// Derivation in bracketed form, e.g. "((a:x/y >1 b:y/z) >0 c:z)".
    #[arg(long, conflicts_with = "json", required_unless_present = "json")]
    derivation: Option<String>,
    /// File holding a derivation record in JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// root-first, leftmost-innermost or random:SEED.
    #[arg(long, default_value = "root-first")]
    strategy: RewriteStrategy,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    /// Uniform composition chain of this many words.
    #[arg(long, conflicts_with_all = ["lexicon", "bundled", "sentence"])]
    chain: Option<usize>,
    /// Use a backward chain instead of a forward one.
    #[arg(long, requires = "chain")]
    backward: bool,
    #[command(flatten)]
    grammar: GrammarArgs,
    /// Also print every derivation.
    #[arg(long)]
    trees: bool,
    sentence: Vec<String>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    grammar: GrammarArgs,
    /// One sentence per line; the bundled training corpus if omitted with
    /// a bundled grammar.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Where to write the model.
    #[arg(long, short)]
    output: PathBuf,
    /// Existing model to extend.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    threshold: Option<u64>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random derivations per suite.
    #[arg(long, default_value_t = 1000)]
    random_cases: usize,
    /// A much smaller run, for smoke testing.
    #[arg(long)]
    quick: bool,
}

/// Why a command failed, and the exit status it maps to.
#[derive(Debug)]
enum Failure {
    /// Bad arguments or unreadable input: status 2.
    Usage(String),
    /// The command ran but the answer is negative: status 1.
    Negative(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Negative(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Negative(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

struct Out<'a> {
    w: &'a mut dyn Write,
}

impl Out<'_> {
    fn record<T: Serialize>(&mut self, value: &T) -> Result<(), Failure> {
        let line = serde_json::to_string(value).map_err(usage)?;
        writeln!(self.w, "{}", line).map_err(usage)
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e);
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e);
                    2
                }
            };
        }
    };
    let mut out = Out { w: out };
    let result = load_config(cli.config.as_deref()).and_then(|config| match cli.command {
        Command::Parse(a) => cmd_parse(a, &config, &mut out),
        Command::Normalize(a) => cmd_normalize(a, &config, &mut out),
        Command::Enumerate(a) => cmd_enumerate(a, &config, &mut out),
        Command::Train(a) => cmd_train(a, &config, &mut out),
        Command::Check(a) => cmd_check(a, &mut out),
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig, Failure> {
    match path {
        None => Ok(EngineConfig::default()),
        Some(p) => EngineConfig::load(p).map_err(usage),
    }
}

fn load_grammar(g: &GrammarArgs) -> Result<Option<(Lexicon, Option<&'static bundled::BundledGrammar>)>, Failure> {
    match (&g.lexicon, &g.bundled) {
        (Some(path), _) => Ok(Some((Lexicon::load(path).map_err(usage)?, None))),
        (None, Some(name)) => {
            let b = bundled::by_name(name).ok_or_else(|| {
                let names: Vec<&str> = bundled::all().iter().map(|g| g.name).collect();
                Failure::Usage(format!("no bundled grammar {:?}; available: {}", name, names.join(", ")))
            })?;
            Ok(Some((b.lexicon(), Some(b))))
        }
        (None, None) => Ok(None),
    }
}

fn require_grammar(g: &GrammarArgs) -> Result<(Lexicon, Option<&'static bundled::BundledGrammar>), Failure> {
    load_grammar(g)?.ok_or_else(|| Failure::Usage("give --lexicon FILE or --bundled NAME".into()))
}

fn tokens(sentence: &[String]) -> Vec<String> {
    sentence.iter().flat_map(|s| s.split_whitespace()).map(str::to_string).collect()
}

#[derive(Serialize)]
struct AnalysisRecord<'a> {
    r#type: &'static str,
    word_index: usize,
    word: &'a str,
    categories: Vec<String>,
    digests: Vec<String>,
}

#[derive(Serialize)]
struct EventRecord<'a> {
    r#type: &'static str,
    #[serde(flatten)]
    event: &'a TraceEvent,
}

#[derive(Serialize)]
struct ParseSummary {
    r#type: &'static str,
    words: usize,
    analyses: usize,
    complete: usize,
    categories: Vec<String>,
    derivations: Vec<String>,
}

fn cmd_parse(a: ParseArgs, config: &EngineConfig, out: &mut Out) -> Result<(), Failure> {
    let (lex, _) = require_grammar(&a.grammar)?;
    let mut config = config.clone();
    // an explicit eager policy brings reveal with it unless --no-reveal
    if let Some(mode) = a.policy {
        config.policy = mode;
        config.reveal = mode == ParseMode::Eager;
    }
    if a.no_reveal {
        config.reveal = false;
    }
    if !a.goals.is_empty() {
        config.goals = Some(a.goals.clone());
    }
    if let Some(m) = &a.model {
        config.viability_model = Some(m.clone());
    }
    let policy = config.parse_policy().map_err(usage)?;
    let words = tokens(&a.sentence);
    let result = match parse(&words, &lex, &policy) {
        Ok(r) => r,
        Err(e @ ParseError::Stuck { .. }) => {
            if let ParseError::Stuck { trace, .. } = &e {
                if a.trace {
                    for ev in trace {
                        out.record(&EventRecord { r#type: "event", event: ev })?;
                    }
                }
            }
            return Err(Failure::Negative(e.to_string()));
        }
        Err(e @ ParseError::UnknownWord { .. }) => return Err(Failure::Negative(e.to_string())),
        Err(e) => return Err(usage(e)),
    };
    for (i, snap) in result.snapshots.iter().enumerate() {
        for an in snap {
            out.record(&AnalysisRecord {
                r#type: "analysis",
                word_index: i,
                word: &words[i],
                categories: an.category_strings(),
                digests: an.constituents.iter().map(|d| d.digest()).collect(),
            })?;
        }
    }
    if a.trace {
        for ev in &result.trace {
            out.record(&EventRecord { r#type: "event", event: ev })?;
        }
    }
    out.record(&ParseSummary {
        r#type: "result",
        words: words.len(),
        analyses: result.analyses.len(),
        complete: result.complete.len(),
        categories: result.complete.iter().map(|d| d.cat().to_string()).collect(),
        derivations: result.complete.iter().map(|d| d.bracketed()).collect(),
    })?;
    if result.complete.is_empty() {
        return Err(Failure::Negative(format!(
            "no complete derivation; {} analyses remain",
            result.analyses.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct NormalizeRecord {
    r#type: &'static str,
    strategy: String,
    steps: usize,
    sigma_trace: Vec<usize>,
    positions: Vec<String>,
    category: String,
    normal_form: String,
    tree: DerivationRecord,
}

fn cmd_normalize(a: NormalizeArgs, config: &EngineConfig, out: &mut Out) -> Result<(), Failure> {
    let d: Derivation = match (&a.derivation, &a.json) {
        (Some(text), _) => parse_bracketed(text).map_err(usage)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {}", path.display(), e)))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e)))?
        }
        (None, None) => return Err(Failure::Usage("give --derivation or --json".into())),
    };
    let r = normalize(&d, a.strategy, &config.rules).map_err(|e| Failure::Negative(e.to_string()))?;
    out.record(&NormalizeRecord {
        r#type: "normal_form",
        strategy: a.strategy.to_string(),
        steps: r.steps,
        sigma_trace: r.sigma_trace.clone(),
        positions: r.positions.iter().map(|p| p.to_string()).collect(),
        category: r.normal_form.cat().to_string(),
        normal_form: r.normal_form.bracketed(),
        tree: r.normal_form.to_record(),
    })
}

#[derive(Serialize)]
struct EnumerationRecord {
    r#type: &'static str,
    count: usize,
    classes: usize,
    elapsed_ms: u128,
}

#[derive(Serialize)]
struct TreeRecord {
    r#type: &'static str,
    index: usize,
    category: String,
    bracketed: String,
    pretty: String,
}

fn cmd_enumerate(a: EnumerateArgs, config: &EngineConfig, out: &mut Out) -> Result<(), Failure> {
    let start = Instant::now();
    let derivs = if let Some(n) = a.chain {
        let items = if a.backward { backward_chain(n) } else { forward_chain(n) };
        enumerate_all_limited(&items, &config.rules, config.max_enumeration_len).map_err(usage)?
    } else {
        let (lex, _) = require_grammar(&a.grammar)?;
        let words = tokens(&a.sentence);
        if words.is_empty() {
            return Err(Failure::Usage("give --chain N or a sentence".into()));
        }
        if let Some(w) = words.iter().find(|w| lex.entries(w).is_none()) {
            return Err(Failure::Negative(format!("unknown word {:?}", w)));
        }
        if words.len() > config.max_enumeration_len {
            return Err(Failure::Usage(format!(
                "sentence of {} words exceeds the enumeration guard of {}",
                words.len(),
                config.max_enumeration_len
            )));
        }
        enumerate_sentence(&words, &lex, &config.rules).map_err(usage)?
    };
    let classes = {
        // classes only make sense within one root category
        let mut by_cat: std::collections::BTreeMap<Category, Vec<Derivation>> = Default::default();
        for d in &derivs {
            by_cat.entry(d.cat().clone()).or_default().push(d.clone());
        }
        let mut n = 0;
        for group in by_cat.values() {
            n += sem_partition(group).map_err(usage)?.len();
        }
        n
    };
    if a.trees {
        for (i, d) in derivs.iter().enumerate() {
            out.record(&TreeRecord {
                r#type: "tree",
                index: i,
                category: d.cat().to_string(),
                bracketed: d.bracketed(),
                pretty: d.pretty(),
            })?;
        }
    }
    out.record(&EnumerationRecord {
        r#type: "enumeration",
        count: derivs.len(),
        classes,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

#[derive(Serialize)]
struct TrainRecord {
    r#type: &'static str,
    sentences: usize,
    labelled: usize,
    skipped: usize,
    signatures: usize,
    non_viable: usize,
    output: String,
}

#[derive(Serialize)]
struct SkippedRecord {
    r#type: &'static str,
    sentence: usize,
    reason: String,
}

fn cmd_train(a: TrainArgs, config: &EngineConfig, out: &mut Out) -> Result<(), Failure> {
    let (lex, bundle) = require_grammar(&a.grammar)?;
    let corpus = match (&a.corpus, bundle) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {}", path.display(), e)))?;
            parse_corpus(&text)
        }
        (None, Some(b)) if b.name == bundled::INSULTS.name => bundled::insults_corpus(),
        (None, _) => return Err(Failure::Usage("give --corpus FILE".into())),
    };
    let k = a.k.unwrap_or(config.k);
    let threshold = a.threshold.unwrap_or(config.threshold);
    if k == 0 {
        return Err(Failure::Usage("k must be at least 1".into()));
    }
    let start = match &a.model {
        Some(path) => {
            let m = ViabilityModel::load(path).map_err(usage)?;
            if m.k != k && a.k.is_some() {
                return Err(Failure::Usage(format!("existing model has k={}, not {}", m.k, k)));
            }
            let mut m = m;
            m.threshold = threshold;
            m
        }
        None => ViabilityModel::new(k, threshold),
    };
    let (model, report) = train(&corpus, &lex, start, &config.rules);
    model.save(&a.output).map_err(usage)?;
    for (i, reason) in &report.skipped {
        out.record(&SkippedRecord {
            r#type: "skipped",
            sentence: *i,
            reason: reason.clone(),
        })?;
    }
    out.record(&TrainRecord {
        r#type: "train",
        sentences: report.sentences,
        labelled: report.labelled,
        skipped: report.skipped.len(),
        signatures: model.signatures().count(),
        non_viable: model.signatures().filter(|(s, _)| !model.is_viable_signature(s)).count(),
        output: a.output.display().to_string(),
    })
}

#[derive(Serialize)]
struct CheckSummary {
    r#type: &'static str,
    passed: bool,
    suites: usize,
    elapsed_ms: u128,
}

#[derive(Serialize)]
struct SuiteRecord<'a> {
    r#type: &'static str,
    passed: bool,
    #[serde(flatten)]
    report: &'a check::SuiteReport,
}

fn cmd_check(a: CheckArgs, out: &mut Out) -> Result<(), Failure> {
    let start = Instant::now();
    let opts = if a.quick {
        CheckOptions {
            seed: a.seed,
            random_cases: a.random_cases.min(50),
            exhaustive_leaves: 4,
            labellings: 1,
            random_strategies: 3,
            explore_up_to: 4,
            ..CheckOptions::default()
        }
    } else {
        CheckOptions {
            seed: a.seed,
            random_cases: a.random_cases,
            ..CheckOptions::default()
        }
    };
    let reports = check::run_all(&opts);
    let mut passed = true;
    for r in &reports {
        passed &= r.passed();
        out.record(&SuiteRecord {
            r#type: "suite",
            passed: r.passed(),
            report: r,
        })?;
    }
    out.record(&CheckSummary {
        r#type: "check",
        passed,
        suites: reports.len(),
        elapsed_ms: start.elapsed().as_millis(),
    })?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
        Err(Failure::Negative(format!("failed suites: {}", failed.join(", "))))
    }
}
