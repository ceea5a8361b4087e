//! Command-line front end: train, normalize, back-transliterate, evaluate and
//! generate synthetic data.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 bad data.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use translit_norm::eval::synth::{generate, SynthConfig};
use translit_norm::eval::{evaluate_with, render_table, EvalOptions};
use translit_norm::lexicon::{load_dictionary, load_parallel_lexicon, load_test_set};
use translit_norm::pipeline::{prenormalize_lexicon, Normalizer};
use translit_norm::seq2seq::{self, load_checkpoint, save_checkpoint};
use translit_norm::{
    DigitPhoneTable, EquivalenceClasses, Execution, MatchMode, ModelParams, SetupId,
    TrainingConfig, UnknownPolicy,
};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DATA: u8 = 4;

/// Argument combinations clap cannot reject on its own.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(
    name = "translit-norm",
    version,
    about = "Normalize transliterated code-mixed words"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the sequence model on a parallel lexicon.
    Train(TrainArgs),
    /// Normalize words given on the command line or in a file.
    Normalize(NormalizeArgs),
    /// Look up native-script forms of standard transliterations.
    BackTransliterate(BackArgs),
    /// Score a test set under one or all setups.
    Evaluate(EvaluateArgs),
    /// Write a seeded synthetic dictionary, lexicon and test set.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Standard,
    Modified,
}

impl From<ModeArg> for MatchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Standard => MatchMode::Standard,
            ModeArg::Modified => MatchMode::Modified,
        }
    }
}

#[derive(Args)]
struct PrenormArgs {
    /// Ten `<digit>\t<phone>` lines replacing the built-in digit words.
    #[arg(long)]
    digit_table: Option<PathBuf>,
}

impl PrenormArgs {
    fn table(&self) -> Result<DigitPhoneTable> {
        match &self.digit_table {
            Some(p) => Ok(DigitPhoneTable::load(p)?),
            None => Ok(DigitPhoneTable::default()),
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    /// Transliteration dictionary, `<native>\t<standard>` per line.
    #[arg(long)]
    dict: PathBuf,
    /// One equivalence class per line (default: `ao` and `bv`).
    #[arg(long)]
    eq_classes: Option<PathBuf>,
    /// Model checkpoint; required by setups 3 and 4.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Drop characters the model has never seen instead of failing the word.
    #[arg(long)]
    skip_unknown: bool,
    #[command(flatten)]
    prenorm: PrenormArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

impl MatchArgs {
    fn eq(&self) -> Result<EquivalenceClasses> {
        match &self.eq_classes {
            Some(p) => Ok(EquivalenceClasses::load(p)?),
            None => Ok(EquivalenceClasses::default_pairs()),
        }
    }

    fn unknown(&self) -> UnknownPolicy {
        if self.skip_unknown {
            UnknownPolicy::Skip
        } else {
            UnknownPolicy::Error
        }
    }

    fn require_checkpoint(&self, needed: bool) -> Result<()> {
        if needed && self.checkpoint.is_none() {
            return Err(usage(
                "this setup runs the sequence model; pass --checkpoint",
            ));
        }
        Ok(())
    }

    fn model(&self, needed: bool) -> Result<Option<ModelParams>> {
        self.require_checkpoint(needed)?;
        match &self.checkpoint {
            Some(p) if needed => Ok(Some(load_checkpoint(p)?)),
            _ => Ok(None),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Parallel lexicon, `<user spelling>\t<standard>` per line.
    #[arg(long)]
    lexicon: PathBuf,
    /// Where to write the checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Per-epoch JSON Lines trace (default: checkpoint path + `.trace.jsonl`).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    prenorm: PrenormArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 128)]
    hidden_dim: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    /// Share of the lexicon held out for validation metrics.
    #[arg(long, default_value_t = 0.1)]
    validation_fraction: f64,
    /// Print per-epoch progress to stderr.
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct NormalizeArgs {
    /// Words to normalize.
    words: Vec<String>,
    /// Read words from a file, one per line.
    #[arg(long, conflicts_with = "words")]
    input: Option<PathBuf>,
    /// 1..=4; defaults to 4 with --checkpoint, otherwise 2.
    #[arg(long)]
    setup: Option<String>,
    /// Distance used for matching (default: modified).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Stop with an error at the first word that cannot be normalized.
    #[arg(long)]
    fail_fast: bool,
    #[command(flatten)]
    common: MatchArgs,
}

#[derive(Args)]
struct BackArgs {
    /// Standard transliterations to look up.
    #[arg(required = true)]
    words: Vec<String>,
    #[arg(long)]
    dict: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Test set, `<input>\t<gold standard>` per line.
    #[arg(long)]
    testset: PathBuf,
    /// 1..=4 or `all`.
    #[arg(long, default_value = "all")]
    setup: String,
    /// Restricts `--setup all` to the two setups with this distance; must
    /// agree with a numbered setup.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[command(flatten)]
    common: MatchArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of training pairs.
    #[arg(long, default_value_t = 1000)]
    size: usize,
    #[arg(long, default_value_t = 200)]
    dict_size: usize,
    #[arg(long, default_value_t = 200)]
    test_size: usize,
    #[arg(long, default_value_t = 0.3)]
    noise_rate: f64,
}

fn parse_setup(s: &str) -> Result<SetupId> {
    s.parse()
        .map_err(|e: translit_norm::eval::EvalError| usage(e.to_string()))
}

/// Resolve `--setup`/`--mode`/`--checkpoint` into one setup.
fn single_setup(setup: Option<&str>, mode: Option<ModeArg>, has_model: bool) -> Result<SetupId> {
    match setup {
        Some(s) => {
            let id = parse_setup(s)?;
            if let Some(m) = mode {
                if MatchMode::from(m) != id.mode() {
                    return Err(usage(format!(
                        "--mode {} conflicts with --setup {s}, which uses {} distance",
                        MatchMode::from(m),
                        id.mode()
                    )));
                }
            }
            Ok(id)
        }
        None => Ok(SetupId::from_parts(
            has_model,
            mode.map_or(MatchMode::Modified, MatchMode::from),
        )),
    }
}

fn read_words(path: &Path) -> Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("failed to read {}", path.display()))?;
    let body = text.strip_suffix('\n').unwrap_or(&text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('\n')
        .enumerate()
        .map(|(i, w)| {
            if w.is_empty() || w.contains('\r') {
                bail!("{}: line {}: expected one word", path.display(), i + 1)
            }
            Ok(w.to_owned())
        })
        .collect()
}

fn write_json_line<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("failed to write {}", path.display()))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let lexicon = load_parallel_lexicon(&a.lexicon)?;
    let lexicon = prenormalize_lexicon(&lexicon, &a.prenorm.table()?);
    let cfg = TrainingConfig {
        batch_size: a.batch_size,
        epochs: a.epochs,
        hidden_dim: a.hidden_dim,
        learning_rate: a.lr,
        num_layers: a.layers,
        seed: a.seed,
        validation_fraction: a.validation_fraction,
        ..Default::default()
    };
    if let Err(e) = cfg.validate() {
        return Err(usage(e.to_string()));
    }
    let (model, trace) = seq2seq::train_with(&lexicon, &cfg, |r| {
        if a.verbose {
            eprintln!(
                "epoch {:>3}  loss {:.4}  char {:.3}  seq {:.3}",
                r.epoch, r.loss, r.char_accuracy, r.sequence_accuracy
            );
        }
    })?;
    save_checkpoint(&model, &a.checkpoint)?;
    let trace_path = a.trace.unwrap_or_else(|| {
        let mut p = a.checkpoint.clone().into_os_string();
        p.push(".trace.jsonl");
        p.into()
    });
    write_file(&trace_path, trace.to_jsonl())?;
    Ok(())
}

#[derive(Serialize)]
struct WordError<'a> {
    input: &'a str,
    error: String,
}

fn cmd_normalize(a: NormalizeArgs) -> Result<()> {
    let setup = single_setup(a.setup.as_deref(), a.mode, a.common.checkpoint.is_some())?;
    a.common.require_checkpoint(setup.uses_model())?;
    let words = match &a.input {
        Some(p) => read_words(p)?,
        None if a.words.is_empty() => return Err(usage("give words or --input")),
        None => a.words.clone(),
    };
    let c = &a.common;
    let dict = load_dictionary(&c.dict)?;
    let eq = c.eq()?;
    let model = c.model(setup.uses_model())?;
    let normalizer = Normalizer::new(model.as_ref(), &dict, &eq, setup.mode())
        .with_digits(c.prenorm.table()?)
        .with_unknown_policy(c.unknown());
    let results = normalizer.normalize_batch(&words, Execution::Parallel);

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (word, result) in words.iter().zip(results) {
        match result {
            Ok(r) => match c.format {
                Format::Structured => write_json_line(&mut out, &r)?,
                Format::Text => writeln!(
                    out,
                    "{}\t{}\t{}",
                    r.input,
                    r.final_form,
                    r.back_transliterations.join(",")
                )?,
            },
            Err(e) if a.fail_fast => {
                out.flush()?;
                return Err(anyhow::Error::new(e).context(format!("cannot normalize {word:?}")));
            }
            Err(e) => match c.format {
                Format::Structured => write_json_line(
                    &mut out,
                    &WordError {
                        input: word,
                        error: e.to_string(),
                    },
                )?,
                Format::Text => eprintln!("warning: cannot normalize {word:?}: {e}"),
            },
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BackRecord<'a> {
    standard: &'a str,
    native: Vec<String>,
}

fn cmd_back(a: BackArgs) -> Result<()> {
    let dict = load_dictionary(&a.dict)?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for w in &a.words {
        let native = dict.reverse_lookup(w);
        match a.format {
            Format::Structured => write_json_line(
                &mut out,
                &BackRecord {
                    standard: w,
                    native,
                },
            )?,
            Format::Text => writeln!(out, "{w}\t{}", native.join(","))?,
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let setups: Vec<SetupId> = if a.setup == "all" {
        SetupId::ALL
            .into_iter()
            .filter(|s| a.mode.is_none_or(|m| s.mode() == MatchMode::from(m)))
            .collect()
    } else {
        vec![single_setup(Some(&a.setup), a.mode, false)?]
    };
    let c = &a.common;
    c.require_checkpoint(setups.iter().any(|s| s.uses_model()))?;
    let testset = load_test_set(&a.testset)?;
    let dict = load_dictionary(&c.dict)?;
    let eq = c.eq()?;
    let model = c.model(setups.iter().any(|s| s.uses_model()))?;
    let opts = EvalOptions {
        digits: c.prenorm.table()?,
        unknown: c.unknown(),
        exec: Execution::Parallel,
    };
    let reports = setups
        .iter()
        .map(|&s| evaluate_with(&testset, model.as_ref(), &dict, &eq, s, &opts))
        .collect::<Result<Vec<_>, _>>()?;

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match c.format {
        Format::Text => out.write_all(render_table(&reports).as_bytes())?,
        Format::Structured => {
            for r in &reports {
                write_json_line(&mut out, r)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    if a.size == 0 || a.dict_size == 0 || a.test_size == 0 {
        return Err(usage(
            "--size, --dict-size and --test-size must be positive",
        ));
    }
    if !(0.0..=1.0).contains(&a.noise_rate) {
        return Err(usage("--noise-rate must be in [0, 1]"));
    }
    let corpus = generate(&SynthConfig {
        seed: a.seed,
        dictionary_size: a.dict_size,
        train_pairs: a.size,
        test_size: a.test_size,
        noise_rate: a.noise_rate,
    });
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("failed to create {}", a.out_dir.display()))?;
    write_file(
        &a.out_dir.join("dictionary.tsv"),
        corpus.dictionary.to_string(),
    )?;
    write_file(&a.out_dir.join("lexicon.tsv"), corpus.lexicon.to_string())?;
    write_file(&a.out_dir.join("testset.tsv"), corpus.testset.to_string())?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        EXIT_USAGE
    } else if err.chain().any(|e| e.is::<io::Error>()) {
        EXIT_IO
    } else {
        EXIT_DATA
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Normalize(a) => cmd_normalize(a),
        Command::BackTransliterate(a) => cmd_back(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
