//! The `paragen` command line: `train`, `generate`, `eval`, `gradcheck` and
//! `make-corpus`.
//!
//! Failures print one JSON line `{"error": kind, "message": text}` to stderr
//! and exit with status 1 (2 for usage errors).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint::Checkpoint;
use crate::config::{CouplingWeights, ModelConfig, DEFAULT_MAX_SENTENCES, DEFAULT_MAX_WORDS};
use crate::corpus::{
    load_dataset, save_dataset, synthetic_corpus, CorpusSpec, LoadOptions, Vocabulary,
};
use crate::diagnostics::{primitive_gradchecks, tiny_gradcheck, CheckSummary, TinyGradCheck, TinyShape};
use crate::error::{Error, Result};
use crate::metrics::{bleu, cider, self_bleu, EvalPair};
use crate::model::{DecodeMode, ParagraphModel};
use crate::training::{TrainConfig, Trainer};
use crate::vae;

#[derive(Debug, Parser)]
#[command(name = "paragen", version, about = "Diverse and coherent paragraph generation from image features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a JSON run configuration.
    Train {
        config: PathBuf,
        /// Continue from the newest epoch checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Decode paragraphs for each input record.
    Generate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// JSON-lines records with `features` (and optional `id`, `stars`).
        #[arg(long)]
        input: PathBuf,
        /// Vocabulary used at training time.
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Paragraphs per input in variational mode.
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score predictions against references.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        /// Dataset-format references; lines sharing an id are one reference set.
        #[arg(long)]
        references: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference gradient check on a tiny model.
    Gradcheck {
        #[arg(long, default_value_t = 8)]
        hidden: usize,
        #[arg(long, default_value_t = 12)]
        feature_dim: usize,
        #[arg(long, default_value_t = 20)]
        vocab_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
    },
    /// Write a synthetic corpus and its vocabulary.
    MakeCorpus {
        #[arg(long, default_value_t = 10)]
        scenes: usize,
        /// Reference paragraphs per scene.
        #[arg(long, default_value_t = 1)]
        refs: usize,
        #[arg(long, default_value_t = 64)]
        feature_dim: usize,
        #[arg(long)]
        stars: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        vocab_out: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            emit(&e.to_string());
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let body = text.split("\n\nUsage").next().unwrap_or_default();
            let message = body
                .trim_start_matches("error: ")
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("{}", serde_json::json!({"error": "usage", "message": message}));
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": e.kind(), "message": e.to_string()}));
            1
        }
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", text.trim_end()).and_then(|_| out.flush());
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Train { config, resume } => {
            let summary = cmd_train(&config, resume)?;
            emit(&serde_json::to_string(&summary)?);
        }
        Command::Generate {
            checkpoint,
            input,
            vocab,
            out,
            k,
            seed,
        } => cmd_generate(&checkpoint, &input, &vocab, &out, k, seed)?,
        Command::Eval {
            predictions,
            references,
            out,
        } => {
            let results = cmd_eval(&predictions, &references)?;
            let text = serde_json::to_string_pretty(&results)?;
            match out {
                Some(p) => fs::write(&p, text + "\n").map_err(|e| Error::io(&p, e))?,
                None => emit(&text),
            }
        }
        Command::Gradcheck {
            hidden,
            feature_dim,
            vocab_size,
            seed,
            eps,
        } => {
            let shape = TinyShape {
                hidden,
                feature_dim,
                vocab_size,
                ..TinyShape::default()
            };
            emit(&serde_json::to_string_pretty(&cmd_gradcheck(shape, seed, eps)?)?);
        }
        Command::MakeCorpus {
            scenes,
            refs,
            feature_dim,
            stars,
            seed,
            out,
            vocab_out,
        } => {
            let spec = CorpusSpec {
                scenes,
                references_per_scene: refs,
                feature_dim,
                stars,
                seed,
            };
            cmd_make_corpus(&spec, &out, &vocab_out)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// train

/// Which architecture to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Plain,
    Vae,
    /// Coherence vectors replaced by zeros.
    AblationNc,
    /// Global topic vector replaced by zeros.
    AblationNg,
}

fn default_keep_last() -> usize {
    3
}

fn default_max_sentences() -> usize {
    DEFAULT_MAX_SENTENCES
}

fn default_max_words() -> usize {
    DEFAULT_MAX_WORDS
}

/// JSON run configuration. Relative paths resolve against the directory
/// holding the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub hidden: usize,
    #[serde(default)]
    pub coupling: CouplingWeights,
    #[serde(default = "default_max_sentences")]
    pub max_sentences: usize,
    #[serde(default = "default_max_words")]
    pub max_words: usize,
    pub train: TrainConfig,
    pub train_data: PathBuf,
    /// Fixed vocabulary file; built from the training data when absent.
    #[serde(default)]
    pub vocabulary: Option<PathBuf>,
    /// Cap for a vocabulary built from the data.
    #[serde(default)]
    pub max_vocab: Option<usize>,
    pub output_dir: PathBuf,
    /// Epoch checkpoints to retain.
    #[serde(default = "default_keep_last")]
    pub keep_last: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.train_data);
        resolve(&mut cfg.output_dir);
        if let Some(v) = cfg.vocabulary.as_mut() {
            resolve(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden must be positive".into()));
        }
        if self.keep_last == 0 {
            return Err(Error::Config("keep_last must be at least 1".into()));
        }
        if self.mode != Mode::Vae && self.train.kl_anneal_epochs.is_some() {
            return Err(Error::Config("kl_anneal_epochs only applies to mode `vae`".into()));
        }
        self.train.validate()
    }

    pub fn model_config(&self, feature_dim: usize, vocab_size: usize, stars: bool) -> ModelConfig {
        ModelConfig {
            max_sentences: self.max_sentences,
            max_words: self.max_words,
            coupling: self.coupling,
            no_coherence: self.mode == Mode::AblationNc,
            no_global: self.mode == Mode::AblationNg,
            stars,
            vae: self.mode == Mode::Vae,
            ..ModelConfig::new(feature_dim, self.hidden, vocab_size)
        }
    }
}

/// What `train` reports on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct TrainSummary {
    pub epochs: usize,
    pub final_loss: Option<f64>,
    pub final_word_ce_per_token: Option<f64>,
    pub checkpoint: PathBuf,
}

pub fn epoch_checkpoint_name(epoch: usize) -> String {
    format!("checkpoint-epoch-{epoch:04}.pgck")
}

/// Epoch checkpoints in `dir`, oldest first.
fn epoch_checkpoints(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(epoch) = name
            .strip_prefix("checkpoint-epoch-")
            .and_then(|n| n.strip_suffix(".pgck"))
            .and_then(|n| n.parse().ok())
        {
            found.push((epoch, path));
        }
    }
    found.sort();
    Ok(found)
}

pub fn cmd_train(config_path: &Path, resume: bool) -> Result<TrainSummary> {
    let cfg = RunConfig::load(config_path)?;
    let fixed_vocab = cfg.vocabulary.as_deref().map(Vocabulary::load).transpose()?;
    let data = load_dataset(
        &cfg.train_data,
        &LoadOptions {
            vocabulary: fixed_vocab.as_ref(),
            max_sentences: cfg.max_sentences,
            max_words: cfg.max_words,
            max_vocab: cfg.max_vocab,
            ..LoadOptions::default()
        },
    )?;
    let feature_dim = data
        .feature_dim()
        .ok_or_else(|| Error::Config(format!("{} has no samples", cfg.train_data.display())))?;
    let model_config = cfg.model_config(feature_dim, data.vocabulary.len(), data.uses_stars());
    model_config.validate()?;

    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let vocab_path = out.join("vocab.txt");
    let metrics_path = out.join("metrics.jsonl");

    let mut trainer = match epoch_checkpoints(out)?.pop() {
        Some((_, path)) if resume => {
            let ck = Checkpoint::load(&path)?;
            if ck.model != model_config {
                return Err(Error::Config(format!(
                    "{} was trained with a different model configuration",
                    path.display()
                )));
            }
            let mut expected = ck.train.clone();
            expected.epochs = cfg.train.epochs;
            if expected != cfg.train {
                return Err(Error::Config(format!(
                    "{} was trained with different settings; only `epochs` may change on resume",
                    path.display()
                )));
            }
            if Vocabulary::load(&vocab_path)? != data.vocabulary {
                return Err(Error::Config("vocabulary differs from the resumed run".into()));
            }
            let mut t = ck.into_trainer()?;
            t.config.epochs = cfg.train.epochs;
            t
        }
        _ => {
            let model = ParagraphModel::new(model_config, cfg.train.seed)?;
            let t = Trainer::new(model, cfg.train.clone())?;
            data.vocabulary.save(&vocab_path)?;
            File::create(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
            for (_, stale) in epoch_checkpoints(out)? {
                fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
            }
            t
        }
    };

    let mut log = OpenOptions::new()
        .append(true)
        .create(true)
        .open(&metrics_path)
        .map_err(|e| Error::io(&metrics_path, e))?;
    let mut last = None;
    while trainer.epoch < trainer.config.epochs {
        let entry = trainer.run_epoch(&data.samples)?;
        writeln!(log, "{}", serde_json::to_string(&entry)?).map_err(|e| Error::io(&metrics_path, e))?;
        Checkpoint::from_trainer(&trainer).save(&out.join(epoch_checkpoint_name(trainer.epoch)))?;
        let existing = epoch_checkpoints(out)?;
        let excess = existing.len().saturating_sub(cfg.keep_last);
        for (_, stale) in &existing[..excess] {
            fs::remove_file(stale).map_err(|e| Error::io(stale, e))?;
        }
        last = Some(entry);
    }
    let final_path = out.join("final.pgck");
    Checkpoint::from_trainer(&trainer).save(&final_path)?;
    Ok(TrainSummary {
        epochs: trainer.epoch,
        final_loss: last.as_ref().map(|l| l.loss),
        final_word_ce_per_token: last.as_ref().map(|l| l.word_ce_per_token),
        checkpoint: final_path,
    })
}

// ---------------------------------------------------------------------------
// generate

#[derive(Debug, Deserialize)]
struct InputRecord {
    #[serde(default)]
    id: Option<String>,
    features: Vec<f64>,
    #[serde(default)]
    stars: Option<u8>,
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    /// Index of the draw among the paragraphs generated for `id`.
    pub sample: usize,
    pub sentences: Vec<Vec<String>>,
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, rec));
    }
    Ok(out)
}

/// Decodes paragraphs for every distinct input id. A plain model emits one
/// greedy paragraph; a variational model emits `k`, each greedy under its own
/// prior latent draw. Draws come from one stream seeded with `seed`, consumed
/// in input order.
pub fn generate_predictions(
    model: &ParagraphModel,
    vocab: &Vocabulary,
    inputs: &[(String, Vec<f64>, Option<u8>)],
    k: usize,
    seed: u64,
) -> Result<Vec<Prediction>> {
    if vocab.len() != model.config.vocab_size {
        return Err(Error::Config(format!(
            "vocabulary has {} tokens but the model expects {}",
            vocab.len(),
            model.config.vocab_size
        )));
    }
    if k == 0 {
        return Err(Error::contract("k must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (id, features, stars) in inputs {
        let draws = if model.config.vae { k } else { 1 };
        for sample in 0..draws {
            let paragraph = if model.config.vae {
                let z = vae::standard_normal(&mut rng, model.config.hidden);
                vae::decode_with_latent(model, &z, features, *stars, DecodeMode::Greedy)?
            } else {
                model.generate(features, *stars, DecodeMode::Greedy)?
            };
            out.push(Prediction {
                id: id.clone(),
                sample,
                sentences: paragraph
                    .sentences
                    .iter()
                    .map(|s| vocab.decode(s))
                    .collect::<Result<_>>()?,
            });
        }
    }
    Ok(out)
}

pub fn cmd_generate(checkpoint: &Path, input: &Path, vocab: &Path, out: &Path, k: usize, seed: u64) -> Result<()> {
    let model = Checkpoint::load(checkpoint)?.into_model()?;
    let vocab = Vocabulary::load(vocab)?;
    let mut seen = HashSet::new();
    let mut inputs = Vec::new();
    for (index, (line, rec)) in read_jsonl::<InputRecord>(input)?.into_iter().enumerate() {
        let err = |message: String| Error::Parse {
            path: input.display().to_string(),
            line,
            message,
        };
        if rec.features.len() != model.config.feature_dim {
            return Err(err(format!(
                "expected {} features (checkpoint width), found {}",
                model.config.feature_dim,
                rec.features.len()
            )));
        }
        if model.config.stars && rec.stars.is_none() {
            return Err(err("the model is star-conditioned but `stars` is missing".into()));
        }
        let id = rec.id.unwrap_or_else(|| index.to_string());
        // Multi-reference datasets repeat an id per reference.
        if seen.insert(id.clone()) {
            inputs.push((id, rec.features, rec.stars.filter(|_| model.config.stars)));
        }
    }
    let predictions = generate_predictions(&model, &vocab, &inputs, k, seed)?;
    let mut w = BufWriter::new(File::create(out).map_err(|e| Error::io(out, e))?);
    for p in &predictions {
        writeln!(w, "{}", serde_json::to_string(p)?).map_err(|e| Error::io(out, e))?;
    }
    w.flush().map_err(|e| Error::io(out, e))
}

// ---------------------------------------------------------------------------
// eval

#[derive(Debug, Deserialize)]
struct ReferenceRecord {
    id: Option<String>,
    sentences: Vec<Vec<String>>,
}

/// Flat metric table written by `eval`. `cider` is null when the references
/// hold fewer than two distinct paragraphs; `self_bleu_4` is null when no
/// id has two or more samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResults {
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_3: f64,
    pub bleu_4: f64,
    pub cider: Option<f64>,
    pub self_bleu_4: Option<f64>,
    pub pairs: usize,
}

/// Scores the first sample per id against that id's reference set, and the
/// spread of samples per id with self-BLEU-4.
pub fn evaluate_predictions(
    predictions: &[Prediction],
    references: &[(String, Vec<Vec<String>>)],
) -> Result<EvalResults> {
    let mut interner: HashMap<String, usize> = HashMap::new();
    let mut flat = |sentences: &[Vec<String>]| -> Vec<usize> {
        sentences
            .iter()
            .flatten()
            .map(|t| {
                let next = interner.len();
                *interner.entry(t.clone()).or_insert(next)
            })
            .collect()
    };
    let mut refs: BTreeMap<&str, Vec<Vec<usize>>> = BTreeMap::new();
    for (id, sentences) in references {
        refs.entry(id).or_default().push(flat(sentences));
    }
    let mut preds: BTreeMap<&str, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    for p in predictions {
        if preds.entry(&p.id).or_default().insert(p.sample, flat(&p.sentences)).is_some() {
            return Err(Error::contract(format!("duplicate prediction for id `{}` sample {}", p.id, p.sample)));
        }
    }
    let missing: Vec<&str> = refs.keys().filter(|id| !preds.contains_key(*id)).copied().collect();
    let extra: Vec<&str> = preds.keys().filter(|id| !refs.contains_key(*id)).copied().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::contract(format!(
            "prediction and reference ids differ; without predictions: [{}]; without references: [{}]",
            missing.join(", "),
            extra.join(", ")
        )));
    }
    if refs.is_empty() {
        return Err(Error::contract("no references to evaluate"));
    }
    let corpus = refs
        .iter()
        .map(|(id, r)| {
            let first = preds[id].values().next().cloned().unwrap_or_default();
            EvalPair::new(first, r.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let spread: Vec<f64> = preds
        .values()
        .filter(|samples| samples.len() >= 2)
        .map(|samples| self_bleu(&samples.values().cloned().collect::<Vec<_>>(), 4))
        .collect::<Result<_>>()?;
    Ok(EvalResults {
        bleu_1: bleu(&corpus, 1)?,
        bleu_2: bleu(&corpus, 2)?,
        bleu_3: bleu(&corpus, 3)?,
        bleu_4: bleu(&corpus, 4)?,
        cider: cider(&corpus).ok(),
        self_bleu_4: (!spread.is_empty()).then(|| spread.iter().sum::<f64>() / spread.len() as f64),
        pairs: corpus.len(),
    })
}

pub fn cmd_eval(predictions: &Path, references: &Path) -> Result<EvalResults> {
    let preds: Vec<Prediction> = read_jsonl(predictions)?.into_iter().map(|(_, p)| p).collect();
    let refs: Vec<(String, Vec<Vec<String>>)> = read_jsonl::<ReferenceRecord>(references)?
        .into_iter()
        .enumerate()
        .map(|(i, (_, r))| (r.id.unwrap_or_else(|| i.to_string()), r.sentences))
        .collect();
    evaluate_predictions(&preds, &refs)
}

// ---------------------------------------------------------------------------
// gradcheck, make-corpus

#[derive(Debug, Clone, Serialize)]
pub struct GradcheckOutput {
    #[serde(flatten)]
    pub model: TinyGradCheck,
    pub primitives: BTreeMap<String, CheckSummary>,
}

pub fn cmd_gradcheck(shape: TinyShape, seed: u64, eps: f64) -> Result<GradcheckOutput> {
    Ok(GradcheckOutput {
        model: tiny_gradcheck(shape, seed, eps)?,
        primitives: primitive_gradchecks(seed)?.into_iter().collect(),
    })
}

pub fn cmd_make_corpus(spec: &CorpusSpec, out: &Path, vocab_out: &Path) -> Result<()> {
    let data = synthetic_corpus(spec)?;
    save_dataset(out, &data.samples, &data.vocabulary)?;
    data.vocabulary.save(vocab_out)
}
