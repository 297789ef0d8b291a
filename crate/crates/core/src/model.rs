//! The full paragraph generator: topic net feeding the sentence net, plus
//! the optional variational heads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{Tape, Var};
use crate::config::ModelConfig;
use crate::corpus::EOS;
use crate::error::{Error, Result};
use crate::params::{Binder, ParamStore};
use crate::sentence::{couple, Decoder, SentenceNet};
use crate::topic::{global_topic, TopicNet, TopicSteps};
use crate::vae::VaeHeads;

/// Layer descriptors derived from a [`ModelConfig`].
#[derive(Debug, Clone)]
pub struct Layers {
    pub topic: TopicNet,
    pub sentence: SentenceNet,
    pub vae: Option<VaeHeads>,
}

impl Layers {
    pub fn new(config: &ModelConfig) -> Self {
        Layers {
            topic: TopicNet::new(config.feature_dim, config.hidden, config.stars),
            sentence: SentenceNet::new(config.hidden, config.vocab_size),
            vae: config
                .vae
                .then(|| VaeHeads::new(config.hidden, config.feature_dim)),
        }
    }
}

/// Word selection for generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    Greedy,
    /// Temperature-1 sampling from a seeded stream.
    Sample { seed: u64 },
}

/// A generated paragraph and what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedParagraph {
    /// Token ids per sentence, EOS excluded.
    pub sentences: Vec<Vec<usize>>,
    pub continue_probs: Vec<f64>,
    pub topics: Vec<Vec<f64>>,
    pub global_topic: Vec<f64>,
    /// Gated topic vectors `T′_i` fed to the word RNN.
    pub gated_topics: Vec<Vec<f64>>,
    /// How many times a coherence vector was computed from a sentence.
    pub coherence_reads: usize,
}

impl GeneratedParagraph {
    pub fn flat_tokens(&self) -> Vec<usize> {
        self.sentences.concat()
    }
}

/// Teacher-forced outputs over one ground-truth paragraph.
#[derive(Debug, Clone)]
pub struct ForcedOutputs<'t> {
    /// CONTINUE logits, one per sentence.
    pub stop_logits: Vec<Var<'t>>,
    /// Log-probabilities per sentence per target (EOS included).
    pub word_log_probs: Vec<Vec<Var<'t>>>,
    /// Targets aligned with `word_log_probs`.
    pub targets: Vec<Vec<usize>>,
    /// Top word-RNN hidden state after the final EOS target.
    pub last_hidden: Var<'t>,
}

/// Input of one forward pass.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a> {
    pub features: &'a [f64],
    pub stars: Option<u8>,
}

/// Paragraph model: configuration plus parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParagraphModel {
    pub config: ModelConfig,
    pub params: ParamStore,
}

impl ParagraphModel {
    /// Fresh model with parameters drawn from `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = Layers::new(&config);
        let mut params = ParamStore::new();
        layers.topic.init(&mut params, &mut rng);
        layers.sentence.init(&mut params, &mut rng);
        if let Some(v) = &layers.vae {
            v.init(&mut params, &mut rng);
        }
        Ok(ParagraphModel { config, params })
    }

    /// Wraps existing parameters, checking names and shapes.
    pub fn from_params(config: ModelConfig, params: ParamStore) -> Result<Self> {
        config.validate()?;
        let reference = ParagraphModel::new(config.clone(), 0)?;
        for (name, t) in reference.params.iter() {
            match params.get(name) {
                None => {
                    return Err(Error::Checkpoint(format!("missing parameter `{name}`")))
                }
                Some(p) if p.shape() != t.shape() => {
                    return Err(Error::Checkpoint(format!(
                        "parameter `{name}` has shape {:?}, expected {:?}",
                        p.shape(),
                        t.shape()
                    )))
                }
                _ => {}
            }
        }
        if let Some(extra) = params.names().find(|n| !reference.params.contains(n)) {
            return Err(Error::Checkpoint(format!("unexpected parameter `{extra}`")));
        }
        Ok(ParagraphModel { config, params })
    }

    pub fn layers(&self) -> Layers {
        Layers::new(&self.config)
    }

    fn check_input(&self, input: &ModelInput<'_>) -> Result<()> {
        if input.features.len() != self.config.feature_dim {
            return Err(Error::contract(format!(
                "feature vector has length {}, model expects {}",
                input.features.len(),
                self.config.feature_dim
            )));
        }
        Ok(())
    }

    /// Initial sentence-RNN state, optionally primed with an injected latent
    /// vector (one sentence-RNN step whose input is `prime`).
    pub(crate) fn start_state<'t>(
        &self,
        layers: &Layers,
        b: &Binder<'t, '_>,
        stars: Option<u8>,
        prime: Option<Var<'t>>,
    ) -> Result<Var<'t>> {
        let h0 = layers.topic.initial_hidden(b, stars)?;
        match prime {
            None => Ok(h0),
            Some(p) => layers.topic.rnn.step(b, p, h0),
        }
    }

    /// Generates a paragraph for `input`, optionally primed by `prime`.
    pub fn generate_with<'t>(
        &self,
        b: &Binder<'t, '_>,
        input: ModelInput<'_>,
        prime: Option<Var<'t>>,
        mode: DecodeMode,
    ) -> Result<GeneratedParagraph> {
        self.check_input(&input)?;
        let layers = self.layers();
        let tape = b.tape();
        let h0 = self.start_state(&layers, b, input.stars, prime)?;
        let v = tape.vector(input.features.to_vec());
        let steps = layers.topic.unroll(
            b,
            v,
            h0,
            TopicSteps::Free {
                max: self.config.max_sentences,
            },
        )?;
        let topics: Vec<Var<'t>> = steps.iter().map(|s| s.topic).collect();
        let (mut g, _) = global_topic(&topics)?;
        if self.config.no_global {
            g = tape.zeros(self.config.hidden);
        }

        let mut rng = match mode {
            DecodeMode::Sample { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            DecodeMode::Greedy => None,
        };
        let mut decoder = match rng.as_mut() {
            Some(r) => Decoder::Sample(r),
            None => Decoder::Greedy,
        };

        let mut coherence = tape.zeros(self.config.hidden);
        let mut coherence_reads = 0;
        let mut sentences = Vec::with_capacity(topics.len());
        let mut gated_topics = Vec::with_capacity(topics.len());
        for (i, topic) in topics.iter().enumerate() {
            let coupled = couple(*topic, coherence, self.config.coupling)?;
            let gated = layers.sentence.gate_with_global(b, coupled, g)?;
            let s = layers
                .sentence
                .generate(b, gated, self.config.max_words, &mut decoder)?;
            if !self.config.no_coherence && i + 1 < topics.len() {
                coherence = layers.sentence.coherence(b, s.last_hidden)?;
                coherence_reads += 1;
            }
            gated_topics.push(gated.to_vec());
            sentences.push(s.tokens);
        }
        Ok(GeneratedParagraph {
            sentences,
            continue_probs: steps.iter().map(|s| s.continue_prob()).collect(),
            topics: topics.iter().map(Var::to_vec).collect(),
            global_topic: g.to_vec(),
            gated_topics,
            coherence_reads,
        })
    }

    /// Generates a paragraph for a pooled feature vector.
    pub fn generate(&self, features: &[f64], stars: Option<u8>, mode: DecodeMode) -> Result<GeneratedParagraph> {
        let tape = Tape::inference();
        let b = Binder::new(&tape, &self.params);
        self.generate_with(&b, ModelInput { features, stars }, None, mode)
    }

    /// Teacher-forced pass over `sentences` (token ids without EOS).
    pub fn forward_forced<'t>(
        &self,
        b: &Binder<'t, '_>,
        input: ModelInput<'_>,
        sentences: &[Vec<usize>],
        prime: Option<Var<'t>>,
    ) -> Result<ForcedOutputs<'t>> {
        self.check_input(&input)?;
        if sentences.is_empty() {
            return Err(Error::contract("paragraph has no sentences"));
        }
        if sentences.len() > self.config.max_sentences {
            return Err(Error::contract(format!(
                "paragraph has {} sentences, limit is {}",
                sentences.len(),
                self.config.max_sentences
            )));
        }
        let layers = self.layers();
        let tape = b.tape();
        let h0 = self.start_state(&layers, b, input.stars, prime)?;
        let v = tape.vector(input.features.to_vec());
        let steps = layers
            .topic
            .unroll(b, v, h0, TopicSteps::Forced(sentences.len()))?;
        let topics: Vec<Var<'t>> = steps.iter().map(|s| s.topic).collect();
        let (mut g, _) = global_topic(&topics)?;
        if self.config.no_global {
            g = tape.zeros(self.config.hidden);
        }

        let mut coherence = tape.zeros(self.config.hidden);
        let mut word_log_probs = Vec::with_capacity(sentences.len());
        let mut targets = Vec::with_capacity(sentences.len());
        let mut last_hidden = None;
        for (i, (topic, sentence)) in topics.iter().zip(sentences).enumerate() {
            let mut t = sentence.clone();
            t.push(EOS);
            let coupled = couple(*topic, coherence, self.config.coupling)?;
            let gated = layers.sentence.gate_with_global(b, coupled, g)?;
            let forced = layers.sentence.teacher_forced(b, gated, &t)?;
            if !self.config.no_coherence && i + 1 < sentences.len() {
                coherence = layers.sentence.coherence(b, forced.last_hidden)?;
            }
            last_hidden = Some(forced.last_hidden);
            word_log_probs.push(forced.log_probs);
            targets.push(t);
        }
        Ok(ForcedOutputs {
            stop_logits: steps.iter().map(|s| s.stop_logit).collect(),
            word_log_probs,
            targets,
            last_hidden: last_hidden.expect("at least one sentence"),
        })
    }
}
