//! Sentence generation: coherence vectors, the coupling unit, gating with the
//! global topic, and the two-layer word RNN.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::Var;
use crate::config::CouplingWeights;
use crate::corpus::{BOS, EOS};
use crate::error::{Error, Result};
use crate::nn::{Activation, Dense, Embedding, Gru};
use crate::params::{Binder, ParamStore};

#[derive(Debug, Clone)]
pub struct SentenceNet {
    pub coherence_hidden: Dense,
    pub coherence_out: Dense,
    pub gate: Gru,
    pub word1: Gru,
    pub word2: Gru,
    pub output: Dense,
    pub embedding: Embedding,
}

/// Word selection rule.
#[derive(Debug)]
pub enum Decoder<'r> {
    /// Argmax, ties broken by the lowest token id.
    Greedy,
    /// Draw from the word distribution at temperature 1.
    Sample(&'r mut ChaCha8Rng),
}

/// A generated sentence.
#[derive(Debug, Clone)]
pub struct GeneratedSentence<'t> {
    /// Emitted tokens, EOS excluded.
    pub tokens: Vec<usize>,
    /// Top-layer hidden state at the final step.
    pub last_hidden: Var<'t>,
    /// One distribution over the vocabulary per step taken.
    pub distributions: Vec<Vec<f64>>,
}

/// Teacher-forced pass over one sentence.
#[derive(Debug, Clone)]
pub struct ForcedSentence<'t> {
    /// Log-probabilities over the vocabulary, one per target.
    pub log_probs: Vec<Var<'t>>,
    pub last_hidden: Var<'t>,
}

impl SentenceNet {
    pub fn new(hidden: usize, vocab_size: usize) -> Self {
        SentenceNet {
            coherence_hidden: Dense::new("sentence.coherence1", hidden, hidden, Activation::Selu),
            coherence_out: Dense::new("sentence.coherence2", hidden, hidden, Activation::Identity),
            gate: Gru::new("sentence.gate", hidden, hidden),
            word1: Gru::new("sentence.word1", 2 * hidden, hidden),
            word2: Gru::new("sentence.word2", hidden, hidden),
            output: Dense::new("sentence.output", hidden, vocab_size, Activation::Softmax),
            embedding: Embedding::new("sentence.embedding", vocab_size, hidden),
        }
    }

    pub fn hidden(&self) -> usize {
        self.gate.hidden
    }

    pub fn vocab_size(&self) -> usize {
        self.output.output
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        self.coherence_hidden.init(store, rng);
        self.coherence_out.init(store, rng);
        self.gate.init(store, rng);
        self.word1.init(store, rng);
        self.word2.init(store, rng);
        self.output.init(store, rng);
        self.embedding.init(store, rng);
    }

    /// Maps the last word-RNN hidden state of a sentence into topic space.
    pub fn coherence<'t>(&self, b: &Binder<'t, '_>, last_hidden: Var<'t>) -> Result<Var<'t>> {
        let h = self.coherence_hidden.forward(b, last_hidden)?;
        self.coherence_out.forward(b, h)
    }

    /// One GRU step with the coupled topic as input and `G` as hidden state.
    pub fn gate_with_global<'t>(&self, b: &Binder<'t, '_>, coupled: Var<'t>, global: Var<'t>) -> Result<Var<'t>> {
        self.gate.step(b, coupled, global)
    }

    /// One word-RNN step: returns new hidden states and log-probabilities.
    fn word_step<'t>(
        &self,
        b: &Binder<'t, '_>,
        prev: usize,
        topic: Var<'t>,
        h1: Var<'t>,
        h2: Var<'t>,
    ) -> Result<(Var<'t>, Var<'t>, Var<'t>)> {
        let x = self.embedding.lookup(b, prev)?.concat(topic);
        let h1 = self.word1.step(b, x, h1)?;
        let h2 = self.word2.step(b, h1, h2)?;
        let log_probs = self.output.pre_activation(b, h2)?.log_softmax();
        Ok((h1, h2, log_probs))
    }

    fn check_topic(&self, topic: &Var<'_>) -> Result<()> {
        if topic.numel() != self.hidden() {
            return Err(Error::contract(format!(
                "topic vector has length {}, expected {}",
                topic.numel(),
                self.hidden()
            )));
        }
        Ok(())
    }

    /// Decodes one sentence from the gated topic `topic`.
    pub fn generate<'t>(
        &self,
        b: &Binder<'t, '_>,
        topic: Var<'t>,
        max_words: usize,
        decoder: &mut Decoder<'_>,
    ) -> Result<GeneratedSentence<'t>> {
        self.check_topic(&topic)?;
        let tape = b.tape();
        let mut h1 = tape.zeros(self.hidden());
        let mut h2 = tape.zeros(self.hidden());
        let mut prev = BOS;
        let mut tokens = Vec::new();
        let mut distributions = Vec::new();
        for _ in 0..max_words {
            let (n1, n2, log_probs) = self.word_step(b, prev, topic, h1, h2)?;
            h1 = n1;
            h2 = n2;
            let probs: Vec<f64> = log_probs.to_vec().iter().map(|lp| lp.exp()).collect();
            let token = match decoder {
                Decoder::Greedy => argmax(&probs),
                Decoder::Sample(rng) => sample(&probs, rng),
            };
            distributions.push(probs);
            if token == EOS {
                break;
            }
            tokens.push(token);
            prev = token;
        }
        Ok(GeneratedSentence {
            tokens,
            last_hidden: h2,
            distributions,
        })
    }

    /// Runs the word RNN on ground-truth `targets` (EOS included).
    pub fn teacher_forced<'t>(&self, b: &Binder<'t, '_>, topic: Var<'t>, targets: &[usize]) -> Result<ForcedSentence<'t>> {
        self.check_topic(&topic)?;
        if targets.is_empty() {
            return Err(Error::contract("teacher forcing needs at least one target"));
        }
        let tape = b.tape();
        let mut h1 = tape.zeros(self.hidden());
        let mut h2 = tape.zeros(self.hidden());
        let mut prev = BOS;
        let mut log_probs = Vec::with_capacity(targets.len());
        for &target in targets {
            if target >= self.vocab_size() {
                return Err(Error::TokenOutOfRange {
                    id: target,
                    size: self.vocab_size(),
                });
            }
            let (n1, n2, lp) = self.word_step(b, prev, topic, h1, h2)?;
            h1 = n1;
            h2 = n2;
            log_probs.push(lp);
            prev = target;
        }
        Ok(ForcedSentence {
            log_probs,
            last_hidden: h2,
        })
    }
}

/// `(α T + β C) / (α + β)`: the minimiser of `α‖T − x‖² + β‖C − x‖²`.
pub fn couple<'t>(topic: Var<'t>, coherence: Var<'t>, w: CouplingWeights) -> Result<Var<'t>> {
    w.validate()?;
    if topic.numel() != coherence.numel() {
        return Err(Error::contract("couple: topic and coherence widths differ"));
    }
    let total = w.alpha + w.beta;
    Ok(topic.scale(w.alpha / total) + coherence.scale(w.beta / total))
}

/// [`couple`] on plain vectors.
pub fn couple_values(topic: &[f64], coherence: &[f64], w: CouplingWeights) -> Result<Vec<f64>> {
    w.validate()?;
    if topic.len() != coherence.len() {
        return Err(Error::contract("couple: topic and coherence widths differ"));
    }
    let total = w.alpha + w.beta;
    Ok(topic
        .iter()
        .zip(coherence)
        .map(|(t, c)| (w.alpha * t + w.beta * c) / total)
        .collect())
}

fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    best
}

fn sample(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
