//! Topic generation: the sentence-level RNN that emits one topic vector and
//! one continue-probability per sentence, and the global topic vector.

use rand::Rng;

use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::nn::{Activation, Dense, Embedding, Gru};
use crate::params::{Binder, ParamStore};

/// Number of star ratings supported for conditioning.
pub const STAR_LEVELS: usize = 5;

/// Sentence-RNN, stop head, two-layer topic head and optional star embedding.
#[derive(Debug, Clone)]
pub struct TopicNet {
    pub rnn: Gru,
    pub stop: Dense,
    pub topic_hidden: Dense,
    pub topic_out: Dense,
    pub stars: Option<Embedding>,
}

/// Values produced by one sentence-RNN step.
#[derive(Debug, Clone, Copy)]
pub struct TopicStep<'t> {
    pub hidden: Var<'t>,
    /// Pre-sigmoid score of CONTINUE.
    pub stop_logit: Var<'t>,
    pub topic: Var<'t>,
}

impl TopicStep<'_> {
    pub fn continue_prob(&self) -> f64 {
        crate::autodiff::sigmoid(self.stop_logit.item())
    }
}

/// Per-image output of the topic net.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicBundle {
    pub topics: Vec<Vec<f64>>,
    pub continue_probs: Vec<f64>,
    pub global_topic: Vec<f64>,
    pub weights: Vec<f64>,
}

/// How many steps the sentence-RNN runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopicSteps {
    /// Continue while `u_i > 0.5`, at most `max` steps.
    Free { max: usize },
    /// Exactly `n` steps (teacher forcing against an `n`-sentence paragraph).
    Forced(usize),
}

impl TopicNet {
    pub fn new(feature_dim: usize, hidden: usize, stars: bool) -> Self {
        TopicNet {
            rnn: Gru::new("topic.rnn", feature_dim, hidden),
            stop: Dense::new("topic.stop", hidden, 1, Activation::Sigmoid),
            topic_hidden: Dense::new("topic.head1", hidden, hidden, Activation::Selu),
            topic_out: Dense::new("topic.head2", hidden, hidden, Activation::Identity),
            stars: stars.then(|| Embedding::new("topic.stars", STAR_LEVELS, hidden)),
        }
    }

    pub fn hidden(&self) -> usize {
        self.rnn.hidden
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        self.rnn.init(store, rng);
        self.stop.init(store, rng);
        self.topic_hidden.init(store, rng);
        self.topic_out.init(store, rng);
        if let Some(e) = &self.stars {
            e.init(store, rng);
        }
    }

    /// Initial sentence-RNN state: the star embedding when a rating is given,
    /// zeros otherwise.
    pub fn initial_hidden<'t>(&self, b: &Binder<'t, '_>, star: Option<u8>) -> Result<Var<'t>> {
        match (star, &self.stars) {
            (None, _) => Ok(b.tape().zeros(self.hidden())),
            (Some(s), Some(table)) => {
                if !(1..=STAR_LEVELS as u8).contains(&s) {
                    return Err(Error::contract(format!("star rating must be 1..=5, got {s}")));
                }
                table.lookup(b, usize::from(s - 1))
            }
            (Some(_), None) => Err(Error::contract(
                "star rating given to a model without star conditioning",
            )),
        }
    }

    /// One recurrence step with the pooled features as input.
    pub fn step<'t>(&self, b: &Binder<'t, '_>, features: Var<'t>, hidden: Var<'t>) -> Result<TopicStep<'t>> {
        let hidden = self.rnn.step(b, features, hidden)?;
        let stop_logit = self.stop.pre_activation(b, hidden)?.pick(0);
        let topic = self
            .topic_out
            .forward(b, self.topic_hidden.forward(b, hidden)?)?;
        Ok(TopicStep {
            hidden,
            stop_logit,
            topic,
        })
    }

    /// Unrolls the sentence-RNN from `hidden`.
    ///
    /// In free mode the decision after step `i` controls whether step `i + 1`
    /// happens, so at least one step is always emitted.
    pub fn unroll<'t>(
        &self,
        b: &Binder<'t, '_>,
        features: Var<'t>,
        mut hidden: Var<'t>,
        steps: TopicSteps,
    ) -> Result<Vec<TopicStep<'t>>> {
        if features.numel() != self.rnn.input {
            return Err(Error::contract(format!(
                "feature vector has length {}, model expects {}",
                features.numel(),
                self.rnn.input
            )));
        }
        let (cap, forced) = match steps {
            TopicSteps::Free { max } => (max, false),
            TopicSteps::Forced(n) => (n, true),
        };
        if cap == 0 {
            return Err(Error::contract("topic net needs at least one step"));
        }
        let mut out = Vec::with_capacity(cap);
        for _ in 0..cap {
            let step = self.step(b, features, hidden)?;
            hidden = step.hidden;
            out.push(step);
            if !forced && step.continue_prob() <= 0.5 {
                break;
            }
        }
        Ok(out)
    }
}

/// Runs the topic net on `features` and returns plain values.
pub fn run_topic_net(
    net: &TopicNet,
    store: &ParamStore,
    features: &[f64],
    max_sentences: usize,
    star: Option<u8>,
) -> Result<TopicBundle> {
    if max_sentences == 0 {
        return Err(Error::contract("max_sentences must be at least 1"));
    }
    let tape = Tape::inference();
    let b = Binder::new(&tape, store);
    let h0 = net.initial_hidden(&b, star)?;
    let v = tape.vector(features.to_vec());
    let steps = net.unroll(&b, v, h0, TopicSteps::Free { max: max_sentences })?;
    let topics: Vec<Var<'_>> = steps.iter().map(|s| s.topic).collect();
    let (g, weights) = global_topic(&topics)?;
    Ok(TopicBundle {
        topics: topics.iter().map(Var::to_vec).collect(),
        continue_probs: steps.iter().map(TopicStep::continue_prob).collect(),
        global_topic: g.to_vec(),
        weights: weights.iter().map(Var::item).collect(),
    })
}

/// Norm-weighted combination `G = Σ α_i T_i` with `α_i = ‖T_i‖ / Σ_j ‖T_j‖`.
///
/// When every topic is the zero vector, `G = 0` and the weights are uniform.
pub fn global_topic<'t>(topics: &[Var<'t>]) -> Result<(Var<'t>, Vec<Var<'t>>)> {
    let first = topics
        .first()
        .ok_or_else(|| Error::contract("global topic of an empty topic list"))?;
    let tape = first.tape();
    let norms: Vec<Var<'t>> = topics.iter().map(|t| t.norm()).collect();
    let mut total = norms[0];
    for n in &norms[1..] {
        total = total + *n;
    }
    if total.item() == 0.0 {
        let uniform = 1.0 / topics.len() as f64;
        let weights = topics.iter().map(|_| tape.scalar(uniform)).collect();
        return Ok((tape.zeros(first.numel()), weights));
    }
    let weights: Vec<Var<'t>> = norms.iter().map(|n| n.div_scalar(total)).collect();
    let mut g = topics[0].mul_scalar(weights[0]);
    for (t, a) in topics.iter().zip(&weights).skip(1) {
        g = g + t.mul_scalar(*a);
    }
    Ok((g, weights))
}

/// [`global_topic`] on plain vectors: returns `(G, α)`.
pub fn global_topic_values(topics: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    if topics.is_empty() {
        return Err(Error::contract("global topic of an empty topic list"));
    }
    let width = topics[0].len();
    if width == 0 || topics.iter().any(|t| t.len() != width) {
        return Err(Error::contract("topic vectors must share a positive width"));
    }
    let tape = Tape::inference();
    let vars: Vec<Var<'_>> = topics.iter().map(|t| tape.vector(t.clone())).collect();
    let (g, w) = global_topic(&vars)?;
    Ok((g.to_vec(), w.iter().map(Var::item).collect()))
}
