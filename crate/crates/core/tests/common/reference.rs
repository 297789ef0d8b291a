//! A second, tape-free implementation of the model's training objectives,
//! written directly from the model definition and generic over the scalar type.
//! Evaluated in double-double it gives finite differences accurate enough
//! to check gradients of order 1e-10.

use std::ops::{Add, Div, Mul, Neg, Sub};

use paragen::config::ModelConfig;
use paragen::corpus::{BOS, EOS};
use paragen::diagnostics::{tiny_sample, TinyShape};
use paragen::model::ModelInput;
use paragen::params::ParamStore;
use paragen::training::{paragraph_loss as tape_paragraph_loss, LossWeights};
use paragen::{vae, Binder, ParagraphModel, Tape};

use super::dd::Dd;

pub trait Real:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn of(x: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn value(self) -> f64;
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn value(self) -> f64 {
        self
    }
}

impl Real for Dd {
    fn of(x: f64) -> Self {
        Dd::new(x)
    }
    fn exp(self) -> Self {
        Dd::exp(self)
    }
    fn ln(self) -> Self {
        Dd::ln(self)
    }
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
    fn value(self) -> f64 {
        self.to_f64()
    }
}

type V<T> = Vec<T>;

fn sigmoid<T: Real>(x: T) -> T {
    T::of(1.0) / (T::of(1.0) + (-x).exp())
}

fn tanh<T: Real>(x: T) -> T {
    let e = (x + x).exp();
    (e - T::of(1.0)) / (e + T::of(1.0))
}

fn selu<T: Real>(x: T) -> T {
    const LAMBDA: f64 = 1.0507009873554805;
    const ALPHA: f64 = 1.6732632423543772;
    if x.value() > 0.0 {
        T::of(LAMBDA) * x
    } else {
        T::of(LAMBDA * ALPHA) * (x.exp() - T::of(1.0))
    }
}

/// `ln σ(x)` for moderate `x`.
fn log_sigmoid<T: Real>(x: T) -> T {
    -(T::of(1.0) + (-x).exp()).ln()
}

/// Parameters converted to the scalar type, looked up by name.
pub struct Weights<T> {
    map: std::collections::HashMap<String, (Vec<usize>, V<T>)>,
}

impl<T: Real> Weights<T> {
    pub fn from_store(store: &ParamStore, perturb: Option<(&str, usize, T)>) -> Self {
        let map = store
            .iter()
            .map(|(name, t)| {
                let mut data: V<T> = t.data().iter().map(|&x| T::of(x)).collect();
                if let Some((n, i, d)) = perturb {
                    if n == name {
                        data[i] = data[i] + d;
                    }
                }
                (name.to_string(), (t.shape().to_vec(), data))
            })
            .collect();
        Weights { map }
    }

    fn vec(&self, name: &str) -> &[T] {
        &self.map[name].1
    }

    fn matvec(&self, name: &str, x: &[T]) -> V<T> {
        let (shape, w) = &self.map[name];
        assert_eq!(shape[1], x.len(), "{name}");
        (0..shape[0])
            .map(|r| {
                let row = &w[r * shape[1]..(r + 1) * shape[1]];
                row.iter().zip(x).fold(T::of(0.0), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    fn dense(&self, prefix: &str, x: &[T]) -> V<T> {
        add(&self.matvec(&format!("{prefix}.weight"), x), self.vec(&format!("{prefix}.bias")))
    }

    fn row(&self, name: &str, r: usize) -> V<T> {
        let (shape, w) = &self.map[name];
        w[r * shape[1]..(r + 1) * shape[1]].to_vec()
    }

    /// `h' = (1 − z) ⊙ h + z ⊙ tanh(W_h x + U_h (r ⊙ h) + b_h)`.
    fn gru(&self, p: &str, x: &[T], h: &[T]) -> V<T> {
        let pre = |g: &str, hh: &[T]| {
            add(
                &add(&self.matvec(&format!("{p}.w_{g}"), x), &self.matvec(&format!("{p}.u_{g}"), hh)),
                self.vec(&format!("{p}.b_{g}")),
            )
        };
        let r: V<T> = pre("r", h).into_iter().map(sigmoid).collect();
        let z: V<T> = pre("z", h).into_iter().map(sigmoid).collect();
        let rh: V<T> = r.iter().zip(h).map(|(a, b)| *a * *b).collect();
        let cand: V<T> = pre("h", &rh).into_iter().map(tanh).collect();
        (0..h.len())
            .map(|i| (T::of(1.0) - z[i]) * h[i] + z[i] * cand[i])
            .collect()
    }
}

fn add<T: Real>(a: &[T], b: &[T]) -> V<T> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn norm<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::of(0.0), |acc, x| acc + *x * *x).sqrt()
}

fn log_softmax_at<T: Real>(logits: &[T], target: usize) -> T {
    let m = logits.iter().map(|x| x.value()).fold(f64::NEG_INFINITY, f64::max);
    let m = T::of(m);
    let total = logits.iter().fold(T::of(0.0), |acc, x| acc + (*x - m).exp());
    logits[target] - m - total.ln()
}

/// Outputs of one teacher-forced pass.
pub struct Forced<T> {
    pub loss: T,
    pub last_hidden: V<T>,
}

/// λ_s Σ BCE + λ_w Σ CE over `sentences` (EOS appended), starting the
/// sentence RNN from `h0`.
pub fn forced_loss<T: Real>(
    w: &Weights<T>,
    cfg: &ModelConfig,
    features: &[f64],
    sentences: &[Vec<usize>],
    h0: V<T>,
    lambda: (f64, f64),
) -> Forced<T> {
    let v: V<T> = features.iter().map(|&x| T::of(x)).collect();
    let s_count = sentences.len();
    let mut h = h0;
    let mut topics = Vec::new();
    let mut sentence_loss = T::of(0.0);
    for i in 0..s_count {
        h = w.gru("topic.rnn", &v, &h);
        let logit = w.dense("topic.stop", &h)[0];
        sentence_loss = sentence_loss
            - if i + 1 < s_count {
                log_sigmoid(logit)
            } else {
                log_sigmoid(-logit)
            };
        let hidden: V<T> = w.dense("topic.head1", &h).into_iter().map(selu).collect();
        topics.push(w.dense("topic.head2", &hidden));
    }

    let norms: V<T> = topics.iter().map(|t| norm(t)).collect();
    let total = norms.iter().fold(T::of(0.0), |a, n| a + *n);
    let hd = cfg.hidden;
    let mut global = vec![T::of(0.0); hd];
    if !cfg.no_global && total.value() != 0.0 {
        for (t, n) in topics.iter().zip(&norms) {
            let a = *n / total;
            for k in 0..hd {
                global[k] = global[k] + a * t[k];
            }
        }
    }

    let (alpha, beta) = (cfg.coupling.alpha, cfg.coupling.beta);
    let mut coherence = vec![T::of(0.0); hd];
    let mut word_loss = T::of(0.0);
    let mut last = Vec::new();
    for (i, (topic, sentence)) in topics.iter().zip(sentences).enumerate() {
        let coupled: V<T> = topic
            .iter()
            .zip(&coherence)
            .map(|(t, c)| (T::of(alpha) * *t + T::of(beta) * *c) / T::of(alpha + beta))
            .collect();
        let gated = w.gru("sentence.gate", &coupled, &global);
        let mut h1 = vec![T::of(0.0); hd];
        let mut h2 = vec![T::of(0.0); hd];
        let mut prev = BOS;
        for &target in sentence.iter().chain(std::iter::once(&EOS)) {
            let mut x = w.row("sentence.embedding.table", prev);
            x.extend_from_slice(&gated);
            h1 = w.gru("sentence.word1", &x, &h1);
            h2 = w.gru("sentence.word2", &h1, &h2);
            let logits = w.dense("sentence.output", &h2);
            word_loss = word_loss - log_softmax_at(&logits, target);
            prev = target;
        }
        if !cfg.no_coherence && i + 1 < s_count {
            let c: V<T> = w.dense("sentence.coherence1", &h2).into_iter().map(selu).collect();
            coherence = w.dense("sentence.coherence2", &c);
        }
        last = h2;
    }
    Forced {
        loss: T::of(lambda.0) * sentence_loss + T::of(lambda.1) * word_loss,
        last_hidden: last,
    }
}

/// Plain objective from a zero initial state.
pub fn paragraph_loss<T: Real>(
    w: &Weights<T>,
    cfg: &ModelConfig,
    features: &[f64],
    sentences: &[Vec<usize>],
) -> T {
    let h0 = vec![T::of(0.0); cfg.hidden];
    forced_loss(w, cfg, features, sentences, h0, (5.0, 1.0)).loss
}

/// Negative ELBO with fixed noise `eps` and unit KL weight.
pub fn elbo<T: Real>(
    w: &Weights<T>,
    cfg: &ModelConfig,
    features: &[f64],
    sentences: &[Vec<usize>],
    eps: &[f64],
) -> T {
    let hd = cfg.hidden;
    let zero = vec![T::of(0.0); hd];
    let enc = forced_loss(w, cfg, features, sentences, zero.clone(), (5.0, 1.0)).last_hidden;
    let out = w.dense("vae.encoder", &enc);
    let (mu, log_var) = out.split_at(hd);
    let z: V<T> = (0..hd)
        .map(|k| mu[k] + (log_var[k] * T::of(0.5)).exp() * T::of(eps[k]))
        .collect();
    let primed = w.dense("vae.inject", &z);
    let h0 = w.gru("topic.rnn", &primed, &zero);
    let recon = forced_loss(w, cfg, features, sentences, h0, (5.0, 1.0)).loss;
    let kl = (0..hd).fold(T::of(0.0), |acc, k| {
        acc + mu[k] * mu[k] + log_var[k].exp() - log_var[k] - T::of(1.0)
    });
    recon + T::of(0.5) * kl
}

/// Which objective to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Paragraph,
    Elbo,
}

fn evaluate<T: Real>(
    obj: Objective,
    w: &Weights<T>,
    cfg: &ModelConfig,
    sample: &paragen::ParagraphSample,
    eps: &[f64],
) -> T {
    match obj {
        Objective::Paragraph => paragraph_loss(w, cfg, &sample.features, &sample.sentences),
        Objective::Elbo => elbo(w, cfg, &sample.features, &sample.sentences, eps),
    }
}

/// Reference objective value in plain `f64`.
pub fn value_f64(
    obj: Objective,
    model: &paragen::ParagraphModel,
    sample: &paragen::ParagraphSample,
    eps: &[f64],
) -> f64 {
    let w = Weights::<f64>::from_store(&model.params, None);
    evaluate(obj, &w, &model.config, sample, eps)
}

/// Maximum relative error `|a − n| / max(1e-12, |a| + |n|)` between the
/// given analytic gradients and double-double central differences with
/// step `h`, with the worst entry.
pub fn precise_grad_check(
    obj: Objective,
    model: &paragen::ParagraphModel,
    sample: &paragen::ParagraphSample,
    eps: &[f64],
    analytic: &std::collections::BTreeMap<String, paragen::Tensor>,
    h: f64,
) -> (f64, String, usize) {
    let mut worst = (0.0, String::new(), 0usize);
    let mut checked = 0;
    for (name, t) in model.params.iter() {
        for i in 0..t.numel() {
            let at = |d: f64| {
                let w = Weights::<Dd>::from_store(&model.params, Some((name, i, Dd::new(d))));
                evaluate(obj, &w, &model.config, sample, eps)
            };
            let numeric = ((at(h) - at(-h)) / Dd::new(2.0 * h)).to_f64();
            let a = analytic[name].data()[i];
            let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-12);
            if err > worst.0 {
                worst = (err, format!("{name}[{i}]"), 0);
            }
            checked += 1;
        }
    }
    worst.2 = checked;
    worst
}

/// A tiny model of the default diagnostic shape with its sample and a fixed
/// noise vector for the variational objective.
pub fn tiny(vae_heads: bool, seed: u64) -> (ParagraphModel, paragen::ParagraphSample, Vec<f64>) {
    let shape = TinyShape::default();
    let config = ModelConfig {
        vae: vae_heads,
        ..ModelConfig::new(shape.feature_dim, shape.hidden, shape.vocab_size)
    };
    let model = ParagraphModel::new(config, seed).unwrap();
    let eps: Vec<f64> = (0..shape.hidden).map(|k| (k as f64 * 0.37).sin()).collect();
    (model, tiny_sample(shape, seed), eps)
}

/// Objective value and tape gradients.
pub fn tape_objective(obj: Objective, model: &ParagraphModel, sample: &paragen::ParagraphSample, eps: &[f64]) -> (f64, std::collections::BTreeMap<String, paragen::Tensor>) {
    let tape = Tape::new();
    let b = Binder::new(&tape, &model.params);
    let loss = match obj {
        Objective::Paragraph => {
            let input = ModelInput { features: &sample.features, stars: None };
            let out = model.forward_forced(&b, input, &sample.sentences, None).unwrap();
            tape_paragraph_loss(&out, LossWeights::default()).unwrap().total
        }
        Objective::Elbo => vae::elbo_loss(model, &b, sample, eps, LossWeights::default(), 1.0).unwrap().total,
    };
    let g = tape.backward(loss).unwrap();
    (loss.item(), b.gradients(&g))
}

