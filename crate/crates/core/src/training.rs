//! Joint sentence/word loss, Adam, the step-halving learning-rate schedule
//! and the per-example training loop.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::corpus::ParagraphSample;
use crate::error::{Error, Result};
use crate::model::{ForcedOutputs, ModelInput, ParagraphModel};
use crate::params::{Binder, ParamStore};
use crate::tensor::Tensor;
use crate::vae;

/// Weights of the sentence-level and word-level cross-entropies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_s: f64,
    pub lambda_w: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda_s: 5.0,
            lambda_w: 1.0,
        }
    }
}

/// Recorded loss pieces. `sentence` and `word` are unweighted sums.
#[derive(Debug, Clone, Copy)]
pub struct LossTerms<'t> {
    pub total: Var<'t>,
    pub sentence: Var<'t>,
    pub word: Var<'t>,
    /// Number of word targets, EOS included.
    pub tokens: usize,
}

/// Binary cross-entropy of a CONTINUE logit against a 0/1 target.
fn stop_bce<'t>(logit: Var<'t>, cont: bool) -> Var<'t> {
    if cont {
        -logit.log_sigmoid()
    } else {
        -(-logit).log_sigmoid()
    }
}

/// `λ_s Σ_i BCE(u_i, [i < S]) + λ_w Σ_i Σ_j CE(p_ij, y_ij)`.
///
/// The CONTINUE target is 1 for every sentence but the last.
pub fn paragraph_loss<'t>(out: &ForcedOutputs<'t>, w: LossWeights) -> Result<LossTerms<'t>> {
    let s = out.stop_logits.len();
    if s == 0 || out.word_log_probs.len() != s || out.targets.len() != s {
        return Err(Error::contract(format!(
            "loss: {} stop outputs, {} sentence outputs, {} target sentences",
            s,
            out.word_log_probs.len(),
            out.targets.len()
        )));
    }
    let tape = out.stop_logits[0].tape();
    let mut sentence = stop_bce(out.stop_logits[0], s > 1);
    for (i, logit) in out.stop_logits.iter().enumerate().skip(1) {
        sentence = sentence + stop_bce(*logit, i + 1 < s);
    }
    let mut word: Option<Var<'t>> = None;
    let mut tokens = 0;
    for (lps, targets) in out.word_log_probs.iter().zip(&out.targets) {
        if lps.len() != targets.len() {
            return Err(Error::contract(format!(
                "loss: {} word outputs for {} targets",
                lps.len(),
                targets.len()
            )));
        }
        for (lp, &t) in lps.iter().zip(targets) {
            if t >= lp.numel() {
                return Err(Error::TokenOutOfRange {
                    id: t,
                    size: lp.numel(),
                });
            }
            let nll = -lp.pick(t);
            word = Some(match word {
                Some(acc) => acc + nll,
                None => nll,
            });
            tokens += 1;
        }
    }
    let word = word.unwrap_or_else(|| tape.scalar(0.0));
    let total = sentence.scale(w.lambda_s) + word.scale(w.lambda_w);
    Ok(LossTerms {
        total,
        sentence,
        word,
        tokens,
    })
}

/// `base · 2^(−⌊(epoch − 1) / period⌋)`.
pub fn lr_schedule_with_period(epoch: usize, base: f64, period: usize) -> f64 {
    assert!(epoch >= 1, "epochs are 1-based");
    let halvings = (epoch - 1) / period.max(1);
    base * 0.5f64.powi(halvings as i32)
}

/// Base rate for epochs 1–5, halved every 5 epochs after that.
pub fn lr_schedule(epoch: usize, base: f64) -> f64 {
    lr_schedule_with_period(epoch, base, 5)
}

/// Adam moments and step count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub m: BTreeMap<String, Vec<f64>>,
    pub v: BTreeMap<String, Vec<f64>>,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for Adam {
    fn default() -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl Adam {
    /// One bias-corrected Adam update. Nothing is modified when any gradient
    /// is non-finite.
    pub fn step(
        &self,
        params: &mut ParamStore,
        grads: &BTreeMap<String, Tensor>,
        state: &mut AdamState,
        lr: f64,
    ) -> Result<()> {
        for (name, p) in params.iter() {
            let g = grads
                .get(name)
                .ok_or_else(|| Error::contract(format!("no gradient for `{name}`")))?;
            if g.numel() != p.numel() {
                return Err(Error::contract(format!("gradient shape mismatch for `{name}`")));
            }
            if !g.is_finite() {
                return Err(Error::NonFinite(name.to_string()));
            }
        }
        state.t += 1;
        let t = state.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (name, p) in params.iter_mut() {
            let g = grads[name].data();
            let m = state
                .m
                .entry(name.to_string())
                .or_insert_with(|| vec![0.0; g.len()]);
            let v = state
                .v
                .entry(name.to_string())
                .or_insert_with(|| vec![0.0; g.len()]);
            for (((w, gi), mi), vi) in p.data_mut().iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * gi;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *w -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut BTreeMap<String, Tensor>, max_norm: f64) -> f64 {
    let norm = grads
        .values()
        .flat_map(|g| g.data().iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        for g in grads.values_mut() {
            g.data_mut().iter_mut().for_each(|x| *x *= s);
        }
    }
    norm
}

fn default_lr() -> f64 {
    1e-4
}
fn default_period() -> usize {
    5
}
fn default_clip() -> Option<f64> {
    Some(5.0)
}
fn default_kl_weight() -> f64 {
    1.0
}

/// Optimisation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Epochs between learning-rate halvings.
    #[serde(default = "default_period")]
    pub lr_halving_period: usize,
    #[serde(default)]
    pub loss: LossWeights,
    /// Global gradient-norm clip; `None` disables clipping.
    #[serde(default = "default_clip")]
    pub clip_norm: Option<f64>,
    #[serde(default = "default_kl_weight")]
    pub kl_weight: f64,
    /// Ramp the KL weight linearly from 0 over this many epochs.
    #[serde(default)]
    pub kl_anneal_epochs: Option<usize>,
    #[serde(default)]
    pub adam: Adam,
}

impl TrainConfig {
    pub fn new(epochs: usize, learning_rate: f64, seed: u64) -> Self {
        TrainConfig {
            learning_rate,
            epochs,
            seed,
            lr_halving_period: default_period(),
            loss: LossWeights::default(),
            clip_norm: default_clip(),
            kl_weight: default_kl_weight(),
            kl_anneal_epochs: None,
            adam: Adam::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.lr_halving_period == 0 {
            return Err(Error::Config("lr_halving_period must be positive".into()));
        }
        if self.loss.lambda_s < 0.0 || self.loss.lambda_w < 0.0 {
            return Err(Error::Config("loss weights must be non-negative".into()));
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return Err(Error::Config("clip_norm must be positive".into()));
        }
        Ok(())
    }

    pub fn lr(&self, epoch: usize) -> f64 {
        lr_schedule_with_period(epoch, self.learning_rate, self.lr_halving_period)
    }

    pub fn kl_weight_at(&self, epoch: usize) -> f64 {
        match self.kl_anneal_epochs {
            Some(k) if k > 0 => self.kl_weight * (epoch as f64 / k as f64).min(1.0),
            _ => self.kl_weight,
        }
    }
}

/// Per-epoch training record (one line of the metrics log).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    /// Mean objective per example.
    pub loss: f64,
    /// Mean unweighted sentence loss per example.
    pub sentence_loss: f64,
    /// Mean unweighted word loss per example.
    pub word_loss: f64,
    /// Word cross-entropy per target token.
    pub word_ce_per_token: f64,
    /// Mean KL per example (variational mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kl: Option<f64>,
    pub examples: usize,
}

/// Model plus optimiser state; everything needed to resume.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainer {
    pub model: ParagraphModel,
    pub config: TrainConfig,
    pub adam: AdamState,
    /// Completed epochs.
    pub epoch: usize,
}

impl Trainer {
    pub fn new(model: ParagraphModel, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Trainer {
            model,
            config,
            adam: AdamState::default(),
            epoch: 0,
        })
    }

    fn epoch_rng(&self, epoch: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(epoch as u64);
        rng
    }

    /// Runs one epoch of per-example updates in a seeded shuffled order.
    pub fn run_epoch(&mut self, data: &[ParagraphSample]) -> Result<EpochLog> {
        if data.is_empty() {
            return Err(Error::contract("training set is empty"));
        }
        let epoch = self.epoch + 1;
        let lr = self.config.lr(epoch);
        let kl_weight = self.config.kl_weight_at(epoch);
        let mut rng = self.epoch_rng(epoch);
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng);

        let vae_mode = self.model.config.vae;
        let (mut loss_sum, mut sent_sum, mut word_sum, mut kl_sum) = (0.0, 0.0, 0.0, 0.0);
        let mut tokens = 0usize;
        for idx in order {
            let sample = &data[idx];
            let eps = vae_mode.then(|| vae::standard_normal(&mut rng, self.model.config.hidden));
            let mut grads = {
                let tape = Tape::new();
                let b = Binder::new(&tape, &self.model.params);
                let (total, terms, kl) = match &eps {
                    Some(eps) => {
                        let e = vae::elbo_loss(&self.model, &b, sample, eps, self.config.loss, kl_weight)?;
                        (e.total, e.reconstruction, Some(e.kl.item()))
                    }
                    None => {
                        let input = ModelInput {
                            features: &sample.features,
                            stars: sample.stars,
                        };
                        let out = self.model.forward_forced(&b, input, &sample.sentences, None)?;
                        let terms = paragraph_loss(&out, self.config.loss)?;
                        (terms.total, terms, None)
                    }
                };
                loss_sum += total.item();
                sent_sum += terms.sentence.item();
                word_sum += terms.word.item();
                kl_sum += kl.unwrap_or(0.0);
                tokens += terms.tokens;
                let g = tape.backward(total)?;
                b.gradients(&g)
            };
            if let Some(c) = self.config.clip_norm {
                clip_global_norm(&mut grads, c);
            }
            self.config
                .adam
                .step(&mut self.model.params, &grads, &mut self.adam, lr)?;
        }
        self.epoch = epoch;
        let n = data.len() as f64;
        Ok(EpochLog {
            epoch,
            lr,
            loss: loss_sum / n,
            sentence_loss: sent_sum / n,
            word_loss: word_sum / n,
            word_ce_per_token: word_sum / tokens as f64,
            kl: vae_mode.then(|| kl_sum / n),
            examples: data.len(),
        })
    }

    /// Trains until `config.epochs` epochs are complete.
    pub fn train(&mut self, data: &[ParagraphSample]) -> Result<Vec<EpochLog>> {
        let mut logs = Vec::new();
        while self.epoch < self.config.epochs {
            logs.push(self.run_epoch(data)?);
        }
        Ok(logs)
    }
}

/// Trains a fresh model; initial parameters are drawn from `train.seed`.
pub fn train(
    model_config: crate::config::ModelConfig,
    data: &[ParagraphSample],
    train: TrainConfig,
) -> Result<(Trainer, Vec<EpochLog>)> {
    let model = ParagraphModel::new(model_config, train.seed)?;
    let mut trainer = Trainer::new(model, train)?;
    let logs = trainer.train(data)?;
    Ok((trainer, logs))
}

/// Teacher-forced cross-entropy of a model on held-out samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldOut {
    pub word_ce_per_token: f64,
    pub sentence_loss_per_example: f64,
}

/// Teacher-forced evaluation. Variational models decode from the posterior
/// mean of each sample.
pub fn evaluate(model: &ParagraphModel, data: &[ParagraphSample]) -> Result<HeldOut> {
    if data.is_empty() {
        return Err(Error::contract("evaluation set is empty"));
    }
    let (mut word, mut sent, mut tokens) = (0.0, 0.0, 0usize);
    for sample in data {
        let tape = Tape::inference();
        let b = Binder::new(&tape, &model.params);
        let prime = if model.config.vae {
            let (mu, _) = vae::encode_vars(model, &b, sample)?;
            Some(vae::inject(model, &b, mu)?)
        } else {
            None
        };
        let input = ModelInput {
            features: &sample.features,
            stars: sample.stars,
        };
        let out = model.forward_forced(&b, input, &sample.sentences, prime)?;
        let terms = paragraph_loss(&out, LossWeights::default())?;
        word += terms.word.item();
        sent += terms.sentence.item();
        tokens += terms.tokens;
    }
    Ok(HeldOut {
        word_ce_per_token: word / tokens as f64,
        sentence_loss_per_example: sent / data.len() as f64,
    })
}
