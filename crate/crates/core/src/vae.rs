//! Variational wrapper: the encoder head `q(z | y, x)`, reparameterised
//! sampling, the KL term against `N(0, I)`, and latent injection into the
//! sentence-RNN.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::autodiff::{Tape, Var};
use crate::corpus::ParagraphSample;
use crate::error::{Error, Result};
use crate::model::{DecodeMode, GeneratedParagraph, ModelInput, ParagraphModel};
use crate::nn::{Activation, Dense};
use crate::params::{Binder, ParamStore};

/// Encoder head (`H → 2H`) and latent injection layer (`H → I`).
#[derive(Debug, Clone)]
pub struct VaeHeads {
    pub encoder: Dense,
    pub inject: Dense,
}

impl VaeHeads {
    pub fn new(hidden: usize, feature_dim: usize) -> Self {
        VaeHeads {
            encoder: Dense::new("vae.encoder", hidden, 2 * hidden, Activation::Identity),
            inject: Dense::new("vae.inject", hidden, feature_dim, Activation::Identity),
        }
    }

    pub fn init<R: Rng + ?Sized>(&self, store: &mut ParamStore, rng: &mut R) {
        self.encoder.init(store, rng);
        self.inject.init(store, rng);
    }
}

/// Diagonal Gaussian posterior with per-dimension `ln σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPosterior {
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
}

impl LatentPosterior {
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.log_var.iter().map(|lv| (0.5 * lv).exp()).collect()
    }
}

/// `z = μ + exp(ln σ² / 2) ⊙ ε`.
pub fn reparameterize(p: &LatentPosterior, eps: &[f64]) -> Result<Vec<f64>> {
    if eps.len() != p.mu.len() || p.log_var.len() != p.mu.len() {
        return Err(Error::contract("reparameterize: dimension mismatch"));
    }
    Ok(p.mu
        .iter()
        .zip(&p.log_var)
        .zip(eps)
        .map(|((m, lv), e)| m + (0.5 * lv).exp() * e)
        .collect())
}

/// `½ Σ_d (μ_d² + σ_d² − ln σ_d² − 1)`.
pub fn kl_to_standard_normal(p: &LatentPosterior) -> f64 {
    0.5 * p
        .mu
        .iter()
        .zip(&p.log_var)
        .map(|(m, lv)| m * m + lv.exp() - lv - 1.0)
        .sum::<f64>()
}

/// Tape form of [`reparameterize`].
pub fn reparameterize_var<'t>(mu: Var<'t>, log_var: Var<'t>, eps: Var<'t>) -> Var<'t> {
    mu + log_var.scale(0.5).exp() * eps
}

/// Tape form of [`kl_to_standard_normal`].
pub fn kl_var<'t>(mu: Var<'t>, log_var: Var<'t>) -> Var<'t> {
    let terms = mu * mu + log_var.exp() - log_var;
    terms.sum().add_const(-(mu.numel() as f64)).scale(0.5)
}

/// Draws `ε ~ N(0, I)` of width `dim`.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn heads(model: &ParagraphModel) -> Result<VaeHeads> {
    model
        .layers()
        .vae
        .ok_or_else(|| Error::contract("model was built without the variational heads"))
}

/// Encodes `(x, y)`: teacher-forced pass over the ground truth, then the
/// `2H` head on the final word-RNN state.
pub fn encode_vars<'t>(
    model: &ParagraphModel,
    b: &Binder<'t, '_>,
    sample: &ParagraphSample,
) -> Result<(Var<'t>, Var<'t>)> {
    let heads = heads(model)?;
    let input = ModelInput {
        features: &sample.features,
        stars: sample.stars,
    };
    let forced = model.forward_forced(b, input, &sample.sentences, None)?;
    let out = heads.encoder.forward(b, forced.last_hidden)?;
    let h = model.config.hidden;
    Ok((out.slice(0, h), out.slice(h, h)))
}

pub fn encode(model: &ParagraphModel, sample: &ParagraphSample) -> Result<LatentPosterior> {
    let tape = Tape::inference();
    let b = Binder::new(&tape, &model.params);
    let (mu, log_var) = encode_vars(model, &b, sample)?;
    Ok(LatentPosterior {
        mu: mu.to_vec(),
        log_var: log_var.to_vec(),
    })
}

/// Projection of `z` through the injection layer.
pub fn inject<'t>(model: &ParagraphModel, b: &Binder<'t, '_>, z: Var<'t>) -> Result<Var<'t>> {
    if z.numel() != model.config.hidden {
        return Err(Error::contract(format!(
            "latent has width {}, expected {}",
            z.numel(),
            model.config.hidden
        )));
    }
    heads(model)?.inject.forward(b, z)
}

/// Decodes a paragraph from latent `z`: the projected latent drives one
/// priming sentence-RNN step, after which generation proceeds as usual.
pub fn decode_with_latent(
    model: &ParagraphModel,
    z: &[f64],
    features: &[f64],
    stars: Option<u8>,
    mode: DecodeMode,
) -> Result<GeneratedParagraph> {
    let tape = Tape::inference();
    let b = Binder::new(&tape, &model.params);
    let primed = inject(model, &b, tape.vector(z.to_vec()))?;
    model.generate_with(&b, ModelInput { features, stars }, Some(primed), mode)
}

/// Loss terms of one ELBO evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ElboTerms<'t> {
    pub total: Var<'t>,
    pub reconstruction: crate::training::LossTerms<'t>,
    pub kl: Var<'t>,
}

/// Negative ELBO for one sample: Eq.-2 reconstruction of `y` decoded from
/// `z = μ + σ ε`, plus `kl_weight · KL(q ‖ N(0, I))`.
pub fn elbo_loss<'t>(
    model: &ParagraphModel,
    b: &Binder<'t, '_>,
    sample: &ParagraphSample,
    eps: &[f64],
    weights: crate::training::LossWeights,
    kl_weight: f64,
) -> Result<ElboTerms<'t>> {
    let tape = b.tape();
    if eps.len() != model.config.hidden {
        return Err(Error::contract("eps width must equal the hidden width"));
    }
    let (mu, log_var) = encode_vars(model, b, sample)?;
    let z = reparameterize_var(mu, log_var, tape.vector(eps.to_vec()));
    let primed = inject(model, b, z)?;
    let input = ModelInput {
        features: &sample.features,
        stars: sample.stars,
    };
    let forced = model.forward_forced(b, input, &sample.sentences, Some(primed))?;
    let reconstruction = crate::training::paragraph_loss(&forced, weights)?;
    let kl = kl_var(mu, log_var);
    let total = reconstruction.total + kl.scale(kl_weight);
    Ok(ElboTerms {
        total,
        reconstruction,
        kl,
    })
}
