//! End-to-end gradient checks on a tiny model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ModelConfig;
use crate::corpus::ParagraphSample;
use crate::autodiff::Var;
use crate::error::Result;
use crate::gradcheck::{grad_check, GradCheckReport};
use crate::model::{ModelInput, ParagraphModel};
use crate::nn::{Activation, Dense, Embedding, Gru};
use crate::params::{Binder, ParamStore};
use crate::tensor::Tensor;
use crate::training::{paragraph_loss, LossWeights};
use crate::vae;

/// Shape of the model used by [`tiny_gradcheck`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TinyShape {
    pub hidden: usize,
    pub feature_dim: usize,
    pub vocab_size: usize,
    pub sentences: usize,
    pub words: usize,
}

impl Default for TinyShape {
    fn default() -> Self {
        TinyShape {
            hidden: 8,
            feature_dim: 12,
            vocab_size: 20,
            sentences: 2,
            words: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub max_rel_error: f64,
    pub worst: Option<String>,
    pub worst_values: Option<(f64, f64)>,
    pub entries_checked: usize,
}

impl From<GradCheckReport> for CheckSummary {
    fn from(r: GradCheckReport) -> Self {
        CheckSummary {
            max_rel_error: r.max_rel_error,
            worst: r.worst.map(|(n, i)| format!("{n}[{i}]")),
            worst_values: r.worst_values,
            entries_checked: r.entries_checked,
        }
    }
}

/// Results for the plain paragraph loss and the variational objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TinyGradCheck {
    pub shape: TinyShape,
    pub paragraph_loss: CheckSummary,
    pub elbo: CheckSummary,
}

/// A random sample for `shape`: features, and sentences drawn from the
/// non-reserved ids.
pub fn tiny_sample(shape: TinyShape, seed: u64) -> ParagraphSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = (0..shape.feature_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sentences = (0..shape.sentences)
        .map(|_| {
            (0..shape.words)
                .map(|_| rng.random_range(crate::corpus::EOS + 1..shape.vocab_size))
                .collect()
        })
        .collect();
    ParagraphSample {
        id: "tiny".into(),
        features,
        sentences,
        stars: None,
        scene: None,
    }
}

/// Checks every parameter gradient of both objectives against central
/// differences with step `eps`.
pub fn tiny_gradcheck(shape: TinyShape, seed: u64, eps: f64) -> Result<TinyGradCheck> {
    let sample = tiny_sample(shape, seed);
    let config = ModelConfig::new(shape.feature_dim, shape.hidden, shape.vocab_size);
    let plain = ParagraphModel::new(config.clone(), seed)?;
    let weights = LossWeights::default();
    let loss_report = grad_check(
        &plain.params,
        |b| {
            let input = ModelInput {
                features: &sample.features,
                stars: None,
            };
            let out = plain.forward_forced(b, input, &sample.sentences, None)?;
            Ok(paragraph_loss(&out, weights)?.total)
        },
        eps,
    )?;

    let vae_model = ParagraphModel::new(ModelConfig { vae: true, ..config }, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let noise = vae::standard_normal(&mut rng, shape.hidden);
    let elbo_report = grad_check(
        &vae_model.params,
        |b| Ok(vae::elbo_loss(&vae_model, b, &sample, &noise, weights, 1.0)?.total),
        eps,
    )?;
    Ok(TinyGradCheck {
        shape,
        paragraph_loss: loss_report.into(),
        elbo: elbo_report.into(),
    })
}

type Probe = Box<dyn for<'t, 'p> Fn(&Binder<'t, 'p>) -> Result<Var<'t>>>;

/// Central-difference checks (step 1e-5) of every tape primitive and every
/// layer type, each reduced to a scalar through a random projection. Inputs
/// are random values in (−1, 1) and are checked along with the weights.
pub fn primitive_gradchecks(seed: u64) -> Result<Vec<(String, CheckSummary)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let mut add = |store: &mut ParamStore, name: &str, shape: &[usize]| {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        store.insert(name, Tensor::new(shape.to_vec(), data).expect("shape"));
    };
    for (name, shape) in [("a", &[3, 4][..]), ("m", &[4, 2]), ("x", &[4]), ("y", &[4]), ("h", &[3]), ("w3", &[3])] {
        add(&mut store, name, shape);
    }
    let gru = Gru::new("gru", 4, 3);
    let dense: Vec<Dense> = [
        Activation::Identity,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Selu,
        Activation::Softmax,
    ]
    .into_iter()
    .map(|act| Dense::new(format!("dense_{act:?}").to_lowercase(), 4, 3, act))
    .collect();
    let emb = Embedding::new("emb", 5, 3);
    // Non-zero biases so no activation sits exactly on the SeLU kink.
    let mut init = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    gru.init(&mut store, &mut init);
    for d in &dense {
        d.init(&mut store, &mut init);
    }
    emb.init(&mut store, &mut init);
    let biases: Vec<String> = store.names().filter(|n| n.contains(".b")).map(str::to_string).collect();
    for name in biases {
        let shape = store.get(&name).expect("present").shape().to_vec();
        add(&mut store, &name, &shape);
    }

    let mut cases: Vec<(String, Probe)> = vec![
        ("add".into(), Box::new(|b| Ok((b.get("x") + b.get("y")).tanh().sum()))),
        ("sub".into(), Box::new(|b| Ok((b.get("x") - b.get("y")).sigmoid().sum()))),
        ("mul".into(), Box::new(|b| Ok((b.get("x") * b.get("y")).sum()))),
        ("matvec".into(), Box::new(|b| Ok(b.get("a").matvec(b.get("x")).dot(b.get("w3"))))),
        ("matmul".into(), Box::new(|b| Ok(b.get("a").matmul(b.get("m")).tanh().sum()))),
        ("sigmoid".into(), Box::new(|b| Ok(b.get("x").sigmoid().dot(b.get("y"))))),
        ("tanh".into(), Box::new(|b| Ok(b.get("x").tanh().dot(b.get("y"))))),
        ("exp".into(), Box::new(|b| Ok(b.get("x").exp().dot(b.get("y"))))),
        ("selu".into(), Box::new(|b| Ok(b.get("x").selu().dot(b.get("y"))))),
        ("softmax".into(), Box::new(|b| Ok(b.get("x").softmax().dot(b.get("y"))))),
        ("log_softmax".into(), Box::new(|b| Ok(b.get("x").log_softmax().pick(2)))),
        ("log_sigmoid".into(), Box::new(|b| Ok(b.get("x").log_sigmoid().dot(b.get("y"))))),
        ("norm".into(), Box::new(|b| Ok(b.get("x").norm()))),
        ("div_scalar".into(), Box::new(|b| Ok(b.get("x").div_scalar(b.get("y").norm()).sum()))),
        (
            "gru".into(),
            Box::new(move |b| Ok(gru.step(b, b.get("x"), b.get("h").tanh())?.dot(b.get("w3")))),
        ),
        (
            "embedding".into(),
            Box::new(move |b| Ok(emb.lookup(b, 3)?.dot(b.get("w3")))),
        ),
    ];
    for d in dense {
        let name = format!("dense/{:?}", d.activation).to_lowercase();
        cases.push((name, Box::new(move |b| Ok(d.forward(b, b.get("x"))?.dot(b.get("w3"))))));
    }
    cases
        .into_iter()
        .map(|(name, f)| Ok((name, grad_check(&store, f, 1e-5)?.into())))
        .collect()
}
