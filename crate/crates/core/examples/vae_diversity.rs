//! Trains the variational model on a five-reference corpus and decodes two
//! prior draws per scene.
//!
//! ```text
//! cargo run --release --example vae_diversity -- [seed] [epochs] [anneal]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use paragen::corpus::{synthetic_corpus, CorpusSpec};
use paragen::training::train;
use paragen::vae::{decode_with_latent, encode, standard_normal};
use paragen::{DecodeMode, ModelConfig, TrainConfig};

fn main() -> paragen::Result<()> {
    let arg = |i: usize, d: u64| std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (seed, epochs, anneal) = (arg(1, 1), arg(2, 200) as usize, arg(3, 100) as usize);
    let data = synthetic_corpus(&CorpusSpec {
        scenes: 10,
        references_per_scene: 5,
        feature_dim: 64,
        seed,
        ..CorpusSpec::default()
    })?;
    let mut cfg = TrainConfig::new(epochs, 2e-3, seed);
    cfg.lr_halving_period = 100;
    cfg.kl_anneal_epochs = (anneal > 0).then_some(anneal);
    let config = ModelConfig { vae: true, ..ModelConfig::new(64, 48, data.vocabulary.len()) };
    let (trainer, logs) = train(config, &data.samples, cfg)?;
    let model = &trainer.model;
    for log in logs.iter().filter(|l| l.epoch % 25 == 0) {
        println!("epoch {:>3}  word CE/token {:.4}  KL {:.4}", log.epoch, log.word_ce_per_token, log.kl.unwrap_or(0.0));
    }

    // how far apart are the posteriors of one scene's references?
    let mus: Vec<Vec<f64>> = data.samples[..5].iter().map(|s| encode(model, s).map(|p| p.mu)).collect::<Result<_, _>>()?;
    let spread = mus[1..].iter().map(|m| m.iter().zip(&mus[0]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt());
    println!("posterior mean distances within scene 0: {:?}", spread.map(|d| format!("{d:.3}")).collect::<Vec<_>>());

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut differ = 0;
    for s in data.samples.iter().step_by(5) {
        let a = decode_with_latent(model, &standard_normal(&mut rng, 48), &s.features, None, DecodeMode::Greedy)?;
        let b = decode_with_latent(model, &standard_normal(&mut rng, 48), &s.features, None, DecodeMode::Greedy)?;
        differ += usize::from(a.sentences != b.sentences);
        println!("{}:\n  {}\n  {}", s.id, flat(&data.vocabulary, &a.sentences)?, flat(&data.vocabulary, &b.sentences)?);
    }
    println!("{differ}/10 scenes decode differently under two latent draws");
    Ok(())
}

fn flat(vocab: &paragen::Vocabulary, sentences: &[Vec<usize>]) -> paragen::Result<String> {
    Ok(sentences.iter().map(|s| vocab.decode(s).map(|w| w.join(" "))).collect::<paragen::Result<Vec<_>>>()?.join(" "))
}
