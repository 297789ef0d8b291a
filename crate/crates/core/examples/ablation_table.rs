//! Full model vs. the no-coherence and no-global-topic ablations on the
//! synthetic corpus, scored by held-out per-token cross-entropy.
//!
//! ```text
//! cargo run --release --example ablation_table -- [seeds] [epochs] [--with-ng]
//! ```

use paragen::corpus::{synthetic_corpus, CorpusSpec};
use paragen::training::{evaluate, train};
use paragen::{ModelConfig, TrainConfig};

const HIDDEN: usize = 64;
const FEATURES: usize = 64;

fn main() -> paragen::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(5);
    let epochs: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(12);
    let with_ng = args.iter().any(|a| a == "--with-ng");

    println!("seed  full     no-coh   {}", if with_ng { "no-glob" } else { "" });
    for seed in 1..=seeds {
        let spec = |scenes, seed| CorpusSpec {
            scenes,
            feature_dim: FEATURES,
            seed,
            ..CorpusSpec::default()
        };
        let train_set = synthetic_corpus(&spec(500, 1000 + seed))?;
        let test_set = synthetic_corpus(&spec(100, 2000 + seed))?;
        let base = ModelConfig::new(FEATURES, HIDDEN, train_set.vocabulary.len());
        let mut cfg = TrainConfig::new(epochs, 2e-3, seed);
        cfg.lr_halving_period = 4;

        let mut variants = vec![base.clone(), ModelConfig { no_coherence: true, ..base.clone() }];
        if with_ng {
            variants.push(ModelConfig { no_global: true, ..base });
        }
        let mut row = format!("{seed:<5}");
        for model_config in variants {
            let (trainer, _) = train(model_config, &train_set.samples, cfg.clone())?;
            let ce = evaluate(&trainer.model, &test_set.samples)?.word_ce_per_token;
            row += &format!(" {ce:<8.4}");
        }
        println!("{row}");
    }
    Ok(())
}
