//! Interrupting training, saving, and resuming gives the same parameters as
//! an uninterrupted run.

use paragen::corpus::{synthetic_corpus, CorpusSpec};
use paragen::{Checkpoint, ModelConfig, ParagraphModel, TrainConfig, Trainer};

fn main() -> paragen::Result<()> {
    let data = synthetic_corpus(&CorpusSpec { scenes: 5, feature_dim: 12, seed: 2, ..CorpusSpec::default() })?;
    let config = ModelConfig::new(12, 8, data.vocabulary.len());
    let fresh = || Trainer::new(ParagraphModel::new(config.clone(), 0)?, TrainConfig::new(6, 5e-3, 0));

    let mut straight = fresh()?;
    straight.train(&data.samples)?;

    let mut first_half = fresh()?;
    for _ in 0..3 {
        first_half.run_epoch(&data.samples)?;
    }
    let path = std::env::temp_dir().join("paragen-resume.pgck");
    Checkpoint::from_trainer(&first_half).save(&path)?;
    let mut resumed = Checkpoint::load(&path)?.into_trainer()?;
    resumed.train(&data.samples)?;

    println!("checkpoint: {} bytes at {}", std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0), path.display());
    println!("resumed run identical to uninterrupted run: {}", resumed == straight);
    Ok(())
}
