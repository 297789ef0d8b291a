//! Builds a synthetic corpus, shows one scene, and round-trips it through the
//! JSON-lines format.

use paragen::corpus::{load_dataset, save_dataset, synthetic_corpus, CorpusSpec, LoadOptions};

fn main() -> paragen::Result<()> {
    let spec = CorpusSpec { scenes: 3, references_per_scene: 2, feature_dim: 8, stars: true, seed: 11 };
    let data = synthetic_corpus(&spec)?;
    let first = &data.samples[0];
    let scene = first.scene.as_ref().expect("synthetic samples keep their scene");
    println!("{} is a {} scene with {} stars", first.id, scene.meta_concept().name, first.stars.unwrap_or(0));
    for s in data.samples.iter().take(2) {
        for sentence in &s.sentences {
            println!("  {}", data.vocabulary.decode(sentence)?.join(" "));
        }
        println!();
    }

    let dir = std::env::temp_dir().join("paragen-make-corpus");
    std::fs::create_dir_all(&dir).map_err(|e| paragen::Error::Config(e.to_string()))?;
    let path = dir.join("corpus.jsonl");
    save_dataset(&path, &data.samples, &data.vocabulary)?;
    let back = load_dataset(&path, &LoadOptions { vocabulary: Some(&data.vocabulary), ..LoadOptions::default() })?;
    println!("{} samples written to {} and read back", back.samples.len(), path.display());
    Ok(())
}
