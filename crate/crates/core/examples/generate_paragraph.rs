//! Greedy and sampled decoding from an untrained model, with the topic-level
//! diagnostics exposed by `GeneratedParagraph`.

use paragen::corpus::{generate_scene, grammar_vocabulary, scene_to_features};
use paragen::{DecodeMode, ModelConfig, ParagraphModel};

fn main() -> paragen::Result<()> {
    let vocab = grammar_vocabulary();
    let mut model = ParagraphModel::new(ModelConfig::new(32, 16, vocab.len()), 1)?;
    model.params.fill("topic.stop.bias", 2.0)?;
    let features = scene_to_features(&generate_scene(42), 32);

    for (label, mode) in [("greedy", DecodeMode::Greedy), ("sampled", DecodeMode::Sample { seed: 7 })] {
        let p = model.generate(&features, None, mode)?;
        println!("{label}: {} sentences", p.sentences.len());
        for s in &p.sentences {
            println!("  {}", vocab.decode(s)?.join(" "));
        }
    }
    Ok(())
}
