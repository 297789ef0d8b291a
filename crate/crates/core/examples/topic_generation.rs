//! Runs the topic net alone: continue probabilities, topics and the global
//! topic for one feature vector.

use paragen::topic::run_topic_net;
use paragen::{ModelConfig, ParagraphModel};

fn main() -> paragen::Result<()> {
    let mut model = ParagraphModel::new(ModelConfig::new(16, 8, 30), 4)?;
    let features: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).cos()).collect();
    // a positive stop bias keeps the recurrence going for a few steps
    model.params.fill("topic.stop.bias", 0.4)?;
    let topic_net = model.layers().topic;
    let bundle = run_topic_net(&topic_net, &model.params, &features, model.config.max_sentences, None)?;
    for (i, (u, t)) in bundle.continue_probs.iter().zip(&bundle.topics).enumerate() {
        println!("step {}: P(continue) = {u:.3}, |T| = {:.3}", i + 1, t.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    println!("global weights {:?}", bundle.weights);
    Ok(())
}
