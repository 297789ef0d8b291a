//! The coupling unit's closed form and the global topic vector.

use paragen::sentence::couple_values;
use paragen::topic::global_topic_values;
use paragen::CouplingWeights;

fn main() -> paragen::Result<()> {
    let topic = [1.0, 0.0, 2.0];
    let coherence = [0.0, 1.0, -1.0];
    for (alpha, beta) in [(1.0, 0.0), (1.0, 1.5), (1.0, 3.0), (0.0, 1.0)] {
        let w = CouplingWeights::new(alpha, beta)?;
        println!("alpha {alpha}, beta {beta}: {:?}", couple_values(&topic, &coherence, w)?);
    }

    let (g, weights) = global_topic_values(&[vec![3.0, 0.0], vec![0.0, 1.0]])?;
    println!("global topic {g:?} with weights {weights:?}");
    Ok(())
}
