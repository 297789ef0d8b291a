//! BLEU, CIDEr-D and self-BLEU on a hand-written corpus.

use paragen::metrics::{bleu, cider, self_bleu, EvalPair};
use paragen::Vocabulary;

fn main() -> paragen::Result<()> {
    let mut vocab = Vocabulary::new();
    let mut ids = |text: &str| text.split_whitespace().map(|t| vocab.insert(t)).collect::<Vec<_>>();
    let corpus = vec![
        EvalPair::new(
            ids("the cat sat on the mat"),
            vec![ids("the cat is on the mat"), ids("there is a cat on the mat")],
        )?,
        EvalPair::new(ids("a dog runs in the park"), vec![ids("a dog is running in the park")])?,
        EvalPair::new(ids("two birds on a wire"), vec![ids("two small birds sit on a wire")])?,
    ];
    for n in 1..=4 {
        println!("BLEU-{n}: {:.4}", bleu(&corpus, n)?);
    }
    println!("CIDEr-D: {:.4}", cider(&corpus)?);
    let samples = vec![ids("a red car is parked"), ids("a red car is waiting"), ids("the street is empty")];
    println!("self-BLEU-2 of three samples: {:.4}", self_bleu(&samples, 2)?);
    Ok(())
}
