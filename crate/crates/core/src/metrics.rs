//! Corpus BLEU, CIDEr-D and self-BLEU over token-id paragraphs.
//!
//! Paragraphs are scored with their sentences concatenated; sentence
//! boundaries do not block n-grams.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

/// A candidate paragraph and its references, all as flat token-id lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub candidate: Vec<usize>,
    pub references: Vec<Vec<usize>>,
}

impl EvalPair {
    pub fn new(candidate: Vec<usize>, references: Vec<Vec<usize>>) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::contract("an evaluation pair needs at least one reference"));
        }
        Ok(EvalPair {
            candidate,
            references,
        })
    }
}

/// Counts of all n-grams of one order.
pub type NGramCounts = HashMap<Vec<usize>, usize>;

pub fn ngram_counts(tokens: &[usize], n: usize) -> NGramCounts {
    let mut counts = NGramCounts::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

fn check_corpus(corpus: &[EvalPair]) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::contract("empty evaluation corpus"));
    }
    if corpus.iter().any(|p| p.references.is_empty()) {
        return Err(Error::contract("an evaluation pair has no references"));
    }
    Ok(())
}

/// Reference length closest to `c`; ties go to the shorter reference.
fn closest_ref_len(c: usize, refs: &[Vec<usize>]) -> usize {
    refs.iter()
        .map(Vec::len)
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0)
}

/// Corpus BLEU-n: geometric mean of clipped k-gram precisions for
/// `k = 1..=n` times the brevity penalty. No smoothing, so any zero
/// precision gives 0.
pub fn bleu(corpus: &[EvalPair], n: usize) -> Result<f64> {
    if !(1..=4).contains(&n) {
        return Err(Error::contract(format!("BLEU order must be 1..=4, got {n}")));
    }
    check_corpus(corpus)?;
    let mut matched = vec![0usize; n];
    let mut total = vec![0usize; n];
    let (mut c, mut r) = (0usize, 0usize);
    for pair in corpus {
        c += pair.candidate.len();
        r += closest_ref_len(pair.candidate.len(), &pair.references);
        for k in 1..=n {
            let cand = ngram_counts(&pair.candidate, k);
            let mut max_ref: HashMap<&[usize], usize> = HashMap::new();
            for reference in &pair.references {
                for (g, cnt) in ngram_counts(reference, k) {
                    if let Some((key, _)) = cand.get_key_value(&g) {
                        let e = max_ref.entry(key.as_slice()).or_insert(0);
                        *e = (*e).max(cnt);
                    }
                }
            }
            for (g, cnt) in &cand {
                matched[k - 1] += (*cnt).min(max_ref.get(g.as_slice()).copied().unwrap_or(0));
                total[k - 1] += cnt;
            }
        }
    }
    if c == 0 || matched.iter().any(|&m| m == 0) {
        return Ok(0.0);
    }
    let log_p: f64 = matched
        .iter()
        .zip(&total)
        .map(|(&m, &t)| (m as f64 / t as f64).ln())
        .sum::<f64>()
        / n as f64;
    let bp = (1.0 - r as f64 / c as f64).min(0.0);
    Ok((log_p + bp).exp())
}

/// Mean BLEU-n of each paragraph against all the others.
pub fn self_bleu(paragraphs: &[Vec<usize>], n: usize) -> Result<f64> {
    if paragraphs.len() < 2 {
        return Err(Error::contract("self-BLEU needs at least two paragraphs"));
    }
    let mut sum = 0.0;
    for (i, p) in paragraphs.iter().enumerate() {
        let others = paragraphs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, q)| q.clone())
            .collect();
        sum += bleu(&[EvalPair::new(p.clone(), others)?], n)?;
    }
    Ok(sum / paragraphs.len() as f64)
}

const CIDER_N: usize = 4;
const CIDER_SIGMA: f64 = 6.0;

/// TF-IDF vectors of one text, per n-gram order.
struct TfIdf {
    vecs: Vec<HashMap<Vec<usize>, f64>>,
    norms: Vec<f64>,
    len: usize,
}

fn tfidf(tokens: &[usize], df: &HashMap<Vec<usize>, usize>, log_n: f64) -> TfIdf {
    let mut vecs = Vec::with_capacity(CIDER_N);
    let mut norms = Vec::with_capacity(CIDER_N);
    for k in 1..=CIDER_N {
        let v: HashMap<Vec<usize>, f64> = ngram_counts(tokens, k)
            .into_iter()
            .map(|(g, tf)| {
                let d = df.get(&g).copied().unwrap_or(0).max(1) as f64;
                let w = tf as f64 * (log_n - d.ln());
                (g, w)
            })
            .collect();
        norms.push(v.values().map(|x| x * x).sum::<f64>().sqrt());
        vecs.push(v);
    }
    TfIdf {
        vecs,
        norms,
        len: tokens.len(),
    }
}

/// Clipped, length-penalised cosine per n-gram order.
fn cider_sim(hyp: &TfIdf, reference: &TfIdf) -> [f64; CIDER_N] {
    let delta = hyp.len as f64 - reference.len as f64;
    let penalty = (-(delta * delta) / (2.0 * CIDER_SIGMA * CIDER_SIGMA)).exp();
    let mut out = [0.0; CIDER_N];
    for k in 0..CIDER_N {
        let mut val = 0.0;
        for (g, h) in &hyp.vecs[k] {
            if let Some(r) = reference.vecs[k].get(g) {
                val += h.min(*r) * r;
            }
        }
        if hyp.norms[k] != 0.0 && reference.norms[k] != 0.0 {
            val /= hyp.norms[k] * reference.norms[k];
        }
        out[k] = val * penalty;
    }
    out
}

/// CIDEr-D per pair. Document frequencies count the pairs whose reference
/// set contains each n-gram; the corpus size is the number of pairs.
pub fn cider_per_pair(corpus: &[EvalPair]) -> Result<Vec<f64>> {
    check_corpus(corpus)?;
    let distinct: HashSet<&Vec<usize>> = corpus.iter().flat_map(|p| &p.references).collect();
    if distinct.len() < 2 {
        return Err(Error::contract(
            "CIDEr needs at least two distinct references to define document frequencies",
        ));
    }
    let mut df: HashMap<Vec<usize>, usize> = HashMap::new();
    for pair in corpus {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for reference in &pair.references {
            for k in 1..=CIDER_N {
                seen.extend(ngram_counts(reference, k).into_keys());
            }
        }
        for g in seen {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    let log_n = (corpus.len() as f64).ln();
    Ok(corpus
        .iter()
        .map(|pair| {
            let hyp = tfidf(&pair.candidate, &df, log_n);
            let mut acc = 0.0;
            for reference in &pair.references {
                let r = tfidf(reference, &df, log_n);
                acc += cider_sim(&hyp, &r).iter().sum::<f64>() / CIDER_N as f64;
            }
            10.0 * acc / pair.references.len() as f64
        })
        .collect())
}

/// Corpus CIDEr-D: the mean of the per-pair scores.
pub fn cider(corpus: &[EvalPair]) -> Result<f64> {
    let scores = cider_per_pair(corpus)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}
