//! Vocabularies, paragraph samples, the JSON-lines dataset format and a
//! synthetic scene → paragraph generator.
//!
//! Dataset files hold one sample per line:
//!
//! ```text
//! {"id": "scene-0", "features": [0.1, ...], "sentences": [["a", "red", "car"], ...], "stars": 4}
//! ```
//!
//! `id` and `stars` are optional. Vocabulary files list one token per line;
//! the line number is the token id, and lines 0, 1, 2 are `<pad>`, `<bos>`
//! and `<eos>`.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{DEFAULT_MAX_SENTENCES, DEFAULT_MAX_WORDS};
use crate::error::{Error, Result};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const RESERVED: [&str; 3] = ["<pad>", "<bos>", "<eos>"];
pub const UNK_TOKEN: &str = "<unk>";

/// Bidirectional token ↔ id map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    /// A vocabulary holding only the reserved tokens.
    pub fn new() -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for t in RESERVED {
            v.push(t);
        }
        v
    }

    fn push(&mut self, token: &str) -> usize {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    /// Adds `token` if absent and returns its id.
    pub fn insert(&mut self, token: &str) -> usize {
        self.push(token)
    }

    /// Builds a vocabulary from tokenised sentences. With `max_size`, only the
    /// most frequent tokens are kept (ties by first appearance) and `<unk>`
    /// takes the first id after the reserved ones.
    pub fn build<'a, I>(tokens: I, max_size: Option<usize>) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut order: Vec<&str> = Vec::new();
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for t in tokens {
            if RESERVED.contains(&t) {
                continue;
            }
            let c = counts.entry(t).or_insert(0);
            if *c == 0 {
                order.push(t);
            }
            *c += 1;
        }
        let mut vocab = Vocabulary::new();
        match max_size {
            Some(cap) if cap < order.len() + RESERVED.len() => {
                vocab.push(UNK_TOKEN);
                let mut ranked: Vec<(usize, &str)> = order.iter().enumerate().map(|(i, t)| (i, *t)).collect();
                ranked.sort_by(|a, b| counts[b.1].cmp(&counts[a.1]).then(a.0.cmp(&b.0)));
                let room = cap.saturating_sub(vocab.len());
                for (_, t) in ranked.into_iter().take(room) {
                    vocab.push(t);
                }
            }
            _ => {
                for t in order {
                    vocab.push(t);
                }
            }
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Maps a token to its id, falling back to `<unk>` when present.
    pub fn encode_token(&self, token: &str) -> Result<usize> {
        self.id(token)
            .or_else(|| self.id(UNK_TOKEN))
            .ok_or_else(|| Error::UnknownToken {
                token: token.to_string(),
            })
    }

    pub fn encode(&self, sentence: &[String]) -> Result<Vec<usize>> {
        sentence.iter().map(|t| self.encode_token(t)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Result<Vec<String>> {
        ids.iter()
            .map(|&id| {
                self.token(id)
                    .map(str::to_string)
                    .ok_or(Error::TokenOutOfRange {
                        id,
                        size: self.len(),
                    })
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        for t in &self.tokens {
            writeln!(out, "{t}").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let shown = path.display().to_string();
        let mut vocab = Vocabulary {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let token = line.trim_end_matches('\r');
            let parse_err = |message: String| Error::Parse {
                path: shown.clone(),
                line: i + 1,
                message,
            };
            if i < RESERVED.len() && token != RESERVED[i] {
                return Err(parse_err(format!(
                    "reserved id {i} must be `{}`, found `{token}`",
                    RESERVED[i]
                )));
            }
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(parse_err(format!("invalid token `{token}`")));
            }
            if vocab.index.contains_key(token) {
                return Err(parse_err(format!("duplicate token `{token}`")));
            }
            vocab.push(token);
        }
        if vocab.len() < RESERVED.len() {
            return Err(Error::Parse {
                path: shown,
                line: vocab.len() + 1,
                message: "vocabulary is missing reserved tokens".into(),
            });
        }
        Ok(vocab)
    }
}

/// One image/paragraph training pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ParagraphSample {
    pub id: String,
    pub features: Vec<f64>,
    /// Token ids per sentence, EOS excluded.
    pub sentences: Vec<Vec<usize>>,
    pub stars: Option<u8>,
    /// Generating scene, for synthetic data.
    pub scene: Option<Scene>,
}

impl ParagraphSample {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Sentences concatenated, for n-gram metrics.
    pub fn flat_tokens(&self) -> Vec<usize> {
        self.sentences.concat()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    features: Vec<f64>,
    sentences: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stars: Option<u8>,
}

/// Limits and expectations applied while loading a dataset.
#[derive(Debug, Clone)]
pub struct LoadOptions<'v> {
    /// Validate against this vocabulary instead of building one.
    pub vocabulary: Option<&'v Vocabulary>,
    pub feature_dim: Option<usize>,
    pub max_sentences: usize,
    pub max_words: usize,
    /// Cap for a vocabulary built from the file.
    pub max_vocab: Option<usize>,
}

impl Default for LoadOptions<'_> {
    fn default() -> Self {
        LoadOptions {
            vocabulary: None,
            feature_dim: None,
            max_sentences: DEFAULT_MAX_SENTENCES,
            max_words: DEFAULT_MAX_WORDS,
            max_vocab: None,
        }
    }
}

/// A loaded dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub vocabulary: Vocabulary,
    pub samples: Vec<ParagraphSample>,
}

impl Dataset {
    pub fn feature_dim(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    pub fn uses_stars(&self) -> bool {
        self.samples.iter().any(|s| s.stars.is_some())
    }
}

/// Reads a JSON-lines dataset. Malformed lines are rejected with their
/// 1-based line number.
pub fn load_dataset(path: &Path, opts: &LoadOptions<'_>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let shown = path.display().to_string();
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: shown.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push((i + 1, rec));
    }
    parse_records(&shown, records, opts)
}

fn parse_records(shown: &str, records: Vec<(usize, SampleRecord)>, opts: &LoadOptions<'_>) -> Result<Dataset> {
    let vocabulary = match opts.vocabulary {
        Some(v) => v.clone(),
        None => Vocabulary::build(
            records
                .iter()
                .flat_map(|(_, r)| r.sentences.iter().flatten().map(String::as_str)),
            opts.max_vocab,
        ),
    };
    let mut feature_dim = opts.feature_dim;
    let mut samples = Vec::with_capacity(records.len());
    for (index, (line, rec)) in records.into_iter().enumerate() {
        let err = |message: String| Error::Parse {
            path: shown.to_string(),
            line,
            message,
        };
        if rec.features.is_empty() {
            return Err(err("`features` is empty".into()));
        }
        if let Some(bad) = rec.features.iter().position(|x| !x.is_finite()) {
            return Err(err(format!("feature {bad} is not finite")));
        }
        match feature_dim {
            Some(d) if d != rec.features.len() => {
                return Err(err(format!(
                    "expected {d} features, found {}",
                    rec.features.len()
                )))
            }
            None => feature_dim = Some(rec.features.len()),
            _ => {}
        }
        if rec.sentences.is_empty() || rec.sentences.len() > opts.max_sentences {
            return Err(err(format!(
                "paragraph must have 1..={} sentences, found {}",
                opts.max_sentences,
                rec.sentences.len()
            )));
        }
        let mut sentences = Vec::with_capacity(rec.sentences.len());
        for (si, s) in rec.sentences.iter().enumerate() {
            if s.is_empty() || s.len() > opts.max_words {
                return Err(err(format!(
                    "sentence {si} must have 1..={} tokens, found {}",
                    opts.max_words,
                    s.len()
                )));
            }
            let mut ids = Vec::with_capacity(s.len());
            for t in s {
                if RESERVED.contains(&t.as_str()) {
                    return Err(err(format!("reserved token `{t}` inside a sentence")));
                }
                ids.push(
                    vocabulary
                        .encode_token(t)
                        .map_err(|_| err(format!("token `{t}` is not in the vocabulary")))?,
                );
            }
            sentences.push(ids);
        }
        if let Some(s) = rec.stars {
            if !(1..=5).contains(&s) {
                return Err(err(format!("stars must be 1..=5, found {s}")));
            }
        }
        samples.push(ParagraphSample {
            id: rec.id.unwrap_or_else(|| index.to_string()),
            features: rec.features,
            sentences,
            stars: rec.stars,
            scene: None,
        });
    }
    Ok(Dataset {
        vocabulary,
        samples,
    })
}

/// Writes samples in the JSON-lines format.
pub fn save_dataset(path: &Path, samples: &[ParagraphSample], vocab: &Vocabulary) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for s in samples {
        let rec = SampleRecord {
            id: Some(s.id.clone()),
            features: s.features.clone(),
            sentences: s
                .sentences
                .iter()
                .map(|ids| vocab.decode(ids))
                .collect::<Result<_>>()?,
            stars: s.stars,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Synthetic scenes

/// Scene category with its allowed objects.
#[derive(Debug, Clone, Copy)]
pub struct MetaConcept {
    pub name: &'static str,
    /// Surface words used for the concept in paragraphs.
    pub words: [&'static str; 2],
    pub objects: [&'static str; 6],
}

pub const META_CONCEPTS: [MetaConcept; 6] = [
    MetaConcept {
        name: "city",
        words: ["city", "street"],
        objects: ["car", "bus", "building", "man", "sign", "bicycle"],
    },
    MetaConcept {
        name: "office",
        words: ["office", "workplace"],
        objects: ["desk", "chair", "computer", "lamp", "printer", "phone"],
    },
    MetaConcept {
        name: "kitchen",
        words: ["kitchen", "cooking"],
        objects: ["stove", "sink", "table", "plate", "cup", "fridge"],
    },
    MetaConcept {
        name: "park",
        words: ["park", "garden"],
        objects: ["tree", "bench", "dog", "path", "bird", "fountain"],
    },
    MetaConcept {
        name: "beach",
        words: ["beach", "seaside"],
        objects: ["umbrella", "boat", "towel", "shell", "surfboard", "chair"],
    },
    MetaConcept {
        name: "farm",
        words: ["farm", "countryside"],
        objects: ["cow", "barn", "fence", "horse", "tractor", "dog"],
    },
];

pub const ATTRIBUTES: [&str; 10] = [
    "red", "blue", "green", "white", "black", "small", "large", "old", "new", "yellow",
];

const RELATIONS: [&str; 5] = ["near", "beside", "behind", "above", "below"];
const VERBS: [&str; 3] = ["is", "sits", "stands"];
const MEDIA: [&str; 3] = ["picture", "photo", "image"];
const OPENERS: [&str; 2] = ["this", "the"];

/// Sentiment words by star rating; ratings 1 and 5 share no words.
pub const SENTIMENT: [[&str; 2]; 5] = [
    ["terrible", "awful"],
    ["poor", "dull"],
    ["okay", "decent"],
    ["good", "nice"],
    ["great", "excellent"],
];

/// A latent scene: a meta-concept and 2–4 of its objects, each with an attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub meta: usize,
    /// `(object index within the meta-concept, attribute index)`.
    pub objects: Vec<(usize, usize)>,
    pub seed: u64,
}

impl Scene {
    pub fn meta_concept(&self) -> &'static MetaConcept {
        &META_CONCEPTS[self.meta]
    }

    pub fn object_word(&self, slot: usize) -> &'static str {
        self.meta_concept().objects[self.objects[slot].0]
    }

    pub fn attribute_word(&self, slot: usize) -> &'static str {
        ATTRIBUTES[self.objects[slot].1]
    }
}

/// Deterministic scene draw from `seed`.
pub fn generate_scene(seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = rng.random_range(0..META_CONCEPTS.len());
    let count = rng.random_range(2..=4);
    let mut pool: Vec<usize> = (0..META_CONCEPTS[meta].objects.len()).collect();
    pool.shuffle(&mut rng);
    let objects = pool[..count]
        .iter()
        .map(|&o| (o, rng.random_range(0..ATTRIBUTES.len())))
        .collect();
    Scene { meta, objects, seed }
}

const EMBEDDING_SEED: u64 = 0x7061_7261_6765_6e00;
const FEATURE_SCALE: f64 = 0.5;
const FEATURE_NOISE: f64 = 0.1;

fn fixed_embedding(kind: u64, id: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(EMBEDDING_SEED ^ (kind << 32) ^ id);
    let normal = Normal::new(0.0, FEATURE_SCALE).expect("valid normal");
    (0..dim).map(|_| normal.sample(&mut rng)).collect()
}

/// Pooled feature vector for a scene: fixed embeddings of the meta-concept,
/// each object and each object/attribute pairing, plus N(0, 0.1²) noise
/// seeded by the scene.
pub fn scene_to_features(scene: &Scene, dim: usize) -> Vec<f64> {
    let mut v = fixed_embedding(1, scene.meta as u64, dim);
    let mut add = |e: Vec<f64>| v.iter_mut().zip(e).for_each(|(a, b)| *a += b);
    for &(obj, attr) in &scene.objects {
        let global_obj = (scene.meta * 6 + obj) as u64;
        add(fixed_embedding(2, global_obj, dim));
        add(fixed_embedding(3, global_obj * ATTRIBUTES.len() as u64 + attr as u64, dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    rng.set_stream(1);
    let noise = Normal::new(0.0, FEATURE_NOISE).expect("valid normal");
    v.iter_mut().for_each(|x| *x += noise.sample(&mut rng));
    v
}

type Paragraph = Vec<Vec<String>>;

fn words(ws: &[&str]) -> Vec<String> {
    ws.iter().map(|w| w.to_string()).collect()
}

fn one_paragraph(scene: &Scene, stars: Option<u8>, rng: &mut ChaCha8Rng) -> Paragraph {
    let meta = scene.meta_concept();
    let mut order: Vec<usize> = (0..scene.objects.len()).collect();
    order.shuffle(rng);
    let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| *xs.choose(rng).expect("nonempty");

    let first = order[0];
    let mut s1 = vec![pick(rng, &OPENERS), pick(rng, &MEDIA), "shows", "a"];
    if let Some(s) = stars {
        s1.push(pick(rng, &SENTIMENT[usize::from(s - 1)]));
    }
    s1.extend([
        pick(rng, &meta.words),
        "scene",
        "with",
        "a",
        scene.attribute_word(first),
        scene.object_word(first),
        ".",
    ]);
    let mut paragraph = vec![words(&s1)];

    // each later sentence opens with the object that closed the previous one
    for step in 1..3 {
        let prev = order[(step - 1) % order.len()];
        let next = order[step % order.len()];
        let s = [
            "the",
            scene.object_word(prev),
            pick(rng, &VERBS),
            pick(rng, &RELATIONS),
            "a",
            scene.attribute_word(next),
            scene.object_word(next),
            ".",
        ];
        paragraph.push(words(&s));
    }
    paragraph
}

/// `k` distinct reference paragraphs for `scene`, three sentences each.
///
/// Sentence `i` repeats the object named at the end of sentence `i − 1`.
/// With a star rating, the first sentence carries a sentiment word for it.
pub fn scene_to_paragraphs(scene: &Scene, k: usize, stars: Option<u8>) -> Result<Vec<Paragraph>> {
    if k == 0 {
        return Err(Error::contract("need at least one reference paragraph"));
    }
    if let Some(s) = stars {
        if !(1..=5).contains(&s) {
            return Err(Error::contract(format!("star rating must be 1..=5, got {s}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    rng.set_stream(2);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k * 1000 {
        let p = one_paragraph(scene, stars, &mut rng);
        if seen.insert(p.clone()) {
            out.push(p);
            if out.len() == k {
                return Ok(out);
            }
        }
    }
    Err(Error::contract(format!(
        "scene admits fewer than {k} distinct paragraphs"
    )))
}

/// Every token the synthetic grammar can emit, in a fixed order.
pub fn grammar_tokens() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    out.extend(OPENERS);
    out.extend(MEDIA);
    out.extend(["shows", "a", "scene", "with", ".", "the"]);
    for m in &META_CONCEPTS {
        out.extend(m.words);
        out.extend(m.objects);
    }
    out.extend(ATTRIBUTES);
    out.extend(VERBS);
    out.extend(RELATIONS);
    for s in &SENTIMENT {
        out.extend(s);
    }
    out
}

/// Vocabulary of the synthetic grammar.
pub fn grammar_vocabulary() -> Vocabulary {
    Vocabulary::build(grammar_tokens(), None)
}

/// Parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub scenes: usize,
    #[serde(default = "one")]
    pub references_per_scene: usize,
    pub feature_dim: usize,
    /// Draw a 1–5 star rating per scene and inject sentiment words.
    #[serde(default)]
    pub stars: bool,
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            scenes: 10,
            references_per_scene: 1,
            feature_dim: 64,
            stars: false,
            seed: 0,
        }
    }
}

/// Generates a corpus as a pure function of `spec`. Every reference becomes
/// its own sample; samples of one scene share id and features.
pub fn synthetic_corpus(spec: &CorpusSpec) -> Result<Dataset> {
    if spec.feature_dim == 0 {
        return Err(Error::contract("feature_dim must be positive"));
    }
    let vocabulary = grammar_vocabulary();
    let mut master = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut samples = Vec::with_capacity(spec.scenes * spec.references_per_scene);
    for i in 0..spec.scenes {
        let scene = generate_scene(master.next_u64());
        let stars = spec.stars.then(|| master.random_range(1..=5u8));
        let features = scene_to_features(&scene, spec.feature_dim);
        for p in scene_to_paragraphs(&scene, spec.references_per_scene, stars)? {
            samples.push(ParagraphSample {
                id: format!("scene-{i}"),
                features: features.clone(),
                sentences: p
                    .iter()
                    .map(|s| vocabulary.encode(s))
                    .collect::<Result<_>>()?,
                stars,
                scene: Some(scene.clone()),
            });
        }
    }
    Ok(Dataset {
        vocabulary,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_is_deterministic() {
        assert_eq!(generate_scene(42), generate_scene(42));
    }

    #[test]
    fn scenes_respect_grammar() {
        for seed in 0..500 {
            let s = generate_scene(seed);
            assert!((2..=4).contains(&s.objects.len()));
            let objs: BTreeSet<usize> = s.objects.iter().map(|o| o.0).collect();
            assert_eq!(objs.len(), s.objects.len());
        }
    }

    #[test]
    fn every_meta_concept_covered() {
        let mut seen = [false; 6];
        for seed in 0..1000 {
            seen[generate_scene(seed).meta] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn distinct_seeds_rarely_collide() {
        let scenes: Vec<Scene> = (0..1000).map(generate_scene).collect();
        let mut collisions = 0;
        for w in scenes.windows(2) {
            if w[0].meta == w[1].meta && w[0].objects == w[1].objects {
                collisions += 1;
            }
        }
        assert!(collisions < 10, "{collisions}");
    }

    #[test]
    fn single_reference_has_three_sentences() {
        let p = scene_to_paragraphs(&generate_scene(3), 1, None).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].len(), 3);
    }

    #[test]
    fn sentences_chain_topics() {
        for seed in 0..200 {
            let scene = generate_scene(seed);
            for p in scene_to_paragraphs(&scene, 3, None).unwrap() {
                for w in p.windows(2) {
                    let closing = &w[0][w[0].len() - 2];
                    assert_eq!(&w[1][1], closing);
                }
            }
        }
    }

    #[test]
    fn star_sentiment_sets_are_disjoint() {
        let scene = generate_scene(9);
        let low: BTreeSet<String> = scene_to_paragraphs(&scene, 5, Some(1)).unwrap().concat().concat().into_iter().collect();
        let high: BTreeSet<String> = scene_to_paragraphs(&scene, 5, Some(5)).unwrap().concat().concat().into_iter().collect();
        assert!(low.iter().any(|w| SENTIMENT[0].contains(&w.as_str())));
        assert!(high.iter().any(|w| SENTIMENT[4].contains(&w.as_str())));
        assert!(!low.iter().any(|w| SENTIMENT[4].contains(&w.as_str())));
        assert!(!high.iter().any(|w| SENTIMENT[0].contains(&w.as_str())));
    }

    #[test]
    fn grammar_covers_generated_tokens() {
        let vocab = grammar_vocabulary();
        let d = synthetic_corpus(&CorpusSpec {
            scenes: 50,
            references_per_scene: 2,
            feature_dim: 8,
            stars: true,
            seed: 1,
        })
        .unwrap();
        assert_eq!(d.vocabulary, vocab);
        for s in &d.samples {
            assert!(s.sentences.len() <= DEFAULT_MAX_SENTENCES);
            assert!(s.sentences.iter().all(|x| !x.is_empty() && x.len() <= DEFAULT_MAX_WORDS));
        }
    }

    #[test]
    fn vocabulary_cap_keeps_frequent_tokens() {
        let toks = ["a", "b", "a", "c", "a", "b"];
        let v = Vocabulary::build(toks, Some(5));
        assert_eq!(v.tokens(), &["<pad>", "<bos>", "<eos>", "<unk>", "a"]);
        assert_eq!(v.encode_token("c").unwrap(), 3);
        let full = Vocabulary::build(toks, None);
        assert_eq!(full.len(), 6);
        assert!(full.encode_token("zzz").is_err());
    }

    #[test]
    fn features_are_deterministic() {
        let s = generate_scene(5);
        assert_eq!(scene_to_features(&s, 16), scene_to_features(&s, 16));
        assert_eq!(scene_to_features(&s, 1024).len(), 1024);
    }
}
