//! Model hyperparameters shared by the nets, training and checkpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sentences per paragraph cap used throughout.
pub const DEFAULT_MAX_SENTENCES: usize = 6;
/// Words per sentence cap (EOS excluded).
pub const DEFAULT_MAX_WORDS: usize = 30;

/// Weights of the coupling objective `α‖T − x‖² + β‖C − x‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl CouplingWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let w = CouplingWeights { alpha, beta };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha.is_finite()
            && self.beta.is_finite()
            && self.alpha >= 0.0
            && self.beta >= 0.0
            && self.alpha + self.beta > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "coupling weights need alpha, beta >= 0 and not both zero (got {}, {})",
                self.alpha, self.beta
            )))
        }
    }
}

impl Default for CouplingWeights {
    fn default() -> Self {
        CouplingWeights {
            alpha: 1.0,
            beta: 1.5,
        }
    }
}

fn default_max_sentences() -> usize {
    DEFAULT_MAX_SENTENCES
}

fn default_max_words() -> usize {
    DEFAULT_MAX_WORDS
}

/// Architecture of a paragraph model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Width `I` of the pooled feature vector.
    pub feature_dim: usize,
    /// Hidden width `H` of every recurrent and topic layer.
    pub hidden: usize,
    /// Vocabulary size `V`, reserved ids included.
    pub vocab_size: usize,
    #[serde(default = "default_max_sentences")]
    pub max_sentences: usize,
    #[serde(default = "default_max_words")]
    pub max_words: usize,
    #[serde(default)]
    pub coupling: CouplingWeights,
    /// Replace every coherence vector by zeros.
    #[serde(default)]
    pub no_coherence: bool,
    /// Replace the global topic vector by zeros.
    #[serde(default)]
    pub no_global: bool,
    /// Condition the first sentence-RNN state on a 1–5 star rating.
    #[serde(default)]
    pub stars: bool,
    /// Add the variational encoder head and latent injection layer.
    #[serde(default)]
    pub vae: bool,
}

impl ModelConfig {
    pub fn new(feature_dim: usize, hidden: usize, vocab_size: usize) -> Self {
        ModelConfig {
            feature_dim,
            hidden,
            vocab_size,
            max_sentences: DEFAULT_MAX_SENTENCES,
            max_words: DEFAULT_MAX_WORDS,
            coupling: CouplingWeights::default(),
            no_coherence: false,
            no_global: false,
            stars: false,
            vae: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.hidden == 0 {
            return Err(Error::Config("feature_dim and hidden must be positive".into()));
        }
        if self.vocab_size <= crate::corpus::EOS {
            return Err(Error::Config(format!(
                "vocab_size must exceed the reserved ids, got {}",
                self.vocab_size
            )));
        }
        if self.max_sentences == 0 {
            return Err(Error::Config("max_sentences must be at least 1".into()));
        }
        if self.max_words == 0 {
            return Err(Error::Config("max_words must be at least 1".into()));
        }
        self.coupling
            .validate()
            .map_err(|e| Error::Config(format!("coupling: {e}")))
    }
}
