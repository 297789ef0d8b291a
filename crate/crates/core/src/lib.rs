//! Hierarchical paragraph generation from a pooled image feature vector.
//!
//! A topic network unrolls one topic vector per sentence, a global topic
//! summarises them, and a two-layer word RNN realises each sentence from a
//! topic coupled with a coherence vector carried over from the previous
//! sentence. An optional variational head turns the generator into a
//! sampler of diverse paragraphs.
//!
//! Everything is built on a small reverse-mode autodiff tape over `f64`
//! tensors, checked against finite differences.

pub mod autodiff;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod gradcheck;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod params;
pub mod sentence;
pub mod tensor;
pub mod topic;
pub mod training;
pub mod vae;

pub use autodiff::{Gradients, Tape, Var};
pub use checkpoint::Checkpoint;
pub use config::{CouplingWeights, ModelConfig};
pub use corpus::{Dataset, ParagraphSample, Vocabulary};
pub use error::{Error, Result};
pub use model::{DecodeMode, GeneratedParagraph, ParagraphModel};
pub use params::{Binder, ParamStore};
pub use tensor::Tensor;
pub use training::{TrainConfig, Trainer};
