//! Versioned binary checkpoints.
//!
//! Layout: `PGCK` magic, `u32` format version, `u64` header length, a JSON
//! header (configs, epoch, tensor names and shapes), the raw little-endian
//! `f64` data of parameters then Adam moments, and a SHA-256 trailer over
//! everything before it. Floats are stored bit-exactly so a reload resumes
//! training identically.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::model::ParagraphModel;
use crate::params::ParamStore;
use crate::tensor::Tensor;
use crate::training::{AdamState, TrainConfig, Trainer};

pub const MAGIC: &[u8; 4] = b"PGCK";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;
const PREFIX_LEN: usize = 4 + 4 + 8;

/// Everything needed to rebuild a [`Trainer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub params: ParamStore,
    pub adam: AdamState,
    /// Completed epochs. The per-epoch RNG streams derive from
    /// `train.seed` and the epoch, so this is the whole RNG state.
    pub epoch: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    model: ModelConfig,
    train: TrainConfig,
    epoch: usize,
    adam_steps: u64,
    tensors: Vec<TensorEntry>,
    /// Whether Adam moments follow the parameters.
    moments: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

impl Checkpoint {
    pub fn from_trainer(t: &Trainer) -> Self {
        Checkpoint {
            model: t.model.config.clone(),
            train: t.config.clone(),
            params: t.model.params.clone(),
            adam: t.adam.clone(),
            epoch: t.epoch,
        }
    }

    pub fn into_trainer(self) -> Result<Trainer> {
        let model = ParagraphModel::from_params(self.model, self.params)?;
        let mut trainer = Trainer::new(model, self.train)?;
        trainer.adam = self.adam;
        trainer.epoch = self.epoch;
        Ok(trainer)
    }

    pub fn into_model(self) -> Result<ParagraphModel> {
        ParagraphModel::from_params(self.model, self.params)
    }

    /// Serialises to bytes.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let moments = !self.adam.m.is_empty();
        if moments {
            for name in self.params.names() {
                if !self.adam.m.contains_key(name) || !self.adam.v.contains_key(name) {
                    return Err(Error::Checkpoint(format!("optimizer state lacks `{name}`")));
                }
            }
        }
        let header = Header {
            model: self.model.clone(),
            train: self.train.clone(),
            epoch: self.epoch,
            adam_steps: self.adam.t,
            tensors: self
                .params
                .iter()
                .map(|(name, t)| TensorEntry {
                    name: name.to_string(),
                    shape: t.shape().to_vec(),
                })
                .collect(),
            moments,
        };
        let json = serde_json::to_vec(&header)?;
        let floats = self.params.numel() * if moments { 3 } else { 1 };
        let mut out = Vec::with_capacity(PREFIX_LEN + json.len() + 8 * floats + DIGEST_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        let mut put = |xs: &[f64]| xs.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        for (_, t) in self.params.iter() {
            put(t.data());
        }
        if moments {
            for name in self.params.names() {
                put(&self.adam.m[name]);
            }
            for name in self.params.names() {
                put(&self.adam.v[name]);
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        Ok(out)
    }

    /// Parses bytes written by [`Checkpoint::to_bytes`]. Nothing is returned
    /// unless the whole file checks out.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_string());
        if bytes.len() < PREFIX_LEN + DIGEST_LEN {
            return Err(bad("file is truncated"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(bad("checksum mismatch (truncated or corrupted file)"));
        }
        let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let data_start = PREFIX_LEN
            .checked_add(header_len)
            .filter(|&e| e <= body.len())
            .ok_or_else(|| bad("header length exceeds file"))?;
        let header: Header = serde_json::from_slice(&body[PREFIX_LEN..data_start])
            .map_err(|e| Error::Checkpoint(format!("header: {e}")))?;

        let numel: usize = header
            .tensors
            .iter()
            .map(|t| t.shape.iter().product::<usize>())
            .sum();
        let floats = numel * if header.moments { 3 } else { 1 };
        let data = &body[data_start..];
        if data.len() != 8 * floats {
            return Err(Error::Checkpoint(format!(
                "expected {} data bytes, found {}",
                8 * floats,
                data.len()
            )));
        }
        let mut values = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<f64>>();

        let mut params = ParamStore::new();
        for entry in &header.tensors {
            if params.contains(&entry.name) {
                return Err(Error::Checkpoint(format!("duplicate tensor `{}`", entry.name)));
            }
            let n = entry.shape.iter().product();
            let t = Tensor::new(entry.shape.clone(), take(n))
                .map_err(|e| Error::Checkpoint(format!("tensor `{}`: {e}", entry.name)))?;
            params.insert(entry.name.clone(), t);
        }
        let mut adam = AdamState {
            t: header.adam_steps,
            ..AdamState::default()
        };
        if header.moments {
            for entry in &header.tensors {
                let n = entry.shape.iter().product();
                adam.m.insert(entry.name.clone(), take(n));
            }
            for entry in &header.tensors {
                let n = entry.shape.iter().product();
                adam.v.insert(entry.name.clone(), take(n));
            }
        }
        // Validates names and shapes against the hyperparameters.
        let model = ParagraphModel::from_params(header.model, params)?;
        Ok(Checkpoint {
            model: model.config,
            train: header.train,
            params: model.params,
            adam,
            epoch: header.epoch,
        })
    }

    /// Writes atomically: a temporary sibling file is renamed into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let tmp = path.with_extension("tmp");
        let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
