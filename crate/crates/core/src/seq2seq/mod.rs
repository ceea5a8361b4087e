//! Character-level encoder–decoder with stacked LSTM cells.
//!
//! The encoder reads the padded source left to right; the decoder starts from
//! the encoder's final `(h, c)` of every layer, is trained with teacher
//! forcing under a PAD-masked cross-entropy, and decodes greedily at inference.

mod checkpoint;
mod lstm;
mod model;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CheckpointError,
    FORMAT_VERSION, MAGIC,
};
pub use lstm::{lstm_step, LstmLayerParams};
pub use model::{
    batch_loss, decode_step, encode_sequence, infer, infer_many, infer_with, Batch, BatchStats,
    DecoderState, EncoderContext, ModelParams, Weights,
};
pub use train::{train, train_with, EpochRecord, PreparedData, RmsProp, TrainingTrace};

use crate::charcodec::CodecError;

#[derive(Debug, Error)]
pub enum Seq2SeqError {
    #[error("parallel lexicon is empty")]
    EmptyLexicon,
    #[error("lexicon entry {index}")]
    Entry {
        index: usize,
        #[source]
        source: CodecError,
    },
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid training config: {0}")]
    Config(String),
}

/// Starting weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initialization {
    /// Keras LSTM defaults: Glorot-uniform kernels, orthogonal recurrent
    /// kernels, unit forget-gate bias.
    Keras,
    /// Every weight uniform in `[-scale, scale)`.
    Uniform { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub num_layers: usize,
    pub seed: u64,
    pub validation_fraction: f64,
    pub init: Initialization,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 100,
            hidden_dim: 128,
            learning_rate: 0.001,
            rho: 0.9,
            epsilon: 1e-8,
            num_layers: 2,
            seed: 0,
            validation_fraction: 0.1,
            init: Initialization::Keras,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), Seq2SeqError> {
        let bad = |msg: &str| Err(Seq2SeqError::Config(msg.to_owned()));
        if self.batch_size == 0 || self.epochs == 0 || self.hidden_dim == 0 || self.num_layers == 0
        {
            return bad("batch_size, epochs, hidden_dim and num_layers must be positive");
        }
        if !(self.learning_rate > 0.0 && self.rho > 0.0 && self.epsilon > 0.0) {
            return bad("learning_rate, rho and epsilon must be positive");
        }
        if self.rho >= 1.0 {
            return bad("rho must be below 1");
        }
        if let Initialization::Uniform { scale } = self.init {
            if !(scale > 0.0 && scale.is_finite()) {
                return bad("uniform init scale must be positive");
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must be in [0, 1)");
        }
        Ok(())
    }
}
