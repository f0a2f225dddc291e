//! Lexicon-integrated convolutional sentence classifier: parallel
//! convolutions over a pretrained-embedding channel and a per-token
//! lexicon-score channel, masked max-over-time pooling, concatenation and a
//! dense softmax head. Forward, backward and training are implemented from
//! first principles.

mod encode;
mod net;

use thiserror::Error;

pub use encode::{encode, oov_vector, EncodedSentence};
pub use net::{gradient_check, metrics_csv, train, CnnModel, EpochMetrics, ForwardCache};

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("invalid CNN configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("{what}: expected {expected} columns, found {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("training dataset contains a single class")]
    SingleClass,
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("gradient checking requires dropout to be disabled (dropout_keep = 1.0)")]
    DropoutEnabled,
}

/// Architecture and training hyperparameters.
#[derive(Debug, Clone)]
pub struct CnnConfig {
    /// Convolution widths applied to both channels.
    pub filter_widths: Vec<usize>,
    /// Feature maps per width over the embedding channel.
    pub embed_feature_maps: usize,
    /// Feature maps per width over the lexicon channel.
    pub lex_feature_maps: usize,
    pub embed_dim: usize,
    pub epochs: usize,
    /// Train share of the dataset when the caller splits via this config.
    pub train_fraction: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Dropout keep probability on the pooled vector; 1.0 disables dropout.
    pub dropout_keep: f64,
    pub seed: u64,
    /// Fine-tune the embedding rows during training. Off by default: the
    /// pretrained vectors stay frozen.
    pub embeddings_trainable: bool,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            filter_widths: vec![3, 4, 5],
            embed_feature_maps: 64,
            lex_feature_maps: 9,
            embed_dim: 200,
            epochs: 100,
            train_fraction: 0.8,
            batch_size: 50,
            learning_rate: 1e-3,
            dropout_keep: 0.5,
            seed: 1,
            embeddings_trainable: false,
        }
    }
}

impl CnnConfig {
    pub fn validate(&self) -> Result<(), CnnError> {
        let fail = |reason: &str| Err(CnnError::InvalidConfig { reason: reason.into() });
        if self.filter_widths.is_empty() || self.filter_widths.contains(&0) {
            return fail("filter widths must be non-empty and >= 1");
        }
        if self.embed_feature_maps == 0 || self.lex_feature_maps == 0 {
            return fail("feature-map counts must be >= 1");
        }
        if self.embed_dim == 0 {
            return fail("embed_dim must be >= 1");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail("train_fraction must lie strictly between 0 and 1");
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return fail("dropout_keep must lie in (0, 1]");
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch_size must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return fail("learning_rate must be positive");
        }
        Ok(())
    }

    /// Length of the concatenated pooled vector:
    /// `Σ_widths (embed_feature_maps + lex_feature_maps)`.
    pub fn pooled_len(&self) -> usize {
        self.filter_widths.len() * (self.embed_feature_maps + self.lex_feature_maps)
    }
}
