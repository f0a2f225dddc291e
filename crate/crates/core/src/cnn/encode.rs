//! Sentence encoding for the convolutional classifier: a pretrained-embedding
//! channel plus one lexicon-score column per lexicon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{word_seed, EmbeddingModel};
use crate::lexicon::Lexicon;
use crate::linalg::Mat;
use crate::scalar::{cast, Real};

/// A sentence padded/truncated to a fixed length. Both channels share the
/// row count; padding rows are all-zero and masked out.
#[derive(Debug, Clone)]
pub struct EncodedSentence<S> {
    embed: Mat<S>,
    lex: Mat<S>,
    mask: Vec<bool>,
    /// Stable per-token hash for each valid row, used when embeddings are
    /// fine-tuned.
    token_keys: Vec<u64>,
}

impl<S: Real> EncodedSentence<S> {
    pub fn max_len(&self) -> usize {
        self.mask.len()
    }

    pub fn n_valid(&self) -> usize {
        self.token_keys.len()
    }

    pub fn embed_channel(&self) -> &Mat<S> {
        &self.embed
    }

    pub fn lex_channel(&self) -> &Mat<S> {
        &self.lex
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn token_keys(&self) -> &[u64] {
        &self.token_keys
    }

    pub(crate) fn embed_row(&self, pos: usize) -> &[S] {
        self.embed.row(pos)
    }

    pub(crate) fn lex_row(&self, pos: usize) -> &[S] {
        self.lex.row(pos)
    }

    pub(crate) fn set_embed(&mut self, pos: usize, dim: usize, value: S) {
        self.embed.set(pos, dim, value);
    }
}

/// Deterministic vector for an out-of-vocabulary word: uniform in
/// `(-0.25/dim, +0.25/dim)`, seeded by hashing the word with the run seed.
pub fn oov_vector<S: Real>(word: &str, dim: usize, seed: u64) -> Vec<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(word_seed(word, seed));
    let half = 0.25 / dim as f64;
    (0..dim).map(|_| cast(rng.gen_range(-half..half))).collect()
}

/// Encodes `tokens` against a pretrained model and a stack of lexicons.
/// Known words copy their vector; unknown words get a fixed random vector;
/// the lexicon channel carries each token's score per lexicon (0 when
/// unlisted). Sentences are truncated or padded to `max_len`.
pub fn encode<S: Real>(
    tokens: &[String],
    model: &EmbeddingModel<S>,
    lexicons: &[Lexicon],
    max_len: usize,
    seed: u64,
) -> EncodedSentence<S> {
    let dim = model.dim();
    let n = tokens.len().min(max_len);
    let mut embed = Mat::zeros(max_len, dim);
    let mut lex = Mat::zeros(max_len, lexicons.len());
    let mut mask = vec![false; max_len];
    let mut token_keys = Vec::with_capacity(n);

    for (pos, token) in tokens.iter().take(max_len).enumerate() {
        mask[pos] = true;
        token_keys.push(word_seed(token, seed));
        match model.vector(token) {
            Some(v) => embed.row_mut(pos).copy_from_slice(v),
            None => embed.row_mut(pos).copy_from_slice(&oov_vector(token, dim, seed)),
        }
        for (j, lexicon) in lexicons.iter().enumerate() {
            if let Some(score) = lexicon.score(token) {
                lex.row_mut(pos)[j] = cast(score);
            }
        }
    }

    EncodedSentence { embed, lex, mask, token_keys }
}
