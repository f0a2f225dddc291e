//! From-scratch Word2Vec: CBOW and Skip-gram with negative sampling,
//! cosine nearest-neighbor queries and model persistence.

mod io;
mod train;
mod vocab;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::Mat;
use crate::scalar::{cast, Real};

pub use io::VectorFormat;
pub use train::{
    ns_step_gradients, ns_step_loss, train, NegativeSampler, StepGradients, Trained,
};
pub use vocab::{build_vocabulary, Corpus, MemoryCorpus, TextFileCorpus, Vocabulary};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("no word in the corpus meets the frequency threshold")]
    EmptyVocabulary,
    #[error("word '{word}' is not in the vocabulary")]
    OutOfVocabulary { word: String },
    #[error("duplicate word '{word}'")]
    DuplicateWord { word: String },
    #[error("invalid training configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("non-finite parameter detected after epoch {epoch}")]
    NonFiniteParameter { epoch: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Word2Vec architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// Predict the center word from the mean of the context vectors.
    Cbow,
    /// Predict each context word from the center word.
    SkipGram,
}

impl std::str::FromStr for Architecture {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbow" => Ok(Architecture::Cbow),
            "sg" | "skipgram" | "skip-gram" => Ok(Architecture::SkipGram),
            other => Err(format!("unknown architecture '{other}' (expected cbow|sg)")),
        }
    }
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub architecture: Architecture,
    pub dim: usize,
    /// Context radius; actual windows shrink randomly per center word.
    pub window: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    /// Frequent-word subsampling threshold; `0` disables subsampling.
    pub subsample_t: f64,
    pub min_count: u64,
    pub seed: u64,
    /// Lock-free parallel workers; results are deterministic only for 1.
    pub workers: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            architecture: Architecture::Cbow,
            dim: 200,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr_initial: 0.025,
            lr_final: 1e-4,
            subsample_t: 1e-3,
            min_count: 5,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let fail = |reason: &str| Err(EmbeddingError::InvalidConfig { reason: reason.into() });
        if self.dim == 0 {
            return fail("dim must be >= 1");
        }
        if self.window == 0 {
            return fail("window must be >= 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be >= 1");
        }
        if self.epochs == 0 {
            return fail("epochs must be >= 1");
        }
        if !(self.lr_initial > self.lr_final && self.lr_final > 0.0) {
            return fail("learning rates must satisfy lr_initial > lr_final > 0");
        }
        if self.workers == 0 {
            return fail("workers must be >= 1");
        }
        Ok(())
    }
}

/// Nearest-neighbor query result.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityHit {
    pub word: String,
    /// Cosine similarity in `[-1, 1]`.
    pub score: f64,
}

/// Trained word vectors: the vocabulary plus the input (word) and output
/// (context) parameter matrices, both `V x dim`.
#[derive(Debug, Clone)]
pub struct EmbeddingModel<S> {
    vocab: Vocabulary,
    input: Mat<S>,
    output: Mat<S>,
    config: TrainingConfig,
}

/// Stable 64-bit FNV-1a hash, used to derive per-word RNG streams.
pub(crate) fn fnv1a(word: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in word.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl<S: Real> EmbeddingModel<S> {
    /// Allocates a model with word2vec-style initialization: input vectors
    /// uniform in `(-0.5/dim, +0.5/dim)`, output vectors zero.
    pub(crate) fn init(vocab: Vocabulary, config: TrainingConfig) -> Self {
        let v = vocab.len();
        let dim = config.dim;
        let mut input = Mat::zeros(v, dim);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let half = 0.5 / dim as f64;
        for value in input.as_mut_slice() {
            *value = cast(rng.gen_range(-half..half));
        }
        let output = Mat::zeros(v, dim);
        EmbeddingModel { vocab, input, output, config }
    }

    pub(crate) fn from_parts(vocab: Vocabulary, input: Mat<S>, output: Mat<S>, config: TrainingConfig) -> Self {
        debug_assert_eq!(vocab.len(), input.rows());
        debug_assert_eq!(vocab.len(), output.rows());
        EmbeddingModel { vocab, input, output, config }
    }

    /// Builds a model over the given words with per-word random vectors
    /// (uniform `±0.5/dim`, seeded by hashing each word with `seed`).
    /// Useful as a randomly-initialized embedding table.
    pub fn with_random_vectors(
        words: Vec<String>,
        dim: usize,
        seed: u64,
    ) -> Result<Self, EmbeddingError> {
        let vocab = Vocabulary::from_entries(words.into_iter().map(|w| (w, 1)).collect(), 1)?;
        let mut input = Mat::zeros(vocab.len(), dim);
        let half = 0.5 / dim as f64;
        for i in 0..vocab.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(vocab.word(i)));
            for value in input.row_mut(i) {
                *value = cast(rng.gen_range(-half..half));
            }
        }
        let output = Mat::zeros(vocab.len(), dim);
        let config = TrainingConfig { dim, min_count: 1, ..TrainingConfig::default() };
        Ok(EmbeddingModel { vocab, input, output, config })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    pub fn input_vectors(&self) -> &Mat<S> {
        &self.input
    }

    pub fn output_vectors(&self) -> &Mat<S> {
        &self.output
    }

    /// The learned vector of `word`, if in vocabulary.
    pub fn vector(&self, word: &str) -> Option<&[S]> {
        self.vocab.get(word).map(|i| self.input.row(i))
    }

    /// Cosine similarity between two in-vocabulary words.
    pub fn cosine(&self, a: &str, b: &str) -> Result<f64, EmbeddingError> {
        let ia = self.vocab.get(a).ok_or_else(|| EmbeddingError::OutOfVocabulary { word: a.into() })?;
        let ib = self.vocab.get(b).ok_or_else(|| EmbeddingError::OutOfVocabulary { word: b.into() })?;
        Ok(cosine_f64(self.input.row(ia), self.input.row(ib)))
    }

    /// The `topn` nearest words to `word` by cosine over the input vectors.
    /// The query word itself is excluded; ties break by vocabulary ordinal.
    pub fn most_similar(&self, word: &str, topn: usize) -> Result<Vec<SimilarityHit>, EmbeddingError> {
        let query = self
            .vocab
            .get(word)
            .ok_or_else(|| EmbeddingError::OutOfVocabulary { word: word.into() })?;
        let qrow = self.input.row(query);
        let mut hits: Vec<(usize, f64)> = (0..self.vocab.len())
            .filter(|&i| i != query)
            .map(|i| (i, cosine_f64(qrow, self.input.row(i))))
            .collect();
        hits.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
        });
        hits.truncate(topn);
        Ok(hits
            .into_iter()
            .map(|(i, score)| SimilarityHit { word: self.vocab.word(i).to_string(), score })
            .collect())
    }

    /// True when both parameter matrices contain only finite values.
    pub fn all_finite(&self) -> bool {
        self.input.all_finite() && self.output.all_finite()
    }
}

fn cosine_f64<S: Real>(a: &[S], b: &[S]) -> f64 {
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x.to_f64().unwrap_or(0.0), y.to_f64().unwrap_or(0.0));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Hash of a word mixed with a run seed; used for deterministic per-word
/// random vectors (out-of-vocabulary handling downstream).
pub fn word_seed(word: &str, seed: u64) -> u64 {
    seed ^ fnv1a(word)
}
