//! Arabic sentiment-analysis toolkit.
//!
//! End-to-end pipeline: corpus normalization ([`normalizer`]), from-scratch
//! Word2Vec training and vetting ([`embedding`], [`lexicon`]), sparse text
//! features ([`features`]), classical classifiers with cross-validation
//! ([`classifiers`], [`pipeline`]) and a lexicon-integrated convolutional
//! sentence classifier ([`cnn`]).
//!
//! All numeric kernels are generic over the [`scalar::Real`] scalar type;
//! the `*32` / `*64` aliases below pin the two concrete instantiations.

pub mod classifiers;
pub mod cnn;
pub mod embedding;
pub mod features;
pub mod lexicon;
pub mod linalg;
pub mod normalizer;
pub mod pipeline;
pub mod scalar;
pub mod synth;

pub use scalar::Real;

/// Single-precision embedding model (training default).
pub type EmbeddingModel32 = embedding::EmbeddingModel<f32>;
/// Double-precision embedding model (gradient verification).
pub type EmbeddingModel64 = embedding::EmbeddingModel<f64>;

/// Single-precision document-term matrix.
pub type DocumentTermMatrix32 = features::DocumentTermMatrix<f32>;
/// Double-precision document-term matrix (classifier default).
pub type DocumentTermMatrix64 = features::DocumentTermMatrix<f64>;

/// Single-precision trained classifier.
pub type TrainedClassifier32 = classifiers::TrainedClassifier<f32>;
/// Double-precision trained classifier.
pub type TrainedClassifier64 = classifiers::TrainedClassifier<f64>;
