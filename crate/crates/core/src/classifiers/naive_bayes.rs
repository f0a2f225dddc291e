//! Multinomial and Bernoulli naive Bayes with Laplace smoothing.
//!
//! Class priors and feature probability tables are kept in `f64` regardless
//! of the feature scalar: they are counting estimates, not kernel state.

use super::{Label, TrainError, TrainingSet};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbVariant {
    Multinomial,
    Bernoulli,
}

/// Smoothed naive Bayes parameters. Class index 0 is positive, 1 negative.
#[derive(Debug, Clone)]
pub struct NaiveBayesModel {
    pub variant: NbVariant,
    pub alpha: f64,
    /// Bernoulli presence threshold; unused for multinomial.
    pub binarize_threshold: f64,
    pub class_log_prior: [f64; 2],
    /// Multinomial: `ln θ(t|c)`. Bernoulli: `ln θ(t present|c)`.
    pub feature_log_prob: [Vec<f64>; 2],
    /// Bernoulli only: `ln (1 - θ(t|c))`; empty for multinomial.
    pub feature_log_absent: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    pub fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    /// Unnormalized log posteriors `[positive, negative]` for one sparse row.
    pub fn log_posteriors<S: Real>(&self, row: &[(usize, S)]) -> [f64; 2] {
        let mut scores = [0.0f64; 2];
        for (c, score) in scores.iter_mut().enumerate() {
            *score = self.class_log_prior[c];
            match self.variant {
                NbVariant::Multinomial => {
                    for &(col, x) in row {
                        *score += x.to_f64().unwrap_or(0.0) * self.feature_log_prob[c][col];
                    }
                }
                NbVariant::Bernoulli => {
                    // Start from the all-absent likelihood, then patch the
                    // columns whose value exceeds the threshold.
                    *score += self.feature_log_absent[c].iter().sum::<f64>();
                    for &(col, x) in row {
                        if x.to_f64().unwrap_or(0.0) > self.binarize_threshold {
                            *score +=
                                self.feature_log_prob[c][col] - self.feature_log_absent[c][col];
                        }
                    }
                }
            }
        }
        scores
    }

    /// Normalized posterior probabilities `[positive, negative]`.
    pub fn posteriors<S: Real>(&self, row: &[(usize, S)]) -> [f64; 2] {
        let lp = self.log_posteriors(row);
        let m = lp[0].max(lp[1]);
        let e0 = (lp[0] - m).exp();
        let e1 = (lp[1] - m).exp();
        let z = e0 + e1;
        [e0 / z, e1 / z]
    }
}

fn class_index(label: Label) -> usize {
    match label {
        Label::Positive => 0,
        Label::Negative => 1,
    }
}

/// Multinomial naive Bayes: `θ(t|c) = (count(t,c) + α) / (count(c) + α·d)`.
pub fn train_mnb<S: Real>(ts: TrainingSet<'_, S>, alpha: f64) -> Result<NaiveBayesModel, TrainError> {
    if alpha <= 0.0 {
        return Err(TrainError::NonPositiveParameter { value: alpha });
    }
    let d = ts.matrix.n_cols();
    let mut class_docs = [0usize; 2];
    let mut counts = [vec![0.0f64; d], vec![0.0f64; d]];
    for (doc, &label) in ts.labels.iter().enumerate() {
        let c = class_index(label);
        class_docs[c] += 1;
        for &(col, x) in ts.matrix.row(doc) {
            let x = x.to_f64().unwrap_or(0.0);
            if x < 0.0 {
                return Err(TrainError::NegativeFeature { doc, col, value: x });
            }
            counts[c][col] += x;
        }
    }
    let n = ts.n_docs() as f64;
    let class_log_prior =
        [(class_docs[0] as f64 / n).ln(), (class_docs[1] as f64 / n).ln()];
    let mut feature_log_prob = [vec![0.0f64; d], vec![0.0f64; d]];
    for c in 0..2 {
        let total: f64 = counts[c].iter().sum();
        let denom = total + alpha * d as f64;
        for t in 0..d {
            feature_log_prob[c][t] = ((counts[c][t] + alpha) / denom).ln();
        }
    }
    Ok(NaiveBayesModel {
        variant: NbVariant::Multinomial,
        alpha,
        binarize_threshold: 0.0,
        class_log_prior,
        feature_log_prob,
        feature_log_absent: [Vec::new(), Vec::new()],
    })
}

/// Bernoulli naive Bayes over feature presence (`x > threshold`):
/// `θ(t|c) = (docs(t,c) + α) / (docs(c) + 2α)`.
pub fn train_bnb<S: Real>(
    ts: TrainingSet<'_, S>,
    alpha: f64,
    binarize_threshold: f64,
) -> Result<NaiveBayesModel, TrainError> {
    if alpha <= 0.0 {
        return Err(TrainError::NonPositiveParameter { value: alpha });
    }
    let d = ts.matrix.n_cols();
    let mut class_docs = [0usize; 2];
    let mut present = [vec![0.0f64; d], vec![0.0f64; d]];
    for (doc, &label) in ts.labels.iter().enumerate() {
        let c = class_index(label);
        class_docs[c] += 1;
        for &(col, x) in ts.matrix.row(doc) {
            if x.to_f64().unwrap_or(0.0) > binarize_threshold {
                present[c][col] += 1.0;
            }
        }
    }
    let n = ts.n_docs() as f64;
    let class_log_prior =
        [(class_docs[0] as f64 / n).ln(), (class_docs[1] as f64 / n).ln()];
    let mut feature_log_prob = [vec![0.0f64; d], vec![0.0f64; d]];
    let mut feature_log_absent = [vec![0.0f64; d], vec![0.0f64; d]];
    for c in 0..2 {
        let denom = class_docs[c] as f64 + 2.0 * alpha;
        for t in 0..d {
            let theta = (present[c][t] + alpha) / denom;
            feature_log_prob[c][t] = theta.ln();
            feature_log_absent[c][t] = (1.0 - theta).ln();
        }
    }
    Ok(NaiveBayesModel {
        variant: NbVariant::Bernoulli,
        alpha,
        binarize_threshold,
        class_log_prior,
        feature_log_prob,
        feature_log_absent,
    })
}

#[cfg(test)]
mod tests {
    use super::super::test_util::*;
    use super::super::{accuracy, TrainedClassifier, TrainingSet};
    use super::*;

    /// Direct-probability Bayes enumeration for the multinomial model,
    /// independent of the log-space implementation path.
    fn mnb_oracle_posterior_pos(
        doc: &[(usize, f64)],
        counts: &[Vec<f64>; 2],
        class_docs: [f64; 2],
        alpha: f64,
    ) -> f64 {
        let d = counts[0].len() as f64;
        let n = class_docs[0] + class_docs[1];
        let mut joint = [0.0f64; 2];
        for c in 0..2 {
            let mut p = class_docs[c] / n;
            let total: f64 = counts[c].iter().sum();
            for &(col, x) in doc {
                let theta = (counts[c][col] + alpha) / (total + alpha * d);
                p *= theta.powf(x);
            }
            joint[c] = p;
        }
        joint[0] / (joint[0] + joint[1])
    }

    #[test]
    fn mnb_matches_bayes_enumeration() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        let model = train_mnb(ts, 1.0).unwrap();

        // Fixture counts: pos has جيد×3, neg has سيئ×3.
        let counts = [vec![3.0, 0.0], vec![0.0, 3.0]];
        let class_docs = [2.0, 2.0];
        for (doc, expected_doc) in
            [(vec![(0usize, 1.0f64)], "جيد"), (vec![(1, 1.0)], "سيئ"), (vec![(0, 1.0), (1, 1.0)], "both")]
                .iter()
                .map(|(d, n)| (d.clone(), *n))
        {
            let oracle = mnb_oracle_posterior_pos(&doc, &counts, class_docs, 1.0);
            let got = model.posteriors(&doc)[0];
            assert!(
                (oracle - got).abs() < 1e-12,
                "doc {expected_doc}: oracle {oracle} vs model {got}"
            );
        }
        // Hand value: P(pos | جيد) = 0.8 with α = 1.
        assert!((model.posteriors(&[(0usize, 1.0f64)])[0] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn bnb_matches_hand_enumeration() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        let model = train_bnb(ts, 1.0, 0.0).unwrap();
        // θ(جيد|pos) = (2+1)/(2+2) = 0.75; presence-only doc {جيد}:
        // pos likelihood 0.75·0.75, neg likelihood 0.25·0.25 → posterior 0.9.
        let p = model.posteriors(&[(0usize, 1.0f64)])[0];
        assert!((p - 0.9).abs() < 1e-12);
    }

    #[test]
    fn symmetric_corpus_gives_half_posterior() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        for model in [train_mnb(ts, 1.0).unwrap(), train_bnb(ts, 1.0, 0.0).unwrap()] {
            let p = model.posteriors(&[(0usize, 1.0f64), (1, 1.0)]);
            assert!((p[0] - 0.5).abs() < 1e-12, "balanced doc posterior {p:?}");
        }
    }

    #[test]
    fn posteriors_sum_to_one() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        let model = train_mnb(ts, 1.0).unwrap();
        for doc in 0..matrix.n_docs() {
            let p = model.posteriors(matrix.row(doc));
            assert!((p[0] + p[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn duplicating_documents_leaves_predictions_unchanged() {
        // Smoothing shifts the posterior magnitudes when counts double, but
        // the predicted labels must not move.
        let (matrix, labels) = four_doc_fixture();
        let doubled = tf_set(&[
            "جيد", "جيد جيد", "سيئ", "سيئ سيئ", "جيد", "جيد جيد", "سيئ", "سيئ سيئ",
        ]);
        let mut labels2 = labels.clone();
        labels2.extend(labels.iter().copied());

        for variant in [NbVariant::Multinomial, NbVariant::Bernoulli] {
            let train = |m, l: &[super::super::Label]| {
                let ts = TrainingSet::new(m, l).unwrap();
                match variant {
                    NbVariant::Multinomial => train_mnb(ts, 1.0).unwrap(),
                    NbVariant::Bernoulli => train_bnb(ts, 1.0, 0.0).unwrap(),
                }
            };
            let base = TrainedClassifier::NaiveBayes(train(&matrix, &labels));
            let dup = TrainedClassifier::NaiveBayes(train(&doubled, &labels2));
            assert_eq!(base.predict(&matrix).unwrap(), dup.predict(&matrix).unwrap());
        }
    }

    #[test]
    fn smaller_alpha_increases_training_likelihood() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        let mut previous = f64::NEG_INFINITY;
        for &alpha in &[1.0, 0.5, 0.1, 0.01] {
            let model = train_mnb(ts, alpha).unwrap();
            let ll: f64 = (0..matrix.n_docs())
                .map(|doc| {
                    let lp = model.log_posteriors(matrix.row(doc));
                    // Joint log-likelihood of (x, y).
                    match labels[doc] {
                        super::super::Label::Positive => lp[0],
                        super::super::Label::Negative => lp[1],
                    }
                })
                .sum();
            assert!(ll >= previous, "alpha {alpha}: log-likelihood decreased ({ll} < {previous})");
            previous = ll;
        }
    }

    #[test]
    fn negative_feature_rejected_for_mnb() {
        use crate::features::{DocumentTermMatrix, TermIndex, WeightMode};
        let matrix = DocumentTermMatrix::<f64> {
            term_index: TermIndex::default(),
            rows: vec![vec![(0, 1.0)], vec![(0, -0.5)]],
            mode: WeightMode::Tf,
            aggregate_cols: 1,
        };
        let labels = [super::super::Label::Positive, super::super::Label::Negative];
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        assert!(matches!(train_mnb(ts, 1.0), Err(super::super::TrainError::NegativeFeature { .. })));
        // Bernoulli binarizes, so the same matrix is fine there.
        assert!(train_bnb(ts, 1.0, 0.0).is_ok());
    }

    #[test]
    fn nb_classifies_fixture_perfectly() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        let model = TrainedClassifier::NaiveBayes(train_mnb(ts, 1.0).unwrap());
        let preds = model.predict(&matrix).unwrap();
        assert_eq!(accuracy(&preds, &labels), 1.0);
    }

    #[test]
    fn invalid_alpha_rejected() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        assert!(train_mnb(ts, 0.0).is_err());
        assert!(train_bnb(ts, -1.0, 0.0).is_err());
    }
}
