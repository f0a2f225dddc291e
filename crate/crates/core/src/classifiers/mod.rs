//! Binary sentiment classifiers over sparse feature matrices: multinomial
//! and Bernoulli naive Bayes, logistic regression, a Pegasos-style linear
//! SVM, a configurable SGD classifier and a ridge classifier.

mod io;
mod linear;
mod naive_bayes;

use thiserror::Error;

use crate::features::DocumentTermMatrix;
use crate::scalar::Real;

pub use io::{load_classifier, save_classifier, ModelIoError};
pub use linear::{
    hinge_objective, logistic_gradient, logistic_objective, train_linear_svm, train_logreg,
    train_ridge, train_sgd, LinearModel, LossKind, SgdConfig,
};
pub use naive_bayes::{train_bnb, train_mnb, NaiveBayesModel, NbVariant};

/// Binary sentiment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    /// ±1 target encoding.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }
}

impl std::str::FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" => Ok(Label::Positive),
            "neg" => Ok(Label::Negative),
            other => Err(format!("unknown label '{other}' (expected pos|neg)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("label count ({labels}) does not match document count ({docs})")]
    LengthMismatch { labels: usize, docs: usize },
    #[error("training set contains a single class")]
    SingleClass,
    #[error("negative feature value {value} at document {doc}, column {col} (multinomial NB requires nonnegative features)")]
    NegativeFeature { doc: usize, col: usize, value: f64 },
    #[error("smoothing/regularization parameter must be positive, got {value}")]
    NonPositiveParameter { value: f64 },
}

#[derive(Debug, Error)]
#[error("model expects {expected} feature columns, matrix has {found}")]
pub struct DimensionMismatch {
    pub expected: usize,
    pub found: usize,
}

/// A feature matrix paired with one label per row.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a, S> {
    pub matrix: &'a DocumentTermMatrix<S>,
    pub labels: &'a [Label],
}

impl<'a, S: Real> TrainingSet<'a, S> {
    pub fn new(matrix: &'a DocumentTermMatrix<S>, labels: &'a [Label]) -> Result<Self, TrainError> {
        if matrix.n_docs() != labels.len() {
            return Err(TrainError::LengthMismatch { labels: labels.len(), docs: matrix.n_docs() });
        }
        let has_pos = labels.contains(&Label::Positive);
        let has_neg = labels.contains(&Label::Negative);
        if !has_pos || !has_neg {
            return Err(TrainError::SingleClass);
        }
        Ok(TrainingSet { matrix, labels })
    }

    pub fn n_docs(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }
}

/// A trained model with a uniform predict contract. Ties (zero decision
/// values, equal posteriors) resolve to positive.
#[derive(Debug, Clone)]
pub enum TrainedClassifier<S> {
    NaiveBayes(NaiveBayesModel),
    Linear(LinearModel<S>),
}

impl<S: Real> TrainedClassifier<S> {
    pub fn n_cols(&self) -> usize {
        match self {
            TrainedClassifier::NaiveBayes(m) => m.n_features(),
            TrainedClassifier::Linear(m) => m.weights.len(),
        }
    }

    fn check_dims(&self, matrix: &DocumentTermMatrix<S>) -> Result<(), DimensionMismatch> {
        if matrix.n_cols() != self.n_cols() {
            return Err(DimensionMismatch { expected: self.n_cols(), found: matrix.n_cols() });
        }
        Ok(())
    }

    /// Positive-vs-negative scores: log-posterior difference for naive
    /// Bayes, `w·x + b` for linear models.
    pub fn decision_values(
        &self,
        matrix: &DocumentTermMatrix<S>,
    ) -> Result<Vec<f64>, DimensionMismatch> {
        self.check_dims(matrix)?;
        Ok(match self {
            TrainedClassifier::NaiveBayes(m) => (0..matrix.n_docs())
                .map(|d| {
                    let lp = m.log_posteriors(matrix.row(d));
                    lp[0] - lp[1]
                })
                .collect(),
            TrainedClassifier::Linear(m) => {
                (0..matrix.n_docs()).map(|d| m.decision(matrix.row(d))).collect()
            }
        })
    }

    pub fn predict(&self, matrix: &DocumentTermMatrix<S>) -> Result<Vec<Label>, DimensionMismatch> {
        Ok(self
            .decision_values(matrix)?
            .into_iter()
            .map(|v| if v >= 0.0 { Label::Positive } else { Label::Negative })
            .collect())
    }
}

/// Fraction of predictions matching `labels`.
pub fn accuracy(predicted: &[Label], labels: &[Label]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use crate::features::{fit_vocabulary, tf_matrix, DocumentTermMatrix};

    pub fn docs(list: &[&str]) -> Vec<Vec<String>> {
        list.iter().map(|d| d.split_whitespace().map(str::to_owned).collect()).collect()
    }

    pub fn tf_set(list: &[&str]) -> DocumentTermMatrix<f64> {
        let d = docs(list);
        let ti = fit_vocabulary(&d).unwrap();
        tf_matrix(&d, &ti)
    }

    /// The four-document fixture used across the naive Bayes tests.
    pub fn four_doc_fixture() -> (DocumentTermMatrix<f64>, Vec<Label>) {
        let matrix = tf_set(&["جيد", "جيد جيد", "سيئ", "سيئ سيئ"]);
        let labels =
            vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative];
        (matrix, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::*;
    use super::*;

    #[test]
    fn training_set_validation() {
        let (matrix, labels) = four_doc_fixture();
        assert!(TrainingSet::new(&matrix, &labels).is_ok());
        assert!(matches!(
            TrainingSet::new(&matrix, &labels[..3]),
            Err(TrainError::LengthMismatch { .. })
        ));
        let single = vec![Label::Positive; 4];
        assert!(matches!(TrainingSet::new(&matrix, &single), Err(TrainError::SingleClass)));
    }

    #[test]
    fn zero_weight_linear_model_predicts_positive() {
        let (matrix, _) = four_doc_fixture();
        let model = TrainedClassifier::Linear(LinearModel {
            weights: vec![0.0f64; matrix.n_cols()],
            bias: 0.0,
            loss_kind: LossKind::Hinge,
            l2: 1.0,
            converged: true,
        });
        let preds = model.predict(&matrix).unwrap();
        assert!(preds.iter().all(|&p| p == Label::Positive));
    }

    #[test]
    fn dimension_mismatch_detected() {
        let (matrix, labels) = four_doc_fixture();
        let ts = TrainingSet::new(&matrix, &labels).unwrap();
        let model = TrainedClassifier::NaiveBayes(train_mnb(ts, 1.0).unwrap());
        let other = tf_set(&["ا ب ج"]);
        assert!(model.predict(&other).is_err());
    }
}
