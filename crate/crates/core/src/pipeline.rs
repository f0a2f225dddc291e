//! Dataset ingestion, stratified cross-validation, the classifier × feature
//! evaluation grid and report emission.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::classifiers::{
    accuracy, train_bnb, train_linear_svm, train_logreg, train_mnb, train_ridge, train_sgd,
    Label, SgdConfig, TrainedClassifier, TrainingSet,
};
use crate::features::{
    default_allowed_tags, fit_vocabulary, lexicon_features, pos_filter, tf_matrix, FeatureMode,
    TaggedToken, TfidfModel,
};
use crate::lexicon::Lexicon;
use crate::normalizer::{normalize, tokenize, NormalizationConfig};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("dataset verification failed for '{name}': expected {expected_total} rows ({expected_pos} pos / {expected_neg} neg), observed {found_total} ({found_pos} pos / {found_neg} neg)")]
    CountMismatch {
        name: &'static str,
        expected_total: usize,
        expected_pos: usize,
        expected_neg: usize,
        found_total: usize,
        found_pos: usize,
        found_neg: usize,
    },
    #[error("class '{class}' has {count} examples, fewer than {k} folds")]
    ClassTooSmall { class: &'static str, count: usize, k: usize },
    #[error("fold count must be >= 2, got {0}")]
    BadFoldCount(usize),
    #[error("split fraction {fraction} leaves an empty side")]
    DegenerateSplit { fraction: f64 },
    #[error("tagged file has {found} documents, dataset has {expected}")]
    TaggedCountMismatch { expected: usize, found: usize },
    #[error("report is empty")]
    EmptyReport,
    #[error("report line {line}: {reason}")]
    BadReport { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetName {
    Main,
    Sub,
    Custom,
}

impl DatasetName {
    fn as_str(self) -> &'static str {
        match self {
            DatasetName::Main => "main",
            DatasetName::Sub => "sub",
            DatasetName::Custom => "custom",
        }
    }
}

impl std::str::FromStr for DatasetName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "main" => Ok(DatasetName::Main),
            "sub" => Ok(DatasetName::Sub),
            "custom" => Ok(DatasetName::Custom),
            other => Err(format!("unknown dataset name '{other}' (expected main|sub)")),
        }
    }
}

/// Labeled tweets, normalized on load.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub texts: Vec<String>,
    pub tokens: Vec<Vec<String>>,
    pub labels: Vec<Label>,
    pub name: DatasetName,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == Label::Positive).count();
        (pos, self.labels.len() - pos)
    }

    /// Majority-class accuracy, the reference row of every report.
    pub fn majority_baseline(&self) -> f64 {
        let (pos, neg) = self.class_counts();
        pos.max(neg) as f64 / self.len().max(1) as f64
    }

    pub fn from_rows(rows: Vec<(Label, String)>, name: DatasetName) -> Self {
        let cfg = NormalizationConfig::default();
        let mut texts = Vec::with_capacity(rows.len());
        let mut tokens = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for (label, raw) in rows {
            let text = normalize(&raw, &cfg);
            tokens.push(tokenize(&text).tokens);
            texts.push(text);
            labels.push(label);
        }
        Dataset { texts, tokens, labels, name }
    }
}

/// Parses a `label<TAB>text` TSV (labels `pos`/`neg`; extra columns such as
/// annotator votes are ignored), normalizes every tweet, and verifies the
/// published row counts when `expected` names a known dataset.
pub fn load_dataset(
    path: impl AsRef<Path>,
    expected: Option<DatasetName>,
) -> Result<Dataset, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (label_str, rest) = raw.split_once('\t').ok_or_else(|| {
            PipelineError::MalformedLine { line, reason: "expected 'label<TAB>text'".into() }
        })?;
        let label: Label = label_str
            .trim()
            .parse()
            .map_err(|e: String| PipelineError::MalformedLine { line, reason: e })?;
        // Anything after a further tab (e.g. annotator votes) is ignored.
        let tweet = rest.split('\t').next().unwrap_or("");
        rows.push((label, tweet.to_string()));
    }

    let name = expected.unwrap_or(DatasetName::Custom);
    let dataset = Dataset::from_rows(rows, name);
    let (pos, neg) = dataset.class_counts();
    let check = |name: &'static str, et: usize, ep: usize, en: usize| -> Result<(), PipelineError> {
        if dataset.len() != et || pos != ep || neg != en {
            return Err(PipelineError::CountMismatch {
                name,
                expected_total: et,
                expected_pos: ep,
                expected_neg: en,
                found_total: dataset.len(),
                found_pos: pos,
                found_neg: neg,
            });
        }
        Ok(())
    };
    match expected {
        Some(DatasetName::Main) => check("main", 2026, 628, 1398)?,
        Some(DatasetName::Sub) => check("sub", 1732, 502, 1230)?,
        _ => {}
    }
    Ok(dataset)
}

/// Writes a dataset back out in the loader's TSV format.
pub fn write_dataset_tsv(
    path: impl AsRef<Path>,
    rows: &[(Label, String)],
) -> Result<(), PipelineError> {
    let mut out = String::new();
    for (label, text) in rows {
        out.push_str(label.name());
        out.push('\t');
        out.push_str(text);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Stratified fold assignment: per-class shuffle then round-robin.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }
}

pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan, PipelineError> {
    if k < 2 {
        return Err(PipelineError::BadFoldCount(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0usize; labels.len()];
    for (class, class_name) in [(Label::Positive, "pos"), (Label::Negative, "neg")] {
        let mut idx: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(PipelineError::ClassTooSmall { class: class_name, count: idx.len(), k });
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    Ok(FoldPlan { k, assignments, seed })
}

/// Stratified train/test split: per class, the first `⌊fraction·m⌋` shuffled
/// examples go to the training side. Deterministic per seed.
pub fn train_test_split(
    labels: &[Label],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), PipelineError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(PipelineError::DegenerateSplit { fraction });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Label::Positive, Label::Negative] {
        let mut idx: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        let n_train = (fraction * idx.len() as f64).floor() as usize;
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(PipelineError::DegenerateSplit { fraction });
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Grid classifier selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    Mnb,
    Bnb,
    LogReg,
    Lsvc,
    Sgd,
    Ridge,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Mnb,
        ClassifierKind::Bnb,
        ClassifierKind::Lsvc,
        ClassifierKind::LogReg,
        ClassifierKind::Sgd,
        ClassifierKind::Ridge,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Mnb => "mnb",
            ClassifierKind::Bnb => "bnb",
            ClassifierKind::LogReg => "lr",
            ClassifierKind::Lsvc => "lsvc",
            ClassifierKind::Sgd => "sgd",
            ClassifierKind::Ridge => "ridge",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mnb" => Ok(ClassifierKind::Mnb),
            "bnb" => Ok(ClassifierKind::Bnb),
            "lr" => Ok(ClassifierKind::LogReg),
            "lsvc" => Ok(ClassifierKind::Lsvc),
            "sgd" => Ok(ClassifierKind::Sgd),
            "ridge" | "rdg" => Ok(ClassifierKind::Ridge),
            "nsvc" => Err("nsvc is not available: the kernel ν-SVM classifier is \
                           intentionally out of scope; choose one of mnb|bnb|lr|lsvc|sgd|ridge"
                .to_string()),
            other => Err(format!(
                "unknown classifier '{other}' (expected mnb|bnb|lr|lsvc|sgd|ridge)"
            )),
        }
    }
}

pub const ALL_FEATURES: [FeatureMode; 5] = [
    FeatureMode::Tf,
    FeatureMode::Tfidf,
    FeatureMode::Pos,
    FeatureMode::Lex,
    FeatureMode::AutoLex,
];

/// Inputs for one grid run.
#[derive(Debug, Clone, Default)]
pub struct GridConfig {
    pub classifiers: Vec<ClassifierKind>,
    pub features: Vec<FeatureMode>,
    pub folds: usize,
    pub seed: u64,
    /// Manually built lexicon (the `lex` column).
    pub lexicon: Option<Lexicon>,
    /// Auto-expanded lexicon (the `autolex` column).
    pub auto_lexicon: Option<Lexicon>,
    /// POS-tagged documents aligned with the dataset rows.
    pub tagged: Option<Vec<Vec<TaggedToken>>>,
    /// POS tags kept by the `pos` column; defaults to VBD and JJ.
    pub allowed_tags: Vec<String>,
}

/// One grid cell: fold accuracies, or the reason it was skipped or failed.
#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Scores { mean: f64, std: f64, folds: Vec<f64> },
    Skipped { reason: String },
    Failed { error: String },
}

impl CellOutcome {
    pub fn mean(&self) -> Option<f64> {
        match self {
            CellOutcome::Scores { mean, .. } => Some(*mean),
            _ => None,
        }
    }

    fn from_folds(folds: Vec<f64>) -> Self {
        let n = folds.len() as f64;
        let mean = folds.iter().sum::<f64>() / n;
        let var = folds.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        CellOutcome::Scores { mean, std: var.sqrt(), folds }
    }
}

/// The grid of (classifier × feature) outcomes.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub dataset: &'static str,
    pub n_docs: usize,
    pub majority_baseline: f64,
    pub classifiers: Vec<ClassifierKind>,
    pub features: Vec<FeatureMode>,
    pub cells: Vec<Vec<CellOutcome>>,
}

impl EvalReport {
    pub fn cell(&self, clf: ClassifierKind, feature: FeatureMode) -> Option<&CellOutcome> {
        let r = self.classifiers.iter().position(|&c| c == clf)?;
        let c = self.features.iter().position(|&f| f == feature)?;
        Some(&self.cells[r][c])
    }
}

const NB_ALPHA: f64 = 1.0;
const LR_L2: f64 = 1.0;
const LR_TOL: f64 = 1e-6;
const LR_MAX_ITER: usize = 300;
const LSVC_C: f64 = 1.0;
const LSVC_EPOCHS: usize = 100;
const RIDGE_ALPHA: f64 = 1.0;

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(fold as u64)
}

struct FoldData {
    train_matrix: crate::features::DocumentTermMatrix<f64>,
    test_matrix: crate::features::DocumentTermMatrix<f64>,
    train_labels: Vec<Label>,
    test_labels: Vec<Label>,
}

fn build_fold(
    docs: &[Vec<String>],
    labels: &[Label],
    plan: &FoldPlan,
    fold: usize,
    mode: FeatureMode,
    lexicon: Option<&Lexicon>,
) -> Result<FoldData, String> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let train_docs: Vec<&Vec<String>> = train_idx.iter().map(|&i| &docs[i]).collect();
    let test_docs: Vec<&Vec<String>> = test_idx.iter().map(|&i| &docs[i]).collect();
    let train_labels: Vec<Label> = train_idx.iter().map(|&i| labels[i]).collect();
    let test_labels: Vec<Label> = test_idx.iter().map(|&i| labels[i]).collect();

    // Vocabulary and idf statistics are fitted on the training split only.
    let ti = fit_vocabulary(&train_docs).map_err(|e| e.to_string())?;
    let (train_matrix, test_matrix) = match mode {
        FeatureMode::Tf => (tf_matrix(&train_docs, &ti), tf_matrix(&test_docs, &ti)),
        FeatureMode::Tfidf | FeatureMode::Pos => {
            let model = TfidfModel::<f64>::fit(&train_docs, &ti);
            (model.transform(&train_docs), model.transform(&test_docs))
        }
        FeatureMode::Lex | FeatureMode::AutoLex => {
            let lexicon = lexicon.ok_or("lexicon required")?;
            let model = TfidfModel::<f64>::fit(&train_docs, &ti);
            (
                lexicon_features(&train_docs, lexicon, &model),
                lexicon_features(&test_docs, lexicon, &model),
            )
        }
    };
    Ok(FoldData { train_matrix, test_matrix, train_labels, test_labels })
}

fn train_and_score(clf: ClassifierKind, data: &FoldData, seed: u64) -> Result<f64, String> {
    let ts = TrainingSet::new(&data.train_matrix, &data.train_labels)
        .map_err(|e| e.to_string())?;
    let model: TrainedClassifier<f64> = match clf {
        ClassifierKind::Mnb => {
            TrainedClassifier::NaiveBayes(train_mnb(ts, NB_ALPHA).map_err(|e| e.to_string())?)
        }
        ClassifierKind::Bnb => TrainedClassifier::NaiveBayes(
            train_bnb(ts, NB_ALPHA, 0.0).map_err(|e| e.to_string())?,
        ),
        ClassifierKind::LogReg => TrainedClassifier::Linear(
            train_logreg(ts, LR_L2, LR_TOL, LR_MAX_ITER).map_err(|e| e.to_string())?,
        ),
        ClassifierKind::Lsvc => TrainedClassifier::Linear(
            train_linear_svm(ts, LSVC_C, LSVC_EPOCHS, seed).map_err(|e| e.to_string())?,
        ),
        ClassifierKind::Sgd => TrainedClassifier::Linear(
            train_sgd(ts, &SgdConfig { seed, ..Default::default() })
                .map_err(|e| e.to_string())?,
        ),
        ClassifierKind::Ridge => TrainedClassifier::Linear(
            train_ridge(ts, RIDGE_ALPHA).map_err(|e| e.to_string())?,
        ),
    };
    let preds = model.predict(&data.test_matrix).map_err(|e| e.to_string())?;
    Ok(accuracy(&preds, &data.test_labels))
}

/// Runs every (classifier, feature) cell: per fold, features are fitted on
/// the training split only, the classifier is trained, and the held-out fold
/// is scored. Cells lacking side inputs are skipped; a failing cell does not
/// abort the grid. Folds run in parallel; results are deterministic per seed.
pub fn run_grid(dataset: &Dataset, cfg: &GridConfig) -> Result<EvalReport, PipelineError> {
    let plan = stratified_kfold(&dataset.labels, cfg.folds, cfg.seed)?;
    let allowed = if cfg.allowed_tags.is_empty() {
        default_allowed_tags()
    } else {
        cfg.allowed_tags.clone()
    };
    let pos_docs: Option<Vec<Vec<String>>> = match &cfg.tagged {
        Some(tagged) => {
            if tagged.len() != dataset.len() {
                return Err(PipelineError::TaggedCountMismatch {
                    expected: dataset.len(),
                    found: tagged.len(),
                });
            }
            Some(pos_filter(tagged, &allowed))
        }
        None => None,
    };

    let mut columns: Vec<Vec<CellOutcome>> = Vec::new();
    for &feature in &cfg.features {
        let (docs, lexicon, skip_reason): (Option<&[Vec<String>]>, Option<&Lexicon>, &str) =
            match feature {
                FeatureMode::Tf | FeatureMode::Tfidf => (Some(&dataset.tokens), None, ""),
                FeatureMode::Pos => (pos_docs.as_deref(), None, "no tagged input"),
                FeatureMode::Lex => {
                    (Some(&dataset.tokens), cfg.lexicon.as_ref(), "no manual lexicon")
                }
                FeatureMode::AutoLex => {
                    (Some(&dataset.tokens), cfg.auto_lexicon.as_ref(), "no auto lexicon")
                }
            };
        let needs_lexicon = matches!(feature, FeatureMode::Lex | FeatureMode::AutoLex);
        let (docs, lexicon) = match (docs, lexicon, needs_lexicon) {
            (Some(d), lex, false) => (d, lex),
            (Some(d), Some(lex), true) => (d, Some(lex)),
            _ => {
                columns.push(vec![
                    CellOutcome::Skipped { reason: skip_reason.to_string() };
                    cfg.classifiers.len()
                ]);
                continue;
            }
        };

        // Fold feature matrices are shared by every classifier in the column.
        let folds: Vec<Result<FoldData, String>> = (0..cfg.folds)
            .into_par_iter()
            .map(|fold| build_fold(docs, &dataset.labels, &plan, fold, feature, lexicon))
            .collect();

        let column: Vec<CellOutcome> = cfg
            .classifiers
            .iter()
            .map(|&clf| {
                let scores: Result<Vec<f64>, String> = (0..cfg.folds)
                    .into_par_iter()
                    .map(|fold| match &folds[fold] {
                        Ok(data) => train_and_score(clf, data, fold_seed(cfg.seed, fold)),
                        Err(e) => Err(e.clone()),
                    })
                    .collect();
                match scores {
                    Ok(folds) => CellOutcome::from_folds(folds),
                    Err(error) => CellOutcome::Failed {
                        error: format!("{}x{}: {error}", clf.name(), feature.name()),
                    },
                }
            })
            .collect();
        columns.push(column);
    }

    // Transpose columns into classifier-major rows.
    let cells: Vec<Vec<CellOutcome>> = (0..cfg.classifiers.len())
        .map(|r| (0..cfg.features.len()).map(|c| columns[c][r].clone()).collect())
        .collect();

    Ok(EvalReport {
        dataset: dataset.name.as_str(),
        n_docs: dataset.len(),
        majority_baseline: dataset.majority_baseline(),
        classifiers: cfg.classifiers.clone(),
        features: cfg.features.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Tsv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format '{other}' (expected tsv|markdown)")),
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_report(self, ReportFormat::Markdown))
    }
}

/// Renders a report. The markdown grid shows `mean (+/- std)` to two
/// decimals; skipped cells render as `—`. The TSV variant is machine
/// readable and round-trips through [`parse_report`].
pub fn emit_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Tsv => {
            let mut out = String::new();
            out.push_str(&format!("#dataset\t{}\t{}\n", report.dataset, report.n_docs));
            out.push_str(&format!("#majority\t{:.6}\n", report.majority_baseline));
            out.push_str("classifier\tfeature\tstatus\tmean\tstd\tfolds\n");
            for (r, &clf) in report.classifiers.iter().enumerate() {
                for (c, &feature) in report.features.iter().enumerate() {
                    match &report.cells[r][c] {
                        CellOutcome::Scores { mean, std, folds } => {
                            let folds_str: Vec<String> =
                                folds.iter().map(|a| format!("{a:.6}")).collect();
                            out.push_str(&format!(
                                "{}\t{}\tok\t{:.6}\t{:.6}\t{}\n",
                                clf.name(),
                                feature.name(),
                                mean,
                                std,
                                folds_str.join(";")
                            ));
                        }
                        CellOutcome::Skipped { reason } => {
                            out.push_str(&format!(
                                "{}\t{}\tskipped\t-\t-\t{}\n",
                                clf.name(),
                                feature.name(),
                                reason.replace(['\t', '\n'], " ")
                            ));
                        }
                        CellOutcome::Failed { error } => {
                            out.push_str(&format!(
                                "{}\t{}\tfailed\t-\t-\t{}\n",
                                clf.name(),
                                feature.name(),
                                error.replace(['\t', '\n'], " ")
                            ));
                        }
                    }
                }
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!(
                "Dataset `{}`: {} documents, majority baseline {:.3}\n\n",
                report.dataset, report.n_docs, report.majority_baseline
            ));
            out.push_str("| classifier |");
            for f in &report.features {
                out.push_str(&format!(" {} |", f.name()));
            }
            out.push('\n');
            out.push_str("|---|");
            for _ in &report.features {
                out.push_str("---|");
            }
            out.push('\n');
            for (r, &clf) in report.classifiers.iter().enumerate() {
                out.push_str(&format!("| {} |", clf.name()));
                for c in 0..report.features.len() {
                    match &report.cells[r][c] {
                        CellOutcome::Scores { mean, std, .. } => {
                            out.push_str(&format!(" {mean:.2} (+/- {std:.2}) |"));
                        }
                        CellOutcome::Skipped { .. } => out.push_str(" — |"),
                        CellOutcome::Failed { .. } => out.push_str(" failed |"),
                    }
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Parses the TSV produced by [`emit_report`].
pub fn parse_report(tsv: &str) -> Result<EvalReport, PipelineError> {
    let mut dataset: &'static str = "custom";
    let mut n_docs = 0usize;
    let mut majority = 0.0f64;
    let mut rows: Vec<(ClassifierKind, FeatureMode, CellOutcome)> = Vec::new();

    for (i, raw) in tsv.lines().enumerate() {
        let line = i + 1;
        if raw.is_empty() {
            continue;
        }
        if let Some(rest) = raw.strip_prefix("#dataset\t") {
            let mut parts = rest.split('\t');
            let name = parts.next().unwrap_or("custom");
            dataset = match name {
                "main" => "main",
                "sub" => "sub",
                _ => "custom",
            };
            n_docs = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| PipelineError::BadReport { line, reason: "bad #dataset".into() })?;
            continue;
        }
        if let Some(rest) = raw.strip_prefix("#majority\t") {
            majority = rest
                .parse()
                .map_err(|_| PipelineError::BadReport { line, reason: "bad #majority".into() })?;
            continue;
        }
        if raw.starts_with("classifier\t") {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 6 {
            return Err(PipelineError::BadReport { line, reason: "expected 6 fields".into() });
        }
        let clf: ClassifierKind = fields[0]
            .parse()
            .map_err(|e: String| PipelineError::BadReport { line, reason: e })?;
        let feature: FeatureMode = fields[1]
            .parse()
            .map_err(|e: String| PipelineError::BadReport { line, reason: e })?;
        let outcome = match fields[2] {
            "ok" => {
                let mean: f64 = fields[3].parse().map_err(|_| PipelineError::BadReport {
                    line,
                    reason: "bad mean".into(),
                })?;
                let std: f64 = fields[4].parse().map_err(|_| PipelineError::BadReport {
                    line,
                    reason: "bad std".into(),
                })?;
                let folds: Result<Vec<f64>, _> =
                    fields[5].split(';').map(str::parse::<f64>).collect();
                let folds = folds.map_err(|_| PipelineError::BadReport {
                    line,
                    reason: "bad fold list".into(),
                })?;
                CellOutcome::Scores { mean, std, folds }
            }
            "skipped" => CellOutcome::Skipped { reason: fields[5].to_string() },
            "failed" => CellOutcome::Failed { error: fields[5].to_string() },
            other => {
                return Err(PipelineError::BadReport {
                    line,
                    reason: format!("unknown status '{other}'"),
                })
            }
        };
        rows.push((clf, feature, outcome));
    }
    if rows.is_empty() {
        return Err(PipelineError::EmptyReport);
    }

    let mut classifiers: Vec<ClassifierKind> = Vec::new();
    let mut features: Vec<FeatureMode> = Vec::new();
    for (clf, feature, _) in &rows {
        if !classifiers.contains(clf) {
            classifiers.push(*clf);
        }
        if !features.contains(feature) {
            features.push(*feature);
        }
    }
    let mut cells =
        vec![vec![CellOutcome::Skipped { reason: "missing".into() }; features.len()]; classifiers.len()];
    let mut index: HashMap<(ClassifierKind, FeatureMode), CellOutcome> = HashMap::new();
    for (clf, feature, outcome) in rows {
        index.insert((clf, feature), outcome);
    }
    for (r, &clf) in classifiers.iter().enumerate() {
        for (c, &feature) in features.iter().enumerate() {
            if let Some(outcome) = index.remove(&(clf, feature)) {
                cells[r][c] = outcome;
            }
        }
    }
    Ok(EvalReport { dataset, n_docs, majority_baseline: majority, classifiers, features, cells })
}
