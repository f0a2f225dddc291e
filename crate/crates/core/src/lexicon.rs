//! Polarity lexicons: TSV ingestion, automatic expansion from seed words via
//! embedding nearest neighbors, and the audit that accepts or rejects a
//! trained embedding model for sentiment use.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingModel, SimilarityHit};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: malformed entry (expected 'word<TAB>score')")]
    MalformedLine { line: usize },
    #[error("line {line}: score {score} outside [-1, 1]")]
    ScoreOutOfRange { line: usize, score: f64 },
    #[error("line {line}: binary lexicon requires scores of exactly +1 or -1, got {score}")]
    NotBinaryScore { line: usize, score: f64 },
    #[error("line {line}: duplicate word '{word}'")]
    DuplicateWord { line: usize, word: String },
    #[error("seed words must be distinct")]
    SeedsNotDistinct,
    #[error("fanouts must be >= 1")]
    ZeroFanout,
    #[error("missing annotations for: {}", words.join(", "))]
    MissingAnnotations { words: Vec<String> },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    /// Scores are exactly +1 or -1.
    Binary,
    /// Scores in `[-1.0, +1.0]`.
    Weighted,
}

impl std::str::FromStr for LexiconKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(LexiconKind::Binary),
            "weighted" => Ok(LexiconKind::Weighted),
            other => Err(format!("unknown lexicon kind '{other}' (expected binary|weighted)")),
        }
    }
}

/// Word → polarity score mapping. Iteration order is lexicographic, which
/// keeps serialized lexicons deterministic.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: BTreeMap<String, f64>,
    kind: LexiconKind,
}

impl Lexicon {
    pub fn kind(&self) -> LexiconKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(w, &s)| (w.as_str(), s))
    }

    fn check_score(kind: LexiconKind, line: usize, score: f64) -> Result<(), LexiconError> {
        if !(-1.0..=1.0).contains(&score) || !score.is_finite() {
            return Err(LexiconError::ScoreOutOfRange { line, score });
        }
        if kind == LexiconKind::Binary && score != 1.0 && score != -1.0 {
            return Err(LexiconError::NotBinaryScore { line, score });
        }
        Ok(())
    }

    /// Builds a lexicon from entries, validating the kind invariants.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, f64)>,
        kind: LexiconKind,
    ) -> Result<Self, LexiconError> {
        let mut map = BTreeMap::new();
        for (line, (word, score)) in entries.into_iter().enumerate() {
            Self::check_score(kind, line + 1, score)?;
            if map.insert(word.clone(), score).is_some() {
                return Err(LexiconError::DuplicateWord { line: line + 1, word });
            }
        }
        Ok(Lexicon { entries: map, kind })
    }

    /// Parses a `word<TAB>score` TSV file.
    pub fn load(path: impl AsRef<Path>, kind: LexiconKind) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let (word, score_str) =
                raw.split_once('\t').ok_or(LexiconError::MalformedLine { line })?;
            let word = word.trim();
            let score: f64 = score_str
                .trim()
                .parse()
                .map_err(|_| LexiconError::MalformedLine { line })?;
            if word.is_empty() {
                return Err(LexiconError::MalformedLine { line });
            }
            Self::check_score(kind, line, score)?;
            if map.insert(word.to_string(), score).is_some() {
                return Err(LexiconError::DuplicateWord { line, word: word.to_string() });
            }
        }
        Ok(Lexicon { entries: map, kind })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LexiconError> {
        let mut out = String::new();
        for (word, score) in self.iter() {
            out.push_str(word);
            out.push('\t');
            if self.kind == LexiconKind::Binary {
                out.push_str(if score > 0.0 { "1" } else { "-1" });
            } else {
                out.push_str(&format!("{score}"));
            }
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Anything that can answer nearest-neighbor queries; implemented by
/// [`EmbeddingModel`] and by mock tables in tests.
pub trait NeighborSource {
    fn contains(&self, word: &str) -> bool;
    fn neighbors(&self, word: &str, topn: usize) -> Result<Vec<SimilarityHit>, EmbeddingError>;
}

impl<S: Real> NeighborSource for EmbeddingModel<S> {
    fn contains(&self, word: &str) -> bool {
        self.vocab().contains(word)
    }

    fn neighbors(&self, word: &str, topn: usize) -> Result<Vec<SimilarityHit>, EmbeddingError> {
        self.most_similar(word, topn)
    }
}

/// Seed words and fanouts for the two-hop lexicon expansion.
#[derive(Debug, Clone)]
pub struct SeedSet {
    pub positive_seed: String,
    pub negative_seed: String,
    /// Neighbors taken from each seed (layer 1).
    pub first_fanout: usize,
    /// Neighbors taken from each layer-1 word (layer 2).
    pub second_fanout: usize,
}

impl Default for SeedSet {
    fn default() -> Self {
        SeedSet {
            positive_seed: "جيد".to_string(),
            negative_seed: "سيئ".to_string(),
            first_fanout: 10,
            second_fanout: 5,
        }
    }
}

impl SeedSet {
    pub fn validate(&self) -> Result<(), LexiconError> {
        if self.positive_seed == self.negative_seed {
            return Err(LexiconError::SeedsNotDistinct);
        }
        if self.first_fanout == 0 || self.second_fanout == 0 {
            return Err(LexiconError::ZeroFanout);
        }
        Ok(())
    }

    /// Upper bound on the expanded lexicon size:
    /// `2 * (1 + f1 * (1 + f2))`, i.e. 122 at the defaults.
    pub fn max_lexicon_size(&self) -> usize {
        2 * (1 + self.first_fanout * (1 + self.second_fanout))
    }
}

fn seed_closure(
    source: &impl NeighborSource,
    seed: &str,
    f1: usize,
    f2: usize,
) -> Result<HashSet<String>, LexiconError> {
    if !source.contains(seed) {
        return Err(LexiconError::Embedding(EmbeddingError::OutOfVocabulary {
            word: seed.to_string(),
        }));
    }
    let mut words: HashSet<String> = HashSet::new();
    words.insert(seed.to_string());
    let layer1 = source.neighbors(seed, f1)?;
    for hit in &layer1 {
        words.insert(hit.word.clone());
    }
    for hit in &layer1 {
        for second in source.neighbors(&hit.word, f2)? {
            words.insert(second.word);
        }
    }
    Ok(words)
}

/// Expands a binary lexicon from two seed words: each seed contributes its
/// `first_fanout` nearest neighbors, then each of those contributes its
/// `second_fanout` nearest neighbors. Every reached word takes the polarity
/// of its seed; duplicates within a polarity collapse and words reached from
/// both seeds are dropped entirely.
pub fn expand_auto_lexicon(
    source: &impl NeighborSource,
    seeds: &SeedSet,
) -> Result<Lexicon, LexiconError> {
    seeds.validate()?;
    let pos = seed_closure(source, &seeds.positive_seed, seeds.first_fanout, seeds.second_fanout)?;
    let neg = seed_closure(source, &seeds.negative_seed, seeds.first_fanout, seeds.second_fanout)?;

    let mut entries = BTreeMap::new();
    for word in &pos {
        if !neg.contains(word) {
            entries.insert(word.clone(), 1.0);
        }
    }
    for word in &neg {
        if !pos.contains(word) {
            entries.insert(word.clone(), -1.0);
        }
    }
    Ok(Lexicon { entries, kind: LexiconKind::Binary })
}

/// Human annotation of a word appearing in an audited neighbor list.
/// `VariantOfSeed` marks a spelling variant of the seed whose list the word
/// appears in; variants of the *opposite* seed should be annotated with
/// their polarity instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annotation {
    Positive,
    Negative,
    Neutral,
    VariantOfSeed,
}

impl std::str::FromStr for Annotation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" | "pos" => Ok(Annotation::Positive),
            "negative" | "neg" => Ok(Annotation::Negative),
            "neutral" => Ok(Annotation::Neutral),
            "variant-of-seed" | "variant" => Ok(Annotation::VariantOfSeed),
            other => Err(format!(
                "unknown annotation '{other}' (expected positive|negative|neutral|variant-of-seed)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AuditFlag {
    /// A word of opposite polarity appears in a seed's top list.
    OppositeInTop,
    /// A neutral word appears in a seed's top list.
    NeutralInTop,
    /// A seed's top list consists only of spelling variants of the seed.
    VariantsOnly,
}

impl fmt::Display for AuditFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AuditFlag::OppositeInTop => "OPPOSITE_IN_TOP",
            AuditFlag::NeutralInTop => "NEUTRAL_IN_TOP",
            AuditFlag::VariantsOnly => "VARIANTS_ONLY",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

/// Result of auditing a model's seed neighborhoods against human annotations.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub positive_hits: Vec<SimilarityHit>,
    pub negative_hits: Vec<SimilarityHit>,
    pub flags: BTreeSet<AuditFlag>,
    pub verdict: Verdict,
}

impl AuditReport {
    /// TSV rendering: one row per audited neighbor, then flags and verdict.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("seed\trank\tword\tscore\n");
        for (seed, hits) in [("pos", &self.positive_hits), ("neg", &self.negative_hits)] {
            for (rank, hit) in hits.iter().enumerate() {
                out.push_str(&format!("{seed}\t{}\t{}\t{:.6}\n", rank + 1, hit.word, hit.score));
            }
        }
        let flags: Vec<String> = self.flags.iter().map(|f| f.to_string()).collect();
        out.push_str(&format!("#flags\t{}\n", flags.join(",")));
        out.push_str(&format!(
            "#verdict\t{}\n",
            if self.verdict == Verdict::Accept { "accept" } else { "reject" }
        ));
        out
    }
}

/// Audits the top neighbor lists of the two seeds. Every listed word must be
/// annotated; the verdict is reject exactly when at least one flag fires.
pub fn audit_model(
    source: &impl NeighborSource,
    seeds: &SeedSet,
    annotations: &HashMap<String, Annotation>,
) -> Result<AuditReport, LexiconError> {
    seeds.validate()?;
    for seed in [&seeds.positive_seed, &seeds.negative_seed] {
        if !source.contains(seed) {
            return Err(LexiconError::Embedding(EmbeddingError::OutOfVocabulary {
                word: seed.clone(),
            }));
        }
    }
    let positive_hits = source.neighbors(&seeds.positive_seed, seeds.first_fanout)?;
    let negative_hits = source.neighbors(&seeds.negative_seed, seeds.first_fanout)?;

    let missing: Vec<String> = positive_hits
        .iter()
        .chain(&negative_hits)
        .filter(|h| !annotations.contains_key(&h.word))
        .map(|h| h.word.clone())
        .collect();
    if !missing.is_empty() {
        return Err(LexiconError::MissingAnnotations { words: missing });
    }

    let mut flags = BTreeSet::new();
    for (hits, opposite) in [
        (&positive_hits, Annotation::Negative),
        (&negative_hits, Annotation::Positive),
    ] {
        let mut all_variants = !hits.is_empty();
        for hit in hits.iter() {
            match annotations[&hit.word] {
                a if a == opposite => {
                    flags.insert(AuditFlag::OppositeInTop);
                }
                Annotation::Neutral => {
                    flags.insert(AuditFlag::NeutralInTop);
                }
                _ => {}
            }
            if annotations[&hit.word] != Annotation::VariantOfSeed {
                all_variants = false;
            }
        }
        if all_variants {
            flags.insert(AuditFlag::VariantsOnly);
        }
    }

    let verdict = if flags.is_empty() { Verdict::Accept } else { Verdict::Reject };
    Ok(AuditReport { positive_hits, negative_hits, flags, verdict })
}

/// Parses an annotations TSV: `word<TAB>label` per line.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<HashMap<String, Annotation>, LexiconError> {
    let text = fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (word, label) = raw.split_once('\t').ok_or(LexiconError::MalformedLine { line })?;
        let annotation: Annotation =
            label.trim().parse().map_err(|_| LexiconError::MalformedLine { line })?;
        map.insert(word.trim().to_string(), annotation);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) struct MockNeighbors {
        pub tables: HashMap<String, Vec<(String, f64)>>,
    }

    impl NeighborSource for MockNeighbors {
        fn contains(&self, word: &str) -> bool {
            self.tables.contains_key(word)
        }

        fn neighbors(&self, word: &str, topn: usize) -> Result<Vec<SimilarityHit>, EmbeddingError> {
            let rows = self
                .tables
                .get(word)
                .ok_or_else(|| EmbeddingError::OutOfVocabulary { word: word.to_string() })?;
            Ok(rows
                .iter()
                .take(topn)
                .map(|(w, s)| SimilarityHit { word: w.clone(), score: *s })
                .collect())
        }
    }

    fn table(entries: &[(&str, &[&str])]) -> MockNeighbors {
        let mut tables = HashMap::new();
        for (word, neighbors) in entries {
            let rows: Vec<(String, f64)> = neighbors
                .iter()
                .enumerate()
                .map(|(i, n)| (n.to_string(), 0.9 - 0.01 * i as f64))
                .collect();
            tables.insert(word.to_string(), rows);
        }
        // Any word without an explicit table gets an empty neighbor list.
        let mentioned: Vec<String> = tables
            .values()
            .flat_map(|rows: &Vec<(String, f64)>| rows.iter().map(|(w, _)| w.clone()))
            .collect();
        for w in mentioned {
            tables.entry(w).or_default();
        }
        MockNeighbors { tables }
    }

    fn seeds(f1: usize, f2: usize) -> SeedSet {
        SeedSet {
            positive_seed: "جيد".into(),
            negative_seed: "سيئ".into(),
            first_fanout: f1,
            second_fanout: f2,
        }
    }

    #[test]
    fn load_binary_lexicon() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        std::fs::write(&path, "جيد\t1\nسيئ\t-1\n").unwrap();
        let lex = Lexicon::load(&path, LexiconKind::Binary).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.score("جيد"), Some(1.0));
        assert_eq!(lex.score("سيئ"), Some(-1.0));
    }

    #[test]
    fn weighted_accepted_binary_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        std::fs::write(&path, "x\t0.43\n").unwrap();
        assert!(Lexicon::load(&path, LexiconKind::Weighted).is_ok());
        assert!(matches!(
            Lexicon::load(&path, LexiconKind::Binary),
            Err(LexiconError::NotBinaryScore { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_range_and_duplicates_error_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.tsv");
        std::fs::write(&path, "a\t0.5\nb\t1.7\n").unwrap();
        assert!(matches!(
            Lexicon::load(&path, LexiconKind::Weighted),
            Err(LexiconError::ScoreOutOfRange { line: 2, .. })
        ));
        std::fs::write(&path, "a\t0.5\na\t0.2\n").unwrap();
        assert!(matches!(
            Lexicon::load(&path, LexiconKind::Weighted),
            Err(LexiconError::DuplicateWord { line: 2, .. })
        ));
        std::fs::write(&path, "a 0.5\n").unwrap();
        assert!(matches!(
            Lexicon::load(&path, LexiconKind::Weighted),
            Err(LexiconError::MalformedLine { line: 1 })
        ));
    }

    #[test]
    fn semeval_sized_lexicon_reports_entry_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("semeval.tsv");
        let mut body = String::new();
        for i in 0..1366 {
            body.push_str(&format!("كلمه{i}\t{:.3}\n", (i % 21) as f64 / 10.0 - 1.0));
        }
        std::fs::write(&path, body).unwrap();
        let lex = Lexicon::load(&path, LexiconKind::Weighted).unwrap();
        assert_eq!(lex.len(), 1366);
    }

    #[test]
    fn expansion_matches_two_hop_closure() {
        let mock = table(&[
            ("جيد", &["a", "b"]),
            ("سيئ", &["x", "y"]),
            ("a", &["aa", "ab"]),
            ("b", &["ba"]),
            ("x", &["xa"]),
            ("y", &["ya", "yb"]),
        ]);
        let lex = expand_auto_lexicon(&mock, &seeds(2, 2)).unwrap();
        let pos: Vec<&str> =
            lex.iter().filter(|(_, s)| *s > 0.0).map(|(w, _)| w).collect();
        let neg: Vec<&str> =
            lex.iter().filter(|(_, s)| *s < 0.0).map(|(w, _)| w).collect();
        assert_eq!(pos, vec!["a", "aa", "ab", "b", "ba", "جيد"]);
        assert_eq!(neg, vec!["x", "xa", "y", "ya", "yb", "سيئ"]);
        assert!(lex.len() <= seeds(2, 2).max_lexicon_size());
    }

    #[test]
    fn cross_polarity_words_are_dropped() {
        let mock = table(&[
            ("جيد", &["a", "مشترك"]),
            ("سيئ", &["x", "مشترك"]),
        ]);
        let lex = expand_auto_lexicon(&mock, &seeds(2, 1)).unwrap();
        assert_eq!(lex.score("مشترك"), None);
        assert_eq!(lex.score("a"), Some(1.0));
        assert_eq!(lex.score("x"), Some(-1.0));
    }

    #[test]
    fn oov_seed_errors() {
        let mock = table(&[("جيد", &["a"])]);
        assert!(matches!(
            expand_auto_lexicon(&mock, &seeds(1, 1)),
            Err(LexiconError::Embedding(EmbeddingError::OutOfVocabulary { .. }))
        ));
    }

    #[test]
    fn fanout_one_with_hand_model() {
        // Hand-set vectors: the closest neighbor chains are fixed.
        use crate::embedding::Vocabulary;
        use crate::linalg::Mat;
        let vocab = Vocabulary::from_entries(
            vec![
                ("جيد".into(), 5),
                ("سيئ".into(), 4),
                ("ممتاز".into(), 3),
                ("رديء".into(), 2),
            ],
            1,
        )
        .unwrap();
        // جيد ~ ممتاز, سيئ ~ رديء, and the two groups are orthogonal-ish.
        let input = Mat::from_vec(
            4,
            2,
            vec![1.0, 0.1, -1.0, 0.1, 1.0, 0.2, -1.0, 0.2],
        );
        let model = crate::embedding::EmbeddingModel::from_parts(
            vocab,
            input,
            Mat::zeros(4, 2),
            crate::embedding::TrainingConfig { dim: 2, ..Default::default() },
        );
        let lex = expand_auto_lexicon(&model, &seeds(1, 1)).unwrap();
        assert!(lex.len() <= 6);
        assert_eq!(lex.score("جيد"), Some(1.0));
        assert_eq!(lex.score("ممتاز"), Some(1.0));
        assert_eq!(lex.score("سيئ"), Some(-1.0));
        assert_eq!(lex.score("رديء"), Some(-1.0));
    }

    fn annotate(pairs: &[(&str, Annotation)]) -> HashMap<String, Annotation> {
        pairs.iter().map(|(w, a)| (w.to_string(), *a)).collect()
    }

    #[test]
    fn audit_flags_opposite_in_top() {
        let mock = table(&[("جيد", &["ممتاز", "سيء"]), ("سيئ", &["رديء", "تعيس"])]);
        let ann = annotate(&[
            ("ممتاز", Annotation::Positive),
            ("سيء", Annotation::Negative),
            ("رديء", Annotation::Negative),
            ("تعيس", Annotation::Negative),
        ]);
        let report = audit_model(&mock, &seeds(2, 1), &ann).unwrap();
        assert!(report.flags.contains(&AuditFlag::OppositeInTop));
        assert_eq!(report.verdict, Verdict::Reject);
    }

    #[test]
    fn audit_flags_neutral_in_top() {
        let mock = table(&[("جيد", &["طبيعي"]), ("سيئ", &["طبيعي"])]);
        let ann = annotate(&[("طبيعي", Annotation::Neutral)]);
        let report = audit_model(&mock, &seeds(1, 1), &ann).unwrap();
        assert!(report.flags.contains(&AuditFlag::NeutralInTop));
        assert_eq!(report.verdict, Verdict::Reject);
    }

    #[test]
    fn audit_flags_variants_only() {
        let mock = table(&[("جيد", &["ممتاز"]), ("سيئ", &["سيء", "سييء"])]);
        let ann = annotate(&[
            ("ممتاز", Annotation::Positive),
            ("سيء", Annotation::VariantOfSeed),
            ("سييء", Annotation::VariantOfSeed),
        ]);
        let report = audit_model(&mock, &seeds(2, 1), &ann).unwrap();
        assert!(report.flags.contains(&AuditFlag::VariantsOnly));
        assert_eq!(report.verdict, Verdict::Reject);
    }

    #[test]
    fn audit_accepts_clean_model() {
        let mock = table(&[("جيد", &["ممتاز", "رائع"]), ("سيئ", &["رديء", "تعيس"])]);
        let ann = annotate(&[
            ("ممتاز", Annotation::Positive),
            ("رائع", Annotation::Positive),
            ("رديء", Annotation::Negative),
            ("تعيس", Annotation::Negative),
        ]);
        let report = audit_model(&mock, &seeds(2, 1), &ann).unwrap();
        assert!(report.flags.is_empty());
        assert_eq!(report.verdict, Verdict::Accept);
    }

    #[test]
    fn audit_reports_missing_annotations() {
        let mock = table(&[("جيد", &["ممتاز"]), ("سيئ", &["رديء"])]);
        let ann = annotate(&[("ممتاز", Annotation::Positive)]);
        match audit_model(&mock, &seeds(1, 1), &ann) {
            Err(LexiconError::MissingAnnotations { words }) => {
                assert_eq!(words, vec!["رديء".to_string()]);
            }
            other => panic!("expected missing-annotation error, got {other:?}"),
        }
    }
}
