//! Sparse text features: term counts, TF-IDF weighting, POS-tag filtering
//! and lexicon-score aggregation.

use std::collections::HashMap;

use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::scalar::{cast, Real};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("line {line}: malformed tagged token '{token}' (expected 'token/TAG')")]
    MalformedTaggedToken { line: usize, token: String },
}

/// Feature representation selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMode {
    Tf,
    Tfidf,
    /// TF-IDF over tokens whose POS tag is allowed (verbs and adjectives by
    /// default).
    Pos,
    /// TF-IDF plus aggregate score columns from a manually built lexicon.
    Lex,
    /// TF-IDF plus aggregate score columns from the auto-expanded lexicon.
    AutoLex,
}

impl FeatureMode {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureMode::Tf => "tf",
            FeatureMode::Tfidf => "tfidf",
            FeatureMode::Pos => "pos",
            FeatureMode::Lex => "lex",
            FeatureMode::AutoLex => "autolex",
        }
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tf" => Ok(FeatureMode::Tf),
            "tfidf" | "tf-idf" => Ok(FeatureMode::Tfidf),
            "pos" => Ok(FeatureMode::Pos),
            "lex" => Ok(FeatureMode::Lex),
            "autolex" | "auto-lex" => Ok(FeatureMode::AutoLex),
            other => Err(format!(
                "unknown feature mode '{other}' (expected tf|tfidf|pos|lex|autolex)"
            )),
        }
    }
}

/// Word → column mapping, columns ordered by first occurrence.
#[derive(Debug, Clone, Default)]
pub struct TermIndex {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl TermIndex {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, col: usize) -> &str {
        &self.terms[col]
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

/// Learns the term → column mapping from documents, column order by first
/// occurrence.
pub fn fit_vocabulary<D: AsRef<[String]>>(docs: &[D]) -> Result<TermIndex, FeatureError> {
    if docs.is_empty() || docs.iter().all(|d| d.as_ref().is_empty()) {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut ti = TermIndex::default();
    for doc in docs {
        for token in doc.as_ref() {
            if !ti.index.contains_key(token) {
                ti.index.insert(token.clone(), ti.terms.len());
                ti.terms.push(token.clone());
            }
        }
    }
    Ok(ti)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Tf,
    Tfidf,
}

/// Sparse documents × terms matrix. Rows hold `(column, weight)` pairs with
/// strictly increasing columns. When a lexicon contributes aggregate
/// features, those occupy `aggregate_cols` extra columns after the term
/// columns and are excluded from row normalization.
#[derive(Debug, Clone)]
pub struct DocumentTermMatrix<S> {
    pub term_index: TermIndex,
    pub rows: Vec<Vec<(usize, S)>>,
    pub mode: WeightMode,
    pub aggregate_cols: usize,
}

impl<S: Real> DocumentTermMatrix<S> {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.term_index.len()
    }

    /// Total column count including aggregate columns.
    pub fn n_cols(&self) -> usize {
        self.term_index.len() + self.aggregate_cols
    }

    pub fn row(&self, doc: usize) -> &[(usize, S)] {
        &self.rows[doc]
    }

    /// Sparse triplet TSV `doc<TAB>term<TAB>weight` for debugging.
    pub fn to_triplets_tsv(&self) -> String {
        let mut out = String::new();
        for (doc, row) in self.rows.iter().enumerate() {
            for (col, w) in row {
                out.push_str(&format!("{doc}\t{col}\t{w}\n"));
            }
        }
        out
    }
}

fn count_row<S: Real>(doc: &[String], ti: &TermIndex) -> Vec<(usize, S)> {
    let mut counts: HashMap<usize, u32> = HashMap::new();
    for token in doc {
        if let Some(col) = ti.column(token) {
            *counts.entry(col).or_insert(0) += 1;
        }
    }
    let mut row: Vec<(usize, S)> = counts
        .into_iter()
        .map(|(col, c)| (col, cast::<S>(c as f64)))
        .collect();
    row.sort_by_key(|&(col, _)| col);
    row
}

/// Raw term counts per document against a fitted vocabulary. Tokens outside
/// the vocabulary are ignored.
pub fn tf_matrix<S: Real, D: AsRef<[String]>>(docs: &[D], ti: &TermIndex) -> DocumentTermMatrix<S> {
    DocumentTermMatrix {
        term_index: ti.clone(),
        rows: docs.iter().map(|d| count_row(d.as_ref(), ti)).collect(),
        mode: WeightMode::Tf,
        aggregate_cols: 0,
    }
}

/// Smoothed inverse document frequencies fitted on a training corpus:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
#[derive(Debug, Clone)]
pub struct TfidfModel<S> {
    pub term_index: TermIndex,
    pub idf: Vec<S>,
}

impl<S: Real> TfidfModel<S> {
    /// Fits document frequencies over `docs` using the given vocabulary.
    pub fn fit<D: AsRef<[String]>>(docs: &[D], ti: &TermIndex) -> Self {
        let n = docs.len() as f64;
        let mut df = vec![0u32; ti.len()];
        let mut seen: Vec<usize> = Vec::new();
        for doc in docs {
            seen.clear();
            for token in doc.as_ref() {
                if let Some(col) = ti.column(token) {
                    if !seen.contains(&col) {
                        seen.push(col);
                    }
                }
            }
            for &col in &seen {
                df[col] += 1;
            }
        }
        let idf = df
            .iter()
            .map(|&d| cast::<S>(((1.0 + n) / (1.0 + d as f64)).ln() + 1.0))
            .collect();
        TfidfModel { term_index: ti.clone(), idf }
    }

    /// `tf * idf` with L2 row normalization.
    pub fn transform<D: AsRef<[String]>>(&self, docs: &[D]) -> DocumentTermMatrix<S> {
        let rows = docs
            .iter()
            .map(|doc| {
                let mut row = count_row::<S>(doc.as_ref(), &self.term_index);
                for (col, w) in &mut row {
                    *w *= self.idf[*col];
                }
                let norm = row.iter().map(|&(_, w)| w * w).sum::<S>().sqrt();
                if norm > S::zero() {
                    for (_, w) in &mut row {
                        *w /= norm;
                    }
                }
                row
            })
            .collect();
        DocumentTermMatrix {
            term_index: self.term_index.clone(),
            rows,
            mode: WeightMode::Tfidf,
            aggregate_cols: 0,
        }
    }
}

/// Convenience: fit on `docs` and transform the same `docs`.
pub fn tfidf_matrix<S: Real, D: AsRef<[String]>>(docs: &[D], ti: &TermIndex) -> DocumentTermMatrix<S> {
    TfidfModel::fit(docs, ti).transform(docs)
}

/// A token with its part-of-speech label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: String,
    pub tag: String,
}

fn valid_tag(tag: &str) -> bool {
    !tag.is_empty()
        && tag
            .chars()
            .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '$' || c == '-')
}

/// Parses one line of the tagged-dataset format: tokens as `token/TAG`
/// separated by single spaces. The tag is everything after the last slash.
pub fn parse_tagged_line(line: &str, line_no: usize) -> Result<Vec<TaggedToken>, FeatureError> {
    let mut tokens = Vec::new();
    for raw in line.split_whitespace() {
        let (token, tag) = raw.rsplit_once('/').ok_or_else(|| {
            FeatureError::MalformedTaggedToken { line: line_no, token: raw.to_string() }
        })?;
        if token.is_empty() || !valid_tag(tag) {
            return Err(FeatureError::MalformedTaggedToken {
                line: line_no,
                token: raw.to_string(),
            });
        }
        tokens.push(TaggedToken { token: token.to_string(), tag: tag.to_string() });
    }
    Ok(tokens)
}

/// Parses a whole tagged file, one document per line.
pub fn parse_tagged_docs(text: &str) -> Result<Vec<Vec<TaggedToken>>, FeatureError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| parse_tagged_line(line, i + 1))
        .collect()
}

/// Default POS filter: past-tense verbs and adjectives.
pub fn default_allowed_tags() -> Vec<String> {
    vec!["VBD".to_string(), "JJ".to_string()]
}

/// True when `tag` is allowed, directly or as a determiner-attached form
/// (`DTJJ` passes when `JJ` is allowed).
pub fn tag_allowed(tag: &str, allowed: &[String]) -> bool {
    allowed.iter().any(|a| tag == a || tag.strip_prefix("DT") == Some(a))
}

/// Keeps only tokens carrying an allowed tag.
pub fn pos_filter(docs: &[Vec<TaggedToken>], allowed: &[String]) -> Vec<Vec<String>> {
    docs.iter()
        .map(|doc| {
            doc.iter()
                .filter(|t| tag_allowed(&t.tag, allowed))
                .map(|t| t.token.clone())
                .collect()
        })
        .collect()
}

/// Per-document lexicon aggregates appended as four dense columns:
/// positive-score sum, negative-score sum (≤ 0), net score and matched-token
/// count. The base TF-IDF columns are normalized; the aggregates are not.
pub fn lexicon_features<S: Real, D: AsRef<[String]>>(
    docs: &[D],
    lexicon: &Lexicon,
    tfidf: &TfidfModel<S>,
) -> DocumentTermMatrix<S> {
    let mut matrix = tfidf.transform(docs);
    let n_terms = matrix.term_index.len();
    for (doc, row) in docs.iter().zip(&mut matrix.rows) {
        let (mut pos, mut neg, mut count) = (0.0f64, 0.0f64, 0u32);
        for token in doc.as_ref() {
            if let Some(score) = lexicon.score(token) {
                count += 1;
                if score > 0.0 {
                    pos += score;
                } else {
                    neg += score;
                }
            }
        }
        let net = pos + neg;
        row.push((n_terms, cast(pos)));
        row.push((n_terms + 1, cast(neg)));
        row.push((n_terms + 2, cast(net)));
        row.push((n_terms + 3, cast(count as f64)));
    }
    matrix.aggregate_cols = 4;
    matrix
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::LexiconKind;

    fn docs(list: &[&str]) -> Vec<Vec<String>> {
        list.iter()
            .map(|d| d.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn fit_vocabulary_counts_terms() {
        let d = docs(&["ا ب", "ب ج"]);
        let ti = fit_vocabulary(&d).unwrap();
        assert_eq!(ti.len(), 3);
        assert_eq!(ti.column("ا"), Some(0));
        assert_eq!(ti.column("ب"), Some(1));
        assert_eq!(ti.column("ج"), Some(2));
    }

    #[test]
    fn fit_vocabulary_duplicates_collapse() {
        let d = docs(&["ا ا"]);
        assert_eq!(fit_vocabulary(&d).unwrap().len(), 1);
    }

    #[test]
    fn fit_vocabulary_empty_corpus_errors() {
        let d: Vec<Vec<String>> = vec![];
        assert!(matches!(fit_vocabulary(&d), Err(FeatureError::EmptyCorpus)));
        let d = docs(&[""]);
        assert!(matches!(fit_vocabulary(&d), Err(FeatureError::EmptyCorpus)));
    }

    #[test]
    fn fit_vocabulary_matches_set_union_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut corpus: Vec<Vec<String>> = Vec::new();
        let mut oracle: std::collections::HashSet<String> = Default::default();
        for _ in 0..50 {
            let len = rng.gen_range(1..12);
            let doc: Vec<String> =
                (0..len).map(|_| format!("ت{}", rng.gen_range(0..40))).collect();
            oracle.extend(doc.iter().cloned());
            corpus.push(doc);
        }
        let ti = fit_vocabulary(&corpus).unwrap();
        assert_eq!(ti.len(), oracle.len());
        for w in &oracle {
            assert!(ti.column(w).is_some());
        }
    }

    #[test]
    fn tf_counts() {
        let d = docs(&["ا ا ب", ""]);
        let ti = fit_vocabulary(&d).unwrap();
        let m = tf_matrix::<f64, _>(&d, &ti);
        assert_eq!(m.row(0), &[(0, 2.0), (1, 1.0)]);
        assert!(m.row(1).is_empty());
        assert_eq!(m.to_triplets_tsv(), "0\t0\t2\n0\t1\t1\n");
    }

    #[test]
    fn tf_matches_nested_loop_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let corpus: Vec<Vec<String>> = (0..20)
            .map(|_| {
                (0..rng.gen_range(0..15)).map(|_| format!("ع{}", rng.gen_range(0..10))).collect()
            })
            .collect();
        let ti = fit_vocabulary(&corpus).unwrap();
        let m = tf_matrix::<f64, _>(&corpus, &ti);
        for (doc_idx, doc) in corpus.iter().enumerate() {
            for col in 0..ti.len() {
                let term = ti.term(col);
                let expected = doc.iter().filter(|t| t.as_str() == term).count() as f64;
                let got = m
                    .row(doc_idx)
                    .iter()
                    .find(|&&(c, _)| c == col)
                    .map(|&(_, w)| w)
                    .unwrap_or(0.0);
                assert_eq!(got, expected);
            }
            // Row sum equals in-vocabulary token count.
            let sum: f64 = m.row(doc_idx).iter().map(|&(_, w)| w).sum();
            assert_eq!(sum, doc.len() as f64);
        }
    }

    #[test]
    fn idf_is_one_for_ubiquitous_terms() {
        let d = docs(&["ا", "ا"]);
        let ti = fit_vocabulary(&d).unwrap();
        let model = TfidfModel::<f64>::fit(&d, &ti);
        assert!((model.idf[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tfidf_two_doc_hand_arithmetic() {
        let d = docs(&["ا", "ا ب"]);
        let ti = fit_vocabulary(&d).unwrap();
        let model = TfidfModel::<f64>::fit(&d, &ti);
        // idf(ا) = ln(3/3)+1 = 1; idf(ب) = ln(3/2)+1 ≈ 1.405465
        assert!((model.idf[0] - 1.0).abs() < 1e-12);
        assert!((model.idf[1] - 1.4054651081081644).abs() < 1e-12);
        let m = model.transform(&d);
        // Row 2 pre-normalization is (1, 1.405465); after normalization, unit norm.
        let norm: f64 = m.row(1).iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        let expected0 = 1.0 / (1.0f64 + 1.4054651081081644f64.powi(2)).sqrt();
        assert!((m.row(1)[0].1 - expected0).abs() < 1e-9);
    }

    #[test]
    fn tfidf_rows_unit_norm() {
        let d = docs(&["ا ب ج", "ا ا", "ج د ه و", ""]);
        let ti = fit_vocabulary(&d).unwrap();
        let m = tfidf_matrix::<f64, _>(&d, &ti);
        for doc in 0..3 {
            let norm: f64 = m.row(doc).iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
        assert!(m.row(3).is_empty());
    }

    #[test]
    fn idf_decreases_with_document_frequency() {
        let d = docs(&["ا ب", "ا", "ا ج", "ب"]);
        let ti = fit_vocabulary(&d).unwrap();
        let model = TfidfModel::<f64>::fit(&d, &ti);
        let idf_a = model.idf[ti.column("ا").unwrap()]; // df 3
        let idf_b = model.idf[ti.column("ب").unwrap()]; // df 2
        let idf_c = model.idf[ti.column("ج").unwrap()]; // df 1
        assert!(idf_a < idf_b && idf_b < idf_c);
    }

    #[test]
    fn pos_filter_paper_example() {
        let line = "الخدمات/DTNNS الصحي/DTJJ ه/PRP الحالي/DTJJ ه/PRP متدهور/JJ ه/PRP \
                    و/CC ب/IN حاجه/NN الى/IN تغيير/NN الادارات/DTNNS";
        let doc = parse_tagged_line(line, 1).unwrap();
        let filtered = pos_filter(&[doc], &default_allowed_tags());
        assert!(filtered[0].contains(&"متدهور".to_string()));
        assert!(filtered[0].contains(&"الصحي".to_string())); // DTJJ via JJ
        assert!(filtered[0].contains(&"الحالي".to_string()));
        assert!(!filtered[0].contains(&"الخدمات".to_string()));
        assert!(!filtered[0].contains(&"حاجه".to_string()));
    }

    #[test]
    fn pos_filter_all_nouns_is_empty() {
        let doc = parse_tagged_line("بيت/NN شارع/NN", 1).unwrap();
        let filtered = pos_filter(&[doc], &default_allowed_tags());
        assert!(filtered[0].is_empty());
    }

    #[test]
    fn malformed_tagged_token_errors() {
        assert!(matches!(
            parse_tagged_line("بدون_وسم", 3),
            Err(FeatureError::MalformedTaggedToken { line: 3, .. })
        ));
        assert!(parse_tagged_line("كلمه/jj", 1).is_err());
        assert!(parse_tagged_line("كلمه/", 1).is_err());
    }

    #[test]
    fn filter_then_count_commutes_with_count_then_mask() {
        let lines = ["جيد/JJ بيت/NN ذهب/VBD", "سيئ/DTJJ جيد/JJ جيد/JJ"];
        let tagged: Vec<Vec<TaggedToken>> =
            lines.iter().enumerate().map(|(i, l)| parse_tagged_line(l, i + 1).unwrap()).collect();
        let allowed = default_allowed_tags();
        let filtered = pos_filter(&tagged, &allowed);
        let ti = fit_vocabulary(&filtered).unwrap();
        let filtered_counts = tf_matrix::<f64, _>(&filtered, &ti);

        // Oracle: count everything, then mask disallowed tokens.
        for (doc_idx, doc) in tagged.iter().enumerate() {
            for col in 0..ti.len() {
                let term = ti.term(col);
                let expected = doc
                    .iter()
                    .filter(|t| t.token == term && tag_allowed(&t.tag, &allowed))
                    .count() as f64;
                let got = filtered_counts
                    .row(doc_idx)
                    .iter()
                    .find(|&&(c, _)| c == col)
                    .map(|&(_, w)| w)
                    .unwrap_or(0.0);
                assert_eq!(got, expected);
            }
        }
    }

    fn small_lexicon() -> Lexicon {
        Lexicon::from_entries(
            vec![("جيد".to_string(), 1.0), ("سيئ".to_string(), -1.0)],
            LexiconKind::Binary,
        )
        .unwrap()
    }

    #[test]
    fn lexicon_aggregates_direct_sum() {
        let d = docs(&["جيد جيد"]);
        let ti = fit_vocabulary(&d).unwrap();
        let model = TfidfModel::<f64>::fit(&d, &ti);
        let m = lexicon_features(&d, &small_lexicon(), &model);
        let row = m.row(0);
        let aggs: Vec<f64> = row[row.len() - 4..].iter().map(|&(_, w)| w).collect();
        assert_eq!(aggs, vec![2.0, 0.0, 2.0, 2.0]);
        assert_eq!(m.aggregate_cols, 4);
        assert_eq!(m.n_cols(), ti.len() + 4);
    }

    #[test]
    fn lexicon_aggregates_no_hits() {
        let d = docs(&["بيت شارع"]);
        let ti = fit_vocabulary(&d).unwrap();
        let model = TfidfModel::<f64>::fit(&d, &ti);
        let m = lexicon_features(&d, &small_lexicon(), &model);
        let row = m.row(0);
        let aggs: Vec<f64> = row[row.len() - 4..].iter().map(|&(_, w)| w).collect();
        assert_eq!(aggs, vec![0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn lexicon_aggregates_mixed_doc() {
        let d = docs(&["جيد سيئ سيئ"]);
        let ti = fit_vocabulary(&d).unwrap();
        let model = TfidfModel::<f64>::fit(&d, &ti);
        let m = lexicon_features(&d, &small_lexicon(), &model);
        let row = m.row(0);
        let aggs: Vec<f64> = row[row.len() - 4..].iter().map(|&(_, w)| w).collect();
        assert_eq!(aggs, vec![1.0, -2.0, -1.0, 3.0]);
        // net = pos + neg
        assert_eq!(aggs[2], aggs[0] + aggs[1]);
        // Term columns are still unit-normalized.
        let norm: f64 =
            row[..row.len() - 4].iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }
}
