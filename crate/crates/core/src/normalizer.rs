//! Corpus pre-processing: markup stripping, character filtering, letter
//! normalization, whitespace tokenization and corpus statistics.
//!
//! The filtering rules keep Arabic letters only: Latin text, digits in both
//! scripts, punctuation in both scripts, diacritics and tatweel are removed,
//! and the letters آ إ أ fold to ا while ة folds to ه. Removed characters
//! become spaces (so `جيد!سيئ` splits into two tokens) except diacritics and
//! tatweel, which vanish in place (so `جـــيد` stays one word).

use std::fmt;

use thiserror::Error;

const TATWEEL: char = '\u{0640}';

/// The eight harakat (short-vowel marks), U+064B..U+0652.
#[inline]
fn is_harakat(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}')
}

/// Other nonspacing combining marks (Quranic annotation signs, superscript
/// alef, generic combining diacritics). Removing these must not split the
/// word they attach to.
#[inline]
fn is_combining_mark(c: char) -> bool {
    matches!(c,
        '\u{0610}'..='\u{061A}'
        | '\u{0653}'..='\u{065F}'
        | '\u{0670}'
        | '\u{06D6}'..='\u{06ED}'
        | '\u{0300}'..='\u{036F}'
        | '\u{1AB0}'..='\u{1AFF}'
        | '\u{1DC0}'..='\u{1DFF}'
        | '\u{20D0}'..='\u{20FF}'
        | '\u{FE20}'..='\u{FE2F}')
}

/// The letters retained after normalization: the standard Arabic alphabet
/// including the hamza forms, U+0621..U+063A and U+0641..U+064A.
#[inline]
pub fn is_arabic_letter(c: char) -> bool {
    matches!(c, '\u{0621}'..='\u{063A}' | '\u{0641}'..='\u{064A}')
}

#[inline]
fn is_arabic_indic_digit(c: char) -> bool {
    matches!(c, '\u{0660}'..='\u{0669}' | '\u{06F0}'..='\u{06F9}')
}

/// Character-filtering switches. Everything defaults to enabled except
/// [`fold_alef_maqsura`](NormalizationConfig::fold_alef_maqsura), which keeps
/// ى and ي distinct.
#[derive(Debug, Clone)]
pub struct NormalizationConfig {
    /// Remove letters from any non-Arabic script (Latin, CJK, ...).
    pub remove_non_arabic: bool,
    /// Remove Western (1234) and Arabic-Indic (١٢٣٤) digits.
    pub remove_digits: bool,
    /// Remove punctuation and symbols from both scripts (`{}!;`, `،؟`, `@#%$`, ...).
    pub remove_special_chars: bool,
    /// Fold آ إ أ to ا and ة to ه.
    pub normalize_letters: bool,
    /// Drop the eight harakat marks.
    pub strip_diacritics: bool,
    /// Drop the elongation character ـ.
    pub strip_tatweel: bool,
    /// Fold ى to ي. Off by default.
    pub fold_alef_maqsura: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            remove_non_arabic: true,
            remove_digits: true,
            remove_special_chars: true,
            normalize_letters: true,
            strip_diacritics: true,
            strip_tatweel: true,
            fold_alef_maqsura: false,
        }
    }
}

enum CharAction {
    Keep(char),
    Drop,
    Space,
}

fn classify(c: char, cfg: &NormalizationConfig) -> CharAction {
    use CharAction::*;
    let c = if cfg.normalize_letters {
        match c {
            'آ' | 'إ' | 'أ' => 'ا',
            'ة' => 'ه',
            other => other,
        }
    } else {
        c
    };
    let c = if cfg.fold_alef_maqsura && c == 'ى' { 'ي' } else { c };

    if is_arabic_letter(c) {
        return Keep(c);
    }
    if c == TATWEEL {
        return if cfg.strip_tatweel { Drop } else { Keep(c) };
    }
    if is_harakat(c) {
        return if cfg.strip_diacritics { Drop } else { Keep(c) };
    }
    if is_combining_mark(c) {
        return if cfg.remove_special_chars { Drop } else { Keep(c) };
    }
    if c.is_whitespace() {
        return Space;
    }
    if c.is_ascii_digit() || is_arabic_indic_digit(c) {
        return if cfg.remove_digits { Space } else { Keep(c) };
    }
    if c.is_alphabetic() {
        // Any letter outside the fixed Arabic alphabet counts as non-Arabic,
        // including Arabic-block extensions such as پ or ٱ.
        return if cfg.remove_non_arabic { Space } else { Keep(c) };
    }
    if cfg.remove_special_chars {
        Space
    } else {
        Keep(c)
    }
}

/// Applies the character filters to `text`. Runs of whitespace (and removed
/// characters) collapse to a single space; the result is trimmed. Total
/// function: never fails.
pub fn normalize(text: &str, cfg: &NormalizationConfig) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        match classify(c, cfg) {
            CharAction::Keep(c) => {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push(c);
            }
            CharAction::Drop => {}
            CharAction::Space => pending_space = true,
        }
    }
    out
}

/// [`normalize`] applied line by line, preserving line structure so that
/// downstream tokenization can treat each line as a sentence. Empty lines
/// (after filtering) are dropped.
pub fn normalize_lines(text: &str, cfg: &NormalizationConfig) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let n = normalize(line, cfg);
        if !n.is_empty() {
            out.push_str(&n);
            out.push('\n');
        }
    }
    out
}

/// Whitespace-delimited tokens plus sentence boundaries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    /// Index of the first token of each sentence (one sentence per non-empty
    /// input line).
    pub sentence_starts: Vec<usize>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_sentences(&self) -> usize {
        self.sentence_starts.len()
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[String]> {
        let ends = self
            .sentence_starts
            .iter()
            .skip(1)
            .copied()
            .chain(std::iter::once(self.tokens.len()));
        self.sentence_starts
            .iter()
            .zip(ends)
            .map(move |(&s, e)| &self.tokens[s..e])
    }
}

/// Splits normalized text on whitespace. Sentence boundaries fall at the
/// newlines of the input; empty lines yield no sentence.
pub fn tokenize(text: &str) -> TokenStream {
    let mut ts = TokenStream::default();
    for line in text.lines() {
        let mut words = line.split_whitespace().peekable();
        if words.peek().is_none() {
            continue;
        }
        ts.sentence_starts.push(ts.tokens.len());
        ts.tokens.extend(words.map(str::to_owned));
    }
    ts
}

#[derive(Debug, Error)]
#[error("word count after filtering ({after}) exceeds the count before ({before})")]
pub struct StatsError {
    pub before: u64,
    pub after: u64,
}

/// Before/after word counts of a filtering pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusStats {
    pub words_before: u64,
    pub words_after: u64,
    pub removed: u64,
    /// `removed / words_before`, in `[0, 1]`; 0 when the corpus is empty.
    pub removed_fraction: f64,
}

impl CorpusStats {
    /// Removed share as a percentage.
    pub fn percent_removed(&self) -> f64 {
        self.removed_fraction * 100.0
    }

    /// Percentage formatted to two decimal places, e.g. `0.31%`.
    pub fn percent_display(&self) -> String {
        format!("{:.2}%", self.percent_removed())
    }

    /// The 4-field TSV row emitted by the CLI: before, after, removed, fraction.
    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.words_before,
            self.words_after,
            self.removed,
            self.percent_display()
        )
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} words, removed {} ({})",
            self.words_before,
            self.words_after,
            self.removed,
            self.percent_display()
        )
    }
}

pub fn corpus_stats(before: u64, after: u64) -> Result<CorpusStats, StatsError> {
    if after > before {
        return Err(StatsError { before, after });
    }
    let removed = before - after;
    let removed_fraction = if before > 0 { removed as f64 / before as f64 } else { 0.0 };
    Ok(CorpusStats { words_before: before, words_after: after, removed, removed_fraction })
}

/// Input container format for [`strip_markup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Plain,
    /// The newspaper-corpus XML layout: article elements whose `headline` and
    /// `body`/`text` children carry content, with ID/date/URL children dropped.
    AbuElKhairXml,
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(CorpusFormat::Plain),
            "xml" => Ok(CorpusFormat::AbuElKhairXml),
            other => Err(format!("unknown corpus format '{other}' (expected plain|xml)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum MarkupError {
    #[error("line {line}: unclosed element <{name}>")]
    Unclosed { name: String, line: usize },
    #[error("line {line}: closing tag </{found}> does not match open <{expected}>")]
    Mismatched { found: String, expected: String, line: usize },
    #[error("line {line}: closing tag </{name}> without a matching open tag")]
    StrayClose { name: String, line: usize },
    #[error("line {line}: malformed tag")]
    Malformed { line: usize },
}

/// Element names whose text content is kept.
fn is_keep_element(name: &str) -> bool {
    name.eq_ignore_ascii_case("headline")
        || name.eq_ignore_ascii_case("body")
        || name.eq_ignore_ascii_case("text")
}

#[derive(Debug)]
enum ScanState {
    Text,
    Tag(String),
    Comment { dashes: u8 },
}

struct Frame {
    name: String,
    had_keep_child: bool,
}

/// Incremental tag stripper so multi-gigabyte corpora can be processed in
/// bounded memory. Feed chunks, drain text with [`take_text`], then call
/// [`finish`].
///
/// [`take_text`]: MarkupStripper::take_text
/// [`finish`]: MarkupStripper::finish
pub struct MarkupStripper {
    state: ScanState,
    stack: Vec<Frame>,
    keep_depth: usize,
    line: usize,
    out: String,
}

impl Default for MarkupStripper {
    fn default() -> Self {
        Self::new()
    }
}

impl MarkupStripper {
    pub fn new() -> Self {
        MarkupStripper {
            state: ScanState::Text,
            stack: Vec::new(),
            keep_depth: 0,
            line: 1,
            out: String::new(),
        }
    }

    pub fn feed(&mut self, chunk: &str) -> Result<(), MarkupError> {
        for c in chunk.chars() {
            if c == '\n' {
                self.line += 1;
            }
            match &mut self.state {
                ScanState::Text => {
                    if c == '<' {
                        self.state = ScanState::Tag(String::new());
                    } else if self.keep_depth > 0 {
                        self.out.push(c);
                    }
                }
                ScanState::Tag(buf) => {
                    if c == '>' {
                        let tag = std::mem::take(buf);
                        self.state = ScanState::Text;
                        self.handle_tag(&tag)?;
                    } else {
                        buf.push(c);
                        if buf.len() == 3 && buf == "!--" {
                            self.state = ScanState::Comment { dashes: 0 };
                        }
                    }
                }
                ScanState::Comment { dashes } => {
                    if c == '-' {
                        *dashes = (*dashes + 1).min(2);
                    } else if c == '>' && *dashes >= 2 {
                        self.state = ScanState::Text;
                    } else {
                        *dashes = 0;
                    }
                }
            }
        }
        Ok(())
    }

    fn handle_tag(&mut self, tag: &str) -> Result<(), MarkupError> {
        let tag = tag.trim();
        if tag.is_empty() {
            return Err(MarkupError::Malformed { line: self.line });
        }
        // Declarations and processing instructions carry no content.
        if tag.starts_with('!') || tag.starts_with('?') {
            return Ok(());
        }
        if let Some(name) = tag.strip_prefix('/') {
            let name = name.trim();
            let frame = self.stack.pop().ok_or_else(|| MarkupError::StrayClose {
                name: name.to_string(),
                line: self.line,
            })?;
            if !frame.name.eq_ignore_ascii_case(name) {
                return Err(MarkupError::Mismatched {
                    found: name.to_string(),
                    expected: frame.name,
                    line: self.line,
                });
            }
            if is_keep_element(&frame.name) {
                self.keep_depth -= 1;
                self.out.push(' ');
                if let Some(parent) = self.stack.last_mut() {
                    parent.had_keep_child = true;
                }
            } else if frame.had_keep_child {
                // Closing an article container: document boundary.
                self.out.push('\n');
            }
            return Ok(());
        }
        let self_closing = tag.ends_with('/');
        let name: String = tag
            .chars()
            .take_while(|c| !c.is_whitespace() && *c != '/')
            .collect();
        if name.is_empty() {
            return Err(MarkupError::Malformed { line: self.line });
        }
        if self_closing {
            return Ok(());
        }
        if is_keep_element(&name) {
            self.keep_depth += 1;
        }
        self.stack.push(Frame { name, had_keep_child: false });
        Ok(())
    }

    /// Drains the text extracted so far.
    pub fn take_text(&mut self) -> String {
        std::mem::take(&mut self.out)
    }

    /// Validates that every element was closed and returns any remaining text.
    pub fn finish(mut self) -> Result<String, MarkupError> {
        if let Some(frame) = self.stack.pop() {
            return Err(MarkupError::Unclosed { name: frame.name, line: self.line });
        }
        if matches!(self.state, ScanState::Tag(_) | ScanState::Comment { .. }) {
            return Err(MarkupError::Malformed { line: self.line });
        }
        Ok(std::mem::take(&mut self.out))
    }
}

/// Strips markup from a whole document. Plain mode is the identity; XML mode
/// keeps headline/body text, one output line per article.
pub fn strip_markup(raw: &str, format: CorpusFormat) -> Result<String, MarkupError> {
    match format {
        CorpusFormat::Plain => Ok(raw.to_string()),
        CorpusFormat::AbuElKhairXml => {
            let mut stripper = MarkupStripper::new();
            stripper.feed(raw)?;
            let text = stripper.finish()?;
            // Tidy separator artifacts: trim line edges and drop empty lines.
            let mut out = String::with_capacity(text.len());
            for line in text.lines() {
                let line = line.trim();
                if !line.is_empty() {
                    if !out.is_empty() {
                        out.push('\n');
                    }
                    out.push_str(line);
                }
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> NormalizationConfig {
        NormalizationConfig::default()
    }

    #[test]
    fn strip_markup_doc_example() {
        let raw = "<doc><id>7</id><headline>س</headline><body>ص</body></doc>";
        assert_eq!(strip_markup(raw, CorpusFormat::AbuElKhairXml).unwrap(), "س ص");
    }

    #[test]
    fn strip_markup_plain_passthrough() {
        assert_eq!(strip_markup("جيد", CorpusFormat::Plain).unwrap(), "جيد");
    }

    #[test]
    fn strip_markup_drops_url_element() {
        let raw = "<doc><url>http://x</url><headline>س</headline><body>ص</body></doc>";
        let out = strip_markup(raw, CorpusFormat::AbuElKhairXml).unwrap();
        assert!(!out.contains("http"));
        assert_eq!(out, "س ص");
    }

    #[test]
    fn strip_markup_two_docs_two_lines() {
        let raw = "<doc><headline>ا</headline><body>ب</body></doc>\
                   <doc><headline>ج</headline><body>د</body></doc>";
        let out = strip_markup(raw, CorpusFormat::AbuElKhairXml).unwrap();
        assert_eq!(out, "ا ب\nج د");
    }

    #[test]
    fn strip_markup_unclosed_errors() {
        let raw = "<doc><headline>س</headline>";
        assert!(matches!(
            strip_markup(raw, CorpusFormat::AbuElKhairXml),
            Err(MarkupError::Unclosed { .. })
        ));
    }

    #[test]
    fn strip_markup_mismatched_errors() {
        let raw = "<doc><headline>س</body></doc>";
        assert!(matches!(
            strip_markup(raw, CorpusFormat::AbuElKhairXml),
            Err(MarkupError::Mismatched { .. })
        ));
    }

    #[test]
    fn strip_markup_handles_comments_and_attrs() {
        let raw = "<doc id=\"3\"><!-- note > with gt --><body>ص</body></doc>";
        assert_eq!(strip_markup(raw, CorpusFormat::AbuElKhairXml).unwrap(), "ص");
    }

    #[test]
    fn normalize_mixed_scripts_and_digits() {
        assert_eq!(normalize("Hello مرحبا 123 ١٢٣", &cfg()), "مرحبا");
    }

    #[test]
    fn normalize_letter_folding_and_punctuation() {
        assert_eq!(normalize("أحمد، جيد!", &cfg()), "احمد جيد");
    }

    #[test]
    fn normalize_empty() {
        assert_eq!(normalize("", &cfg()), "");
    }

    #[test]
    fn normalize_strips_tatweel_in_place() {
        assert_eq!(normalize("جـــيد", &cfg()), "جيد");
    }

    #[test]
    fn normalize_diacritics_removed_in_place() {
        assert_eq!(normalize("جَيِّد", &cfg()), "جيد");
    }

    #[test]
    fn normalize_combining_marks_do_not_split_words() {
        // Superscript alef and a Quranic annotation sign vanish in place.
        assert_eq!(normalize("رحمٰن", &cfg()), "رحمن");
        assert_eq!(normalize("جيؕد", &cfg()), "جيد");
    }

    #[test]
    fn normalize_punctuation_splits_tokens() {
        assert_eq!(normalize("جيد!سيئ", &cfg()), "جيد سيئ");
    }

    #[test]
    fn normalize_alef_maqsura_kept_by_default() {
        assert_eq!(normalize("مستشفى", &cfg()), "مستشفى");
        let folded = NormalizationConfig { fold_alef_maqsura: true, ..cfg() };
        assert_eq!(normalize("مستشفى", &folded), "مستشفي");
    }

    #[test]
    fn normalize_flags_can_keep_content() {
        let keep_all = NormalizationConfig {
            remove_non_arabic: false,
            remove_digits: false,
            remove_special_chars: false,
            normalize_letters: false,
            strip_diacritics: false,
            strip_tatweel: false,
            fold_alef_maqsura: false,
        };
        assert_eq!(normalize("Hi! أ1", &keep_all), "Hi! أ1");
    }

    #[test]
    fn tokenize_basic() {
        let ts = tokenize("احمد جيد");
        assert_eq!(ts.tokens, vec!["احمد", "جيد"]);
        assert_eq!(ts.sentence_starts, vec![0]);
    }

    #[test]
    fn tokenize_empty() {
        let ts = tokenize("");
        assert!(ts.is_empty());
        assert_eq!(ts.n_sentences(), 0);
    }

    #[test]
    fn tokenize_two_lines_two_sentences() {
        let ts = tokenize("ا ب\nج");
        assert_eq!(ts.n_sentences(), 2);
        let sents: Vec<_> = ts.sentences().collect();
        assert_eq!(sents[0], &["ا".to_string(), "ب".to_string()][..]);
        assert_eq!(sents[1], &["ج".to_string()][..]);
    }

    #[test]
    fn corpus_stats_paper_counts() {
        let s = corpus_stats(1_525_722_252, 1_520_968_919).unwrap();
        assert_eq!(s.removed, 4_753_333);
        assert_eq!(s.percent_display(), "0.31%");
    }

    #[test]
    fn corpus_stats_no_removal() {
        let s = corpus_stats(10, 10).unwrap();
        assert_eq!(s.removed, 0);
        assert_eq!(s.removed_fraction, 0.0);
    }

    #[test]
    fn corpus_stats_small_ratio() {
        let s = corpus_stats(100, 97).unwrap();
        assert_eq!(s.removed, 3);
        assert!((s.removed_fraction - 0.03).abs() < 1e-12);
    }

    #[test]
    fn corpus_stats_contract_violation() {
        assert!(corpus_stats(5, 6).is_err());
    }

    #[test]
    fn corpus_stats_empty_corpus() {
        let s = corpus_stats(0, 0).unwrap();
        assert_eq!(s.removed_fraction, 0.0);
    }
}
