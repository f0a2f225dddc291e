//! Frequency-ranked vocabulary construction.

use std::collections::HashMap;
use std::io;

use super::EmbeddingError;

/// Corpus vocabulary ordered by descending frequency, ties broken by first
/// occurrence.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    min_count: u64,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Total retained token occurrences (sum of counts).
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Builds a vocabulary from known words with the given counts. Used when
    /// loading persisted models (counts unknown → zeros) and for synthetic
    /// models in tests.
    pub fn from_entries(entries: Vec<(String, u64)>, min_count: u64) -> Result<Self, EmbeddingError> {
        if entries.is_empty() {
            return Err(EmbeddingError::EmptyVocabulary);
        }
        let mut vocab = Vocabulary { min_count, ..Default::default() };
        for (word, count) in entries {
            if vocab.index.contains_key(&word) {
                return Err(EmbeddingError::DuplicateWord { word });
            }
            vocab.index.insert(word.clone(), vocab.words.len());
            vocab.words.push(word);
            vocab.counts.push(count);
            vocab.total_tokens += count;
        }
        Ok(vocab)
    }
}

/// A re-scannable source of sentences. Training passes over the corpus once
/// per epoch plus once for the vocabulary, so the source must be readable
/// repeatedly.
pub trait Corpus: Sync {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> io::Result<()>;
}

/// In-memory corpus: one `Vec<String>` per sentence.
#[derive(Debug, Clone, Default)]
pub struct MemoryCorpus {
    pub sentences: Vec<Vec<String>>,
}

impl MemoryCorpus {
    pub fn new(sentences: Vec<Vec<String>>) -> Self {
        MemoryCorpus { sentences }
    }

    pub fn from_token_stream(ts: &crate::normalizer::TokenStream) -> Self {
        MemoryCorpus { sentences: ts.sentences().map(|s| s.to_vec()).collect() }
    }
}

impl Corpus for MemoryCorpus {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> io::Result<()> {
        for s in &self.sentences {
            f(s);
        }
        Ok(())
    }
}

/// File-backed corpus: one sentence per line, tokens whitespace-separated.
/// Re-opens the file on every pass, keeping memory bounded.
#[derive(Debug, Clone)]
pub struct TextFileCorpus {
    pub path: std::path::PathBuf,
}

impl TextFileCorpus {
    pub fn new(path: impl Into<std::path::PathBuf>) -> Self {
        TextFileCorpus { path: path.into() }
    }
}

impl Corpus for TextFileCorpus {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> io::Result<()> {
        use std::io::BufRead;
        let file = std::fs::File::open(&self.path)?;
        let reader = std::io::BufReader::new(file);
        let mut sentence: Vec<String> = Vec::new();
        for line in reader.lines() {
            let line = line?;
            sentence.clear();
            sentence.extend(line.split_whitespace().map(str::to_owned));
            if !sentence.is_empty() {
                f(&sentence);
            }
        }
        Ok(())
    }
}

/// Counts words and keeps those occurring at least `min_count` times.
pub fn build_vocabulary(corpus: &dyn Corpus, min_count: u64) -> Result<Vocabulary, EmbeddingError> {
    let mut counts: HashMap<String, (u64, usize)> = HashMap::new();
    let mut next_first = 0usize;
    corpus.for_each_sentence(&mut |sentence| {
        for word in sentence {
            match counts.get_mut(word.as_str()) {
                Some((c, _)) => *c += 1,
                None => {
                    counts.insert(word.clone(), (1, next_first));
                    next_first += 1;
                }
            }
        }
    })?;

    let mut entries: Vec<(String, u64, usize)> = counts
        .into_iter()
        .filter(|(_, (c, _))| *c >= min_count)
        .map(|(w, (c, first))| (w, c, first))
        .collect();
    if entries.is_empty() {
        return Err(EmbeddingError::EmptyVocabulary);
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));

    let mut vocab = Vocabulary { min_count, ..Default::default() };
    for (word, count, _) in entries {
        vocab.index.insert(word.clone(), vocab.words.len());
        vocab.words.push(word);
        vocab.counts.push(count);
        vocab.total_tokens += count;
    }
    Ok(vocab)
}
