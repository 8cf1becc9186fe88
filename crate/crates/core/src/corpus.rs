//! Corpus ingestion: tokenization, vocabulary construction, document token streams.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// A tokenized document: a stable id plus its word-type indices in text order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<u32>,
}

impl Document {
    /// Token count T_b.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Distinct word types in first-occurrence order, with the inverse index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&i) = self.index.get(word) {
            return i;
        }
        let i = u32::try_from(self.words.len()).expect("vocabulary exceeds u32 range");
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), i);
        i
    }

    fn from_words(words: Vec<String>) -> Vocabulary {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Vocabulary { words, index }
    }
}

/// An ordered document collection over a shared vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocabulary: Vocabulary,
    pub total_tokens: u64,
}

impl Corpus {
    /// Number of texts B.
    pub fn num_documents(&self) -> usize {
        self.documents.len()
    }

    /// Number of word types N.
    pub fn num_word_types(&self) -> usize {
        self.vocabulary.len()
    }

    /// Assemble a corpus from pre-indexed token streams over a fixed word list.
    ///
    /// Used by the generators, whose vocabulary is the model support and may
    /// include words that never occur. Token indices must stay in range.
    pub fn from_indexed(words: Vec<String>, docs: Vec<(String, Vec<u32>)>) -> Corpus {
        let vocabulary = Vocabulary::from_words(words);
        let n = vocabulary.len() as u32;
        let mut total_tokens = 0u64;
        let documents = docs
            .into_iter()
            .map(|(id, tokens)| {
                debug_assert!(tokens.iter().all(|&t| t < n));
                total_tokens += tokens.len() as u64;
                Document { id, tokens }
            })
            .collect();
        Corpus {
            documents,
            vocabulary,
            total_tokens,
        }
    }
}

/// Split text into lowercased word tokens.
///
/// A token is a maximal run of Unicode alphabetic characters, optionally with
/// single hyphens joining two alphabetic runs ("кто-то"). Every other
/// character, digits included, separates tokens; "ё" is never folded to "е".
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut pending_hyphen = false;
    for ch in text.chars() {
        if ch.is_alphabetic() {
            if pending_hyphen {
                current.push('-');
                pending_hyphen = false;
            }
            for lc in ch.to_lowercase() {
                current.push(lc);
            }
        } else if ch == '-' && !current.is_empty() && !pending_hyphen {
            // Keep the hyphen only if another letter follows immediately.
            pending_hyphen = true;
        } else {
            pending_hyphen = false;
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Build a corpus from (id, text) sources, preserving source order.
///
/// Tokenization runs in parallel; vocabulary numbering is a sequential merge
/// over documents in order, so word indices follow first occurrence.
pub fn build_corpus<S, T>(sources: &[(S, T)]) -> Result<Corpus>
where
    S: AsRef<str> + Sync,
    T: AsRef<str> + Sync,
{
    let mut seen = HashSet::with_capacity(sources.len());
    for (id, _) in sources {
        if !seen.insert(id.as_ref()) {
            return Err(Error::DuplicateDocId(id.as_ref().to_owned()));
        }
    }

    let token_lists: Vec<Vec<String>> = sources
        .par_iter()
        .map(|(_, text)| tokenize(text.as_ref()))
        .collect();

    let mut vocabulary = Vocabulary::default();
    let mut documents = Vec::with_capacity(sources.len());
    let mut total_tokens = 0u64;
    for ((id, _), words) in sources.iter().zip(token_lists) {
        let tokens: Vec<u32> = words.iter().map(|w| vocabulary.intern(w)).collect();
        total_tokens += tokens.len() as u64;
        documents.push(Document {
            id: id.as_ref().to_owned(),
            tokens,
        });
    }

    Ok(Corpus {
        documents,
        vocabulary,
        total_tokens,
    })
}

/// Parse a manifest of `id<TAB>path` lines. Blank lines are skipped; relative
/// paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let text = read_utf8(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut sources = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, '\t');
        let id = parts.next().unwrap_or("");
        let rel = parts.next().unwrap_or("");
        if id.is_empty() || rel.is_empty() {
            return Err(Error::MalformedManifest {
                path: path.to_owned(),
                line: lineno + 1,
            });
        }
        sources.push((id.to_owned(), base.join(rel)));
    }
    Ok(sources)
}

/// List a directory's plain files in lexicographic name order; the file name
/// becomes the document id.
pub fn scan_directory(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut sources = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;
        let path = entry.path();
        if path.is_file() {
            let name = entry.file_name().to_string_lossy().into_owned();
            sources.push((name, path));
        }
    }
    sources.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(sources)
}

/// Read the listed UTF-8 files and build a corpus from them.
pub fn load_corpus(sources: &[(String, PathBuf)]) -> Result<Corpus> {
    let mut texts = Vec::with_capacity(sources.len());
    for (id, path) in sources {
        texts.push((id.clone(), read_utf8(path)?));
    }
    build_corpus(&texts)
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        path: path.to_owned(),
        offset: e.utf8_error().valid_up_to(),
    })
}
