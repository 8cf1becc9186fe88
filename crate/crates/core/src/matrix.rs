//! Sparse word–document count matrix and its frequency view.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const VOCAB_FILE: &str = "vocab.csv";
pub const DOCS_FILE: &str = "docs.csv";
pub const COUNTS_FILE: &str = "counts.csv";

/// Sparse nonnegative count matrix n_{b,w} with per-document lengths.
///
/// Both word-major and document-major adjacency are kept so folds over either
/// axis stay cheap. `doc_lengths` holds the original token counts T_b and
/// survives row restriction unchanged: frequencies are always n/T_b with the
/// full-document denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermDocMatrix {
    words: Vec<String>,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u64>,
    by_word: Vec<Vec<(u32, u32)>>,
    by_doc: Vec<Vec<(u32, u32)>>,
    word_totals: Vec<u64>,
}

/// Mapping produced by a row restriction: kept word indices in original order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictionMap {
    /// new index -> original index, strictly increasing
    pub kept: Vec<usize>,
    /// original index -> new index
    pub old_to_new: Vec<Option<u32>>,
}

impl TermDocMatrix {
    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    /// Total token count T = Σ_b T_b of the underlying corpus.
    pub fn total_tokens(&self) -> u64 {
        self.doc_lengths.iter().sum()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn doc_lengths(&self) -> &[u64] {
        &self.doc_lengths
    }

    pub fn word_totals(&self) -> &[u64] {
        &self.word_totals
    }

    /// Nonzero (doc, count) cells of one word row, doc index ascending.
    pub fn row(&self, word: usize) -> &[(u32, u32)] {
        &self.by_word[word]
    }

    /// Nonzero (word, count) cells of one document column, word index ascending.
    pub fn col(&self, doc: usize) -> &[(u32, u32)] {
        &self.by_doc[doc]
    }

    pub fn nnz(&self) -> usize {
        self.by_word.iter().map(Vec::len).sum()
    }

    /// Sum of stored counts; equals `total_tokens` before any restriction.
    pub fn stored_tokens(&self) -> u64 {
        self.by_doc
            .iter()
            .flatten()
            .map(|&(_, n)| u64::from(n))
            .sum()
    }

    pub fn frequencies(&self) -> FrequencyView<'_> {
        FrequencyView { matrix: self }
    }

    /// Keep the m most frequent words (ties broken by lower index), preserving
    /// the original relative order of the kept rows. m = N is the identity.
    pub fn restrict_top(&self, m: usize) -> Result<(TermDocMatrix, RestrictionMap)> {
        let n = self.num_words();
        if m == 0 || m > n {
            return Err(Error::InvalidArgument(format!(
                "restriction size m={m} must satisfy 1 <= m <= {n}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.word_totals[b]
                .cmp(&self.word_totals[a])
                .then(a.cmp(&b))
        });
        let mut kept: Vec<usize> = order[..m].to_vec();
        kept.sort_unstable();

        let mut old_to_new = vec![None; n];
        for (new, &old) in kept.iter().enumerate() {
            old_to_new[old] = Some(new as u32);
        }

        let words = kept.iter().map(|&w| self.words[w].clone()).collect();
        let word_totals = kept.iter().map(|&w| self.word_totals[w]).collect();
        let by_word: Vec<Vec<(u32, u32)>> =
            kept.iter().map(|&w| self.by_word[w].clone()).collect();
        let by_doc: Vec<Vec<(u32, u32)>> = self
            .by_doc
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .filter_map(|&(w, c)| old_to_new[w as usize].map(|nw| (nw, c)))
                    .collect()
            })
            .collect();

        let restricted = TermDocMatrix {
            words,
            doc_ids: self.doc_ids.clone(),
            doc_lengths: self.doc_lengths.clone(),
            by_word,
            by_doc,
            word_totals,
        };
        Ok((restricted, RestrictionMap { kept, old_to_new }))
    }

    /// Write the matrix as a three-file artifact directory: vocab.csv
    /// (index,word), docs.csv (index,id,length), counts.csv
    /// (word_index,doc_index,count).
    pub fn write_artifact(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_owned(),
            source,
        })?;

        let vocab_path = dir.join(VOCAB_FILE);
        let mut w = csv_writer(&vocab_path)?;
        for (i, word) in self.words.iter().enumerate() {
            w.serialize(VocabRow {
                index: i as u64,
                word: word.clone(),
            })
            .map_err(|source| csv_err(&vocab_path, source))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: vocab_path.clone(),
            source,
        })?;

        let docs_path = dir.join(DOCS_FILE);
        let mut w = csv_writer(&docs_path)?;
        for (i, (id, len)) in self.doc_ids.iter().zip(&self.doc_lengths).enumerate() {
            w.serialize(DocRow {
                index: i as u64,
                id: id.clone(),
                length: *len,
            })
            .map_err(|source| csv_err(&docs_path, source))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: docs_path.clone(),
            source,
        })?;

        let counts_path = dir.join(COUNTS_FILE);
        let mut w = csv_writer(&counts_path)?;
        for (word, cells) in self.by_word.iter().enumerate() {
            for &(doc, count) in cells {
                w.serialize(CountRow {
                    word_index: word as u64,
                    doc_index: u64::from(doc),
                    count: u64::from(count),
                })
                .map_err(|source| csv_err(&counts_path, source))?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: counts_path.clone(),
            source,
        })
    }

    /// Read an artifact directory back, re-validating the invariants: indices
    /// in range, counts positive, and per-document count sums equal to the
    /// recorded lengths.
    pub fn read_artifact(dir: &Path) -> Result<TermDocMatrix> {
        let vocab_path = dir.join(VOCAB_FILE);
        let mut words = Vec::new();
        for (i, row) in csv_reader(&vocab_path)?.deserialize().enumerate() {
            let row: VocabRow = row.map_err(|source| csv_err(&vocab_path, source))?;
            if row.index != i as u64 {
                return Err(parse_err(&vocab_path, format!("index {} out of order", row.index)));
            }
            words.push(row.word);
        }

        let docs_path = dir.join(DOCS_FILE);
        let mut doc_ids = Vec::new();
        let mut doc_lengths = Vec::new();
        for (i, row) in csv_reader(&docs_path)?.deserialize().enumerate() {
            let row: DocRow = row.map_err(|source| csv_err(&docs_path, source))?;
            if row.index != i as u64 {
                return Err(parse_err(&docs_path, format!("index {} out of order", row.index)));
            }
            doc_ids.push(row.id);
            doc_lengths.push(row.length);
        }

        let counts_path = dir.join(COUNTS_FILE);
        let mut by_doc: Vec<Vec<(u32, u32)>> = vec![Vec::new(); doc_ids.len()];
        for row in csv_reader(&counts_path)?.deserialize() {
            let row: CountRow = row.map_err(|source| csv_err(&counts_path, source))?;
            let w = usize::try_from(row.word_index).unwrap_or(usize::MAX);
            let b = usize::try_from(row.doc_index).unwrap_or(usize::MAX);
            if w >= words.len() || b >= doc_ids.len() {
                return Err(parse_err(
                    &counts_path,
                    format!("cell ({}, {}) out of range", row.word_index, row.doc_index),
                ));
            }
            if row.count == 0 || row.count > u64::from(u32::MAX) {
                return Err(parse_err(
                    &counts_path,
                    format!("count {} at ({w}, {b}) out of range", row.count),
                ));
            }
            by_doc[b].push((w as u32, row.count as u32));
        }

        for (b, cells) in by_doc.iter_mut().enumerate() {
            cells.sort_unstable();
            if cells.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(parse_err(&counts_path, format!("duplicate cell in document {b}")));
            }
            let sum: u64 = cells.iter().map(|&(_, n)| u64::from(n)).sum();
            if sum != doc_lengths[b] {
                return Err(parse_err(
                    &counts_path,
                    format!(
                        "document {b} counts sum to {sum} but its recorded length is {}",
                        doc_lengths[b]
                    ),
                ));
            }
        }

        Ok(assemble(words, doc_ids, doc_lengths, by_doc))
    }
}

/// Count word occurrences per document.
pub fn count_matrix(corpus: &Corpus) -> TermDocMatrix {
    let by_doc: Vec<Vec<(u32, u32)>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let mut counts: HashMap<u32, u32> = HashMap::new();
            for &t in &doc.tokens {
                *counts.entry(t).or_insert(0) += 1;
            }
            let mut cells: Vec<(u32, u32)> = counts.into_iter().collect();
            cells.sort_unstable();
            cells
        })
        .collect();

    let words = corpus.vocabulary.words().to_vec();
    let doc_ids = corpus.documents.iter().map(|d| d.id.clone()).collect();
    let doc_lengths = corpus.documents.iter().map(|d| d.len() as u64).collect();
    assemble(words, doc_ids, doc_lengths, by_doc)
}

fn assemble(
    words: Vec<String>,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u64>,
    by_doc: Vec<Vec<(u32, u32)>>,
) -> TermDocMatrix {
    let mut by_word: Vec<Vec<(u32, u32)>> = vec![Vec::new(); words.len()];
    let mut word_totals = vec![0u64; words.len()];
    for (b, cells) in by_doc.iter().enumerate() {
        for &(w, n) in cells {
            by_word[w as usize].push((b as u32, n));
            word_totals[w as usize] += u64::from(n);
        }
    }
    TermDocMatrix {
        words,
        doc_ids,
        doc_lengths,
        by_word,
        by_doc,
        word_totals,
    }
}

/// Lazy frequency view x_{b,w} = n_{b,w} / T_b over a count matrix.
///
/// Documents with T_b = 0 contribute no cells; their column is zero.
#[derive(Debug, Clone, Copy)]
pub struct FrequencyView<'a> {
    matrix: &'a TermDocMatrix,
}

impl<'a> FrequencyView<'a> {
    pub fn matrix(&self) -> &'a TermDocMatrix {
        self.matrix
    }

    pub fn num_words(&self) -> usize {
        self.matrix.num_words()
    }

    pub fn num_docs(&self) -> usize {
        self.matrix.num_docs()
    }

    /// Nonzero (doc, frequency) cells of a word row.
    pub fn row(&self, word: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        let lengths = &self.matrix.doc_lengths;
        self.matrix.by_word[word]
            .iter()
            .map(move |&(b, n)| (b as usize, f64::from(n) / lengths[b as usize] as f64))
    }

    /// Nonzero (word, frequency) cells of a document column.
    pub fn col(&self, doc: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        let t = self.matrix.doc_lengths[doc] as f64;
        self.matrix.by_doc[doc]
            .iter()
            .map(move |&(w, n)| (w as usize, f64::from(n) / t))
    }

    pub fn column_sum(&self, doc: usize) -> f64 {
        self.col(doc).map(|(_, x)| x).sum()
    }

    /// Documents with at least one token.
    pub fn num_active_docs(&self) -> usize {
        self.matrix.doc_lengths.iter().filter(|&&t| t > 0).count()
    }

    pub fn empty_docs(&self) -> Vec<usize> {
        self.matrix
            .doc_lengths
            .iter()
            .enumerate()
            .filter_map(|(b, &t)| (t == 0).then_some(b))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct VocabRow {
    index: u64,
    word: String,
}

#[derive(Serialize, Deserialize)]
struct DocRow {
    index: u64,
    id: String,
    length: u64,
}

#[derive(Serialize, Deserialize)]
struct CountRow {
    word_index: u64,
    doc_index: u64,
    count: u64,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(csv::Reader::from_reader(file))
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_owned(),
        source,
    }
}

fn parse_err(path: &Path, detail: String) -> Error {
    Error::ParseArtifact {
        path: path.to_owned(),
        detail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_corpus;

    #[test]
    fn counts_match_hand_tally() {
        let c = build_corpus(&[("d1", "a b a"), ("d2", "b b c")]).unwrap();
        let m = count_matrix(&c);
        assert_eq!(m.num_words(), 3);
        assert_eq!(m.num_docs(), 2);
        assert_eq!(m.doc_lengths(), [3, 3]);
        assert_eq!(m.row(0), [(0, 2)]);
        assert_eq!(m.row(1), [(0, 1), (1, 2)]);
        assert_eq!(m.row(2), [(1, 1)]);
        assert_eq!(m.word_totals(), [2, 3, 1]);
        assert_eq!(m.col(1), [(1, 2), (2, 1)]);
    }

    #[test]
    fn empty_corpus_gives_zero_by_zero() {
        let c = build_corpus::<&str, &str>(&[]).unwrap();
        let m = count_matrix(&c);
        assert_eq!(m.num_words(), 0);
        assert_eq!(m.num_docs(), 0);
        assert_eq!(m.nnz(), 0);
    }

    #[test]
    fn empty_document_keeps_zero_column() {
        let c = build_corpus(&[("d1", "a"), ("d2", ""), ("d3", "a b")]).unwrap();
        let m = count_matrix(&c);
        assert_eq!(m.num_docs(), 3);
        assert_eq!(m.doc_lengths(), [1, 0, 2]);
        assert!(m.col(1).is_empty());
        let f = m.frequencies();
        assert_eq!(f.num_active_docs(), 2);
        assert_eq!(f.empty_docs(), [1]);
    }

    #[test]
    fn frequency_columns_sum_to_one() {
        let c = build_corpus(&[("d1", "a b a c"), ("d2", "c c")]).unwrap();
        let m = count_matrix(&c);
        let f = m.frequencies();
        for b in 0..m.num_docs() {
            assert!((f.column_sum(b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn restrict_identity_when_m_equals_n() {
        let c = build_corpus(&[("d1", "a b a c"), ("d2", "c b")]).unwrap();
        let m = count_matrix(&c);
        let (r, map) = m.restrict_top(m.num_words()).unwrap();
        assert_eq!(r, m);
        assert_eq!(map.kept, [0, 1, 2]);
    }

    #[test]
    fn restrict_keeps_dominant_word_and_denominators() {
        let c = build_corpus(&[("d1", "a a a b"), ("d2", "a c")]).unwrap();
        let m = count_matrix(&c);
        let (r, map) = m.restrict_top(1).unwrap();
        assert_eq!(r.words(), ["a"]);
        assert_eq!(map.kept, [0]);
        assert_eq!(r.doc_lengths(), m.doc_lengths());
        // frequencies keep the original T_b denominator
        let f = r.frequencies();
        let row: Vec<(usize, f64)> = f.row(0).collect();
        assert_eq!(row, [(0, 0.75), (1, 0.5)]);
    }

    #[test]
    fn restrict_tie_break_prefers_lower_index() {
        let c = build_corpus(&[("d1", "b a b a")]).unwrap();
        // both words have total 2; "b" has index 0
        let m = count_matrix(&c);
        let (r, _) = m.restrict_top(1).unwrap();
        assert_eq!(r.words(), ["b"]);
    }

    #[test]
    fn restrict_preserves_original_word_order() {
        let c = build_corpus(&[("d1", "a b c c b c")]).unwrap();
        let m = count_matrix(&c);
        let (r, map) = m.restrict_top(2).unwrap();
        assert_eq!(r.words(), ["b", "c"]);
        assert_eq!(map.kept, [1, 2]);
        assert_eq!(map.old_to_new, [None, Some(0), Some(1)]);
    }

    #[test]
    fn restrict_rejects_degenerate_sizes() {
        let c = build_corpus(&[("d1", "a b")]).unwrap();
        let m = count_matrix(&c);
        assert!(m.restrict_top(0).is_err());
        assert!(m.restrict_top(3).is_err());
    }

    #[test]
    fn artifact_round_trip() {
        let c = build_corpus(&[("d1", "a b a"), ("d2", ""), ("d3", "c b")]).unwrap();
        let m = count_matrix(&c);
        let dir = tempfile::tempdir().unwrap();
        m.write_artifact(dir.path()).unwrap();
        let back = TermDocMatrix::read_artifact(dir.path()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn artifact_rejects_length_mismatch() {
        let c = build_corpus(&[("d1", "a b a")]).unwrap();
        let m = count_matrix(&c);
        let dir = tempfile::tempdir().unwrap();
        m.write_artifact(dir.path()).unwrap();
        // corrupt: claim length 5 while counts sum to 3
        let docs = dir.path().join(DOCS_FILE);
        fs::write(&docs, "index,id,length\n0,d1,5\n").unwrap();
        assert!(TermDocMatrix::read_artifact(dir.path()).is_err());
    }
}
