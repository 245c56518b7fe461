//! Positional inverted index over title, meta description and body text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::term::Term;

pub type DocId = u32;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("document {0} is already indexed")]
    DuplicateDocument(DocId),
    #[error("document source must not be empty (doc {0})")]
    EmptySource(DocId),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub doc_id: DocId,
    /// URL or file path the document came from.
    pub source: String,
    pub title: String,
    pub meta_description: String,
    pub body: String,
    pub outlinks: Vec<String>,
}

impl Document {
    /// Title, description and body as one stream; positions run across fields.
    pub fn indexed_text(&self) -> String {
        format!("{}\n{}\n{}", self.title, self.meta_description, self.body)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Posting {
    pub doc_id: DocId,
    pub term_freq: u32,
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocMeta {
    pub source: String,
    pub title: String,
    pub length: u32,
}

/// Lowercased alphanumeric runs with their 0-based ordinal positions.
pub fn tokenize(text: &str) -> Vec<(String, u32)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<(String, u32)>| {
        if !cur.is_empty() {
            let pos = out.len() as u32;
            out.push((std::mem::take(cur), pos));
        }
    };
    for c in text.chars() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else {
            flush(&mut cur, &mut out);
        }
    }
    flush(&mut cur, &mut out);
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    docs: BTreeMap<DocId, DocMeta>,
    total_length: u64,
}

impl InvertedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn build<'a>(docs: impl IntoIterator<Item = &'a Document>) -> Result<Self, IndexError> {
        let mut index = Self::new();
        for d in docs {
            index.index_document(d)?;
        }
        Ok(index)
    }

    pub fn index_document(&mut self, doc: &Document) -> Result<(), IndexError> {
        if self.docs.contains_key(&doc.doc_id) {
            return Err(IndexError::DuplicateDocument(doc.doc_id));
        }
        if doc.source.is_empty() {
            return Err(IndexError::EmptySource(doc.doc_id));
        }
        let tokens = tokenize(&doc.indexed_text());
        let mut local: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (tok, pos) in &tokens {
            local.entry(tok.clone()).or_default().push(*pos);
        }
        for (tok, positions) in local {
            let list = self.postings.entry(tok).or_default();
            let posting = Posting {
                doc_id: doc.doc_id,
                term_freq: positions.len() as u32,
                positions,
            };
            // ids usually arrive ascending, so this is normally a push
            let at = list.partition_point(|p| p.doc_id < doc.doc_id);
            list.insert(at, posting);
        }
        let length = tokens.len() as u32;
        self.total_length += u64::from(length);
        self.docs.insert(
            doc.doc_id,
            DocMeta {
                source: doc.source.clone(),
                title: doc.title.clone(),
                length,
            },
        );
        Ok(())
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        if self.docs.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.docs.len() as f64
        }
    }

    pub fn doc(&self, id: DocId) -> Option<&DocMeta> {
        self.docs.get(&id)
    }

    pub fn doc_length(&self, id: DocId) -> Option<u32> {
        self.docs.get(&id).map(|d| d.length)
    }

    pub fn docs(&self) -> impl Iterator<Item = (DocId, &DocMeta)> {
        self.docs.iter().map(|(id, m)| (*id, m))
    }

    pub fn doc_by_source(&self, source: &str) -> Option<DocId> {
        self.docs
            .iter()
            .find(|(_, m)| m.source == source)
            .map(|(id, _)| *id)
    }

    pub fn postings(&self, word: &str) -> &[Posting] {
        self.postings.get(word).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    /// Documents containing `words` at consecutive positions. `term_freq` counts
    /// occurrences and `positions` holds their start offsets.
    pub fn phrase_postings<S: AsRef<str>>(&self, words: &[S]) -> Vec<Posting> {
        let Some((first, rest)) = words.split_first() else {
            return Vec::new();
        };
        let mut acc: Vec<Posting> = self.postings(first.as_ref()).to_vec();
        for (offset, word) in rest.iter().enumerate() {
            let offset = offset as u32 + 1;
            let next = self.postings(word.as_ref());
            let mut merged = Vec::with_capacity(acc.len().min(next.len()));
            let (mut i, mut j) = (0, 0);
            while i < acc.len() && j < next.len() {
                let (a, b) = (&acc[i], &next[j]);
                match a.doc_id.cmp(&b.doc_id) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let starts: Vec<u32> = a
                            .positions
                            .iter()
                            .copied()
                            .filter(|s| b.positions.binary_search(&(s + offset)).is_ok())
                            .collect();
                        if !starts.is_empty() {
                            merged.push(Posting {
                                doc_id: a.doc_id,
                                term_freq: starts.len() as u32,
                                positions: starts,
                            });
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
            acc = merged;
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    pub fn term_postings(&self, term: &Term) -> Vec<Posting> {
        self.phrase_postings(&term.words())
    }

    pub fn doc_freq(&self, term: &Term) -> usize {
        self.term_postings(term).len()
    }

    /// Smoothed inverse document frequency, `ln(1 + (N - df + 0.5) / (df + 0.5))`.
    pub fn idf(&self, term: &Term) -> f64 {
        idf_from(self.doc_count(), self.doc_freq(term))
    }

    /// Line-oriented text form. First line: doc count and `id:length` pairs;
    /// then one `#doc` line per document; then one line per term.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let lengths: Vec<String> = self
            .docs
            .iter()
            .map(|(id, m)| format!("{id}:{}", m.length))
            .collect();
        let _ = writeln!(
            out,
            "#synseek-index\tdoc_count={}\tdoc_lengths={}",
            self.docs.len(),
            lengths.join(",")
        );
        for (id, m) in &self.docs {
            let _ = writeln!(out, "#doc\t{id}\t{}\t{}", clean(&m.source), clean(&m.title));
        }
        for (term, list) in &self.postings {
            out.push_str(term);
            for p in list {
                let pos: Vec<String> = p.positions.iter().map(u32::to_string).collect();
                let _ = write!(out, "\t{}:{}:{}", p.doc_id, p.term_freq, pos.join(","));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self, IndexError> {
        let err = |line: usize, message: &str| IndexError::Parse {
            path: path.to_owned(),
            line,
            message: message.to_owned(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 3 || fields[0] != "#synseek-index" {
            return Err(err(1, "bad header"));
        }
        let doc_count: usize = fields[1]
            .strip_prefix("doc_count=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| err(1, "bad doc_count"))?;
        let lengths_field = fields[2]
            .strip_prefix("doc_lengths=")
            .ok_or_else(|| err(1, "bad doc_lengths"))?;
        let mut lengths = BTreeMap::new();
        for pair in lengths_field.split(',').filter(|s| !s.is_empty()) {
            let (id, len) = pair.split_once(':').ok_or_else(|| err(1, "bad doc_lengths"))?;
            let id: DocId = id.parse().map_err(|_| err(1, "bad doc id"))?;
            let len: u32 = len.parse().map_err(|_| err(1, "bad length"))?;
            lengths.insert(id, len);
        }
        if lengths.len() != doc_count {
            return Err(err(1, "doc_count disagrees with doc_lengths"));
        }

        let mut index = Self::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if let Some(rest) = line.strip_prefix("#doc\t") {
                let mut parts = rest.splitn(3, '\t');
                let id: DocId = parts
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| err(lineno, "bad doc id"))?;
                let source = parts.next().ok_or_else(|| err(lineno, "missing source"))?;
                let title = parts.next().unwrap_or("");
                let length = *lengths
                    .get(&id)
                    .ok_or_else(|| err(lineno, "doc missing from header"))?;
                index.total_length += u64::from(length);
                index.docs.insert(
                    id,
                    DocMeta {
                        source: source.to_owned(),
                        title: title.to_owned(),
                        length,
                    },
                );
                continue;
            }
            let mut parts = line.split('\t');
            let term = parts.next().filter(|t| !t.is_empty());
            let term = term.ok_or_else(|| err(lineno, "empty term"))?;
            let mut list = Vec::new();
            for rec in parts {
                let mut f = rec.splitn(3, ':');
                let (Some(id), Some(tf), Some(pos)) = (f.next(), f.next(), f.next()) else {
                    return Err(err(lineno, "bad posting"));
                };
                let doc_id: DocId = id.parse().map_err(|_| err(lineno, "bad posting doc id"))?;
                let term_freq: u32 = tf.parse().map_err(|_| err(lineno, "bad term freq"))?;
                let positions = pos
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<Vec<u32>, _>>()
                    .map_err(|_| err(lineno, "bad positions"))?;
                if positions.len() != term_freq as usize {
                    return Err(err(lineno, "term freq disagrees with positions"));
                }
                list.push(Posting {
                    doc_id,
                    term_freq,
                    positions,
                });
            }
            if list.is_empty() {
                return Err(err(lineno, "term without postings"));
            }
            index.postings.insert(term.to_owned(), list);
        }
        if index.docs.len() != doc_count {
            return Err(err(1, "doc_count disagrees with #doc lines"));
        }
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        fs::write(path, self.to_text()).map_err(|source| IndexError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        let text = fs::read_to_string(path).map_err(|source| IndexError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_text(&text, path)
    }
}

pub fn idf_from(doc_count: usize, doc_freq: usize) -> f64 {
    let n = doc_count as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

fn clean(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
