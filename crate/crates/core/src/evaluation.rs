//! Keyword-only versus synonym-expanded retrieval, measured against binary
//! relevance judgments.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::query_engine::{QueryError, RankParams, SearchEngine};
use crate::synonym_table::SynonymTable;
use crate::text_index::InvertedIndex;

pub const DEFAULT_K: [usize; 2] = [5, 10];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("judgment for {query:?} names unknown document {source_name:?}")]
    BrokenJudgment { query: String, source_name: String },
    #[error("recall is undefined with no relevant documents")]
    UndefinedRecall,
    #[error("k must be at least 1")]
    BadK,
    #[error("query {query:?}: {source}")]
    Query {
        query: String,
        #[source]
        source: QueryError,
    },
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

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub query: String,
    pub relevant: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JudgmentSet {
    pub entries: Vec<Judgment>,
}

impl JudgmentSet {
    /// `query<TAB>source1,source2,...` per line; blank and `#` lines ignored.
    pub fn parse(text: &str, path: &Path) -> Result<Self, EvalError> {
        let mut entries = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| EvalError::Parse {
                path: path.to_owned(),
                line: idx + 1,
                message: message.to_owned(),
            };
            let (query, sources) = line
                .split_once('\t')
                .ok_or_else(|| err("expected query<TAB>sources"))?;
            let relevant: BTreeSet<String> = sources
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            if query.trim().is_empty() {
                return Err(err("empty query"));
            }
            if relevant.is_empty() {
                return Err(err("no relevant sources"));
            }
            entries.push(Judgment {
                query: query.trim().to_owned(),
                relevant,
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

fn top_hits<S: AsRef<str>>(ranked: &[S], relevant: &BTreeSet<String>, k: usize) -> usize {
    ranked
        .iter()
        .take(k)
        .filter(|s| relevant.contains(s.as_ref()))
        .count()
}

/// Relevant share of the top `k`, over `min(k, |ranked|)` slots; 0 for no results.
pub fn precision_at_k<S: AsRef<str>>(
    ranked: &[S],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::BadK);
    }
    let slots = k.min(ranked.len());
    if slots == 0 {
        return Ok(0.0);
    }
    Ok(top_hits(ranked, relevant, k) as f64 / slots as f64)
}

pub fn recall_at_k<S: AsRef<str>>(
    ranked: &[S],
    relevant: &BTreeSet<String>,
    k: usize,
) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::BadK);
    }
    if relevant.is_empty() {
        return Err(EvalError::UndefinedRecall);
    }
    Ok(top_hits(ranked, relevant, k) as f64 / relevant.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    KeywordOnly,
    Expanded,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::KeywordOnly => "keyword-only",
            Mode::Expanded => "expanded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtK {
    pub k: usize,
    pub hits: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub query: String,
    pub mode: Mode,
    pub total_hits: usize,
    pub relevant: usize,
    pub metrics: Vec<AtK>,
    /// Relevant documents absent from the top max(k) results.
    pub missed: Vec<String>,
}

impl EvalRow {
    pub fn at(&self, k: usize) -> Option<&AtK> {
        self.metrics.iter().find(|m| m.k == k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanAtK {
    pub mode: Mode,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub k_list: Vec<usize>,
    /// Two rows per query, keyword-only first.
    pub rows: Vec<EvalRow>,
    pub means: Vec<MeanAtK>,
}

impl EvalReport {
    pub fn row(&self, query: &str, mode: Mode) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.query == query && r.mode == mode)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<28} {:<13} {:>5} {:>4}", "query", "mode", "hits", "rel");
        for k in &self.k_list {
            let _ = write!(out, " {:>7} {:>7}", format!("P@{k}"), format!("R@{k}"));
        }
        out.push_str("  missed\n");
        for r in &self.rows {
            let _ = write!(
                out,
                "{:<28} {:<13} {:>5} {:>4}",
                r.query,
                r.mode.label(),
                r.total_hits,
                r.relevant
            );
            for m in &r.metrics {
                let _ = write!(out, " {:>7.4} {:>7.4}", m.precision, m.recall);
            }
            let _ = writeln!(out, "  {}", r.missed.join(","));
        }
        out.push('\n');
        for m in &self.means {
            let _ = writeln!(
                out,
                "mean {:<13} P@{:<3} {:.4}  R@{:<3} {:.4}",
                m.mode.label(),
                m.k,
                m.precision,
                m.k,
                m.recall
            );
        }
        out
    }

    /// One JSON object per row, then one per mean.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r).expect("plain data serializes"));
            out.push('\n');
        }
        for m in &self.means {
            out.push_str(&serde_json::to_string(m).expect("plain data serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn evaluate(
    index: &InvertedIndex,
    table: &SynonymTable,
    judgments: &JudgmentSet,
    params: &RankParams,
    k_list: &[usize],
) -> Result<EvalReport, EvalError> {
    let engine = SearchEngine::new(index, table).with_params(*params);
    evaluate_engine(&engine, judgments, k_list)
}

/// Runs every judged query twice, with expansion disabled and with the
/// engine's expansion options, and scores both rankings.
pub fn evaluate_engine(
    engine: &SearchEngine<'_>,
    judgments: &JudgmentSet,
    k_list: &[usize],
) -> Result<EvalReport, EvalError> {
    if k_list.contains(&0) {
        return Err(EvalError::BadK);
    }
    let known: HashSet<&str> = engine.index.docs().map(|(_, m)| m.source.as_str()).collect();
    for j in &judgments.entries {
        if let Some(missing) = j.relevant.iter().find(|s| !known.contains(s.as_str())) {
            return Err(EvalError::BrokenJudgment {
                query: j.query.clone(),
                source_name: missing.clone(),
            });
        }
    }

    let k_max = k_list.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::with_capacity(judgments.entries.len() * 2);
    for j in &judgments.entries {
        for mode in [Mode::KeywordOnly, Mode::Expanded] {
            let ranked = engine
                .rank(&j.query, mode == Mode::Expanded)
                .map_err(|source| EvalError::Query {
                    query: j.query.clone(),
                    source,
                })?;
            let sources: Vec<&str> = ranked
                .iter()
                .filter_map(|d| engine.index.doc(d.doc_id).map(|m| m.source.as_str()))
                .collect();
            let metrics = k_list
                .iter()
                .map(|&k| {
                    Ok(AtK {
                        k,
                        hits: top_hits(&sources, &j.relevant, k),
                        precision: precision_at_k(&sources, &j.relevant, k)?,
                        recall: recall_at_k(&sources, &j.relevant, k)?,
                    })
                })
                .collect::<Result<Vec<_>, EvalError>>()?;
            let top: HashSet<&str> = sources.iter().take(k_max).copied().collect();
            rows.push(EvalRow {
                query: j.query.clone(),
                mode,
                total_hits: ranked.len(),
                relevant: j.relevant.len(),
                metrics,
                missed: j
                    .relevant
                    .iter()
                    .filter(|s| !top.contains(s.as_str()))
                    .cloned()
                    .collect(),
            });
        }
    }

    let mut means = Vec::new();
    for mode in [Mode::KeywordOnly, Mode::Expanded] {
        let mode_rows: Vec<&EvalRow> = rows.iter().filter(|r| r.mode == mode).collect();
        if mode_rows.is_empty() {
            continue;
        }
        let n = mode_rows.len() as f64;
        for &k in k_list {
            let (p, r) = mode_rows
                .iter()
                .filter_map(|row| row.at(k))
                .fold((0.0, 0.0), |(p, r), m| (p + m.precision, r + m.recall));
            means.push(MeanAtK {
                mode,
                k,
                precision: p / n,
                recall: r / n,
            });
        }
    }

    Ok(EvalReport {
        k_list: k_list.to_vec(),
        rows,
        means,
    })
}
