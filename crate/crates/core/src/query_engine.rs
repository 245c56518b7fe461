//! Query pipeline: parse the raw query into terms, attach synonyms from the
//! table, score every matching document, and cut the ranking into pages.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::link_rank::{LinkGraph, RankVector};
use crate::synonym_table::{expand_terms, ExpansionOptions, Origin, SynonymTable};
use crate::term::Term;
use crate::text_index::{idf_from, tokenize, DocId, InvertedIndex};

pub const DEFAULT_PAGE_SIZE: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("query has no searchable words")]
    EmptyQuery,
    #[error("page numbers start at 1")]
    BadPage,
    #[error("page size must be at least 1")]
    BadPageSize,
    #[error("invalid ranking parameter: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub raw: String,
    pub terms: Vec<Term>,
}

/// Multi-word keywords and synonyms of a table, keyed by their token words.
#[derive(Debug, Clone, Default)]
pub struct PhraseVocabulary {
    phrases: HashMap<Vec<String>, Term>,
    longest: usize,
}

impl PhraseVocabulary {
    pub fn from_table(table: &SynonymTable) -> Self {
        let mut vocab = Self::default();
        let mut terms: Vec<Term> = table.vocabulary().into_iter().collect();
        terms.sort();
        for term in terms {
            let words = term.words();
            if words.len() < 2 {
                continue;
            }
            vocab.longest = vocab.longest.max(words.len());
            vocab.phrases.entry(words).or_insert(term);
        }
        vocab
    }
}

pub fn parse_query(raw: &str, table: &SynonymTable) -> Result<Query, QueryError> {
    parse_query_with(raw, &PhraseVocabulary::from_table(table))
}

/// Tokenizes `raw`, then joins the longest run of words that spells a known
/// multi-word term, scanning left to right. Repeated terms are kept once.
pub fn parse_query_with(raw: &str, vocab: &PhraseVocabulary) -> Result<Query, QueryError> {
    let words: Vec<String> = tokenize(raw).into_iter().map(|(w, _)| w).collect();
    if words.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    let mut terms = Vec::new();
    let mut seen = HashSet::new();
    let mut i = 0;
    while i < words.len() {
        let max = vocab.longest.min(words.len() - i);
        let phrase = (2..=max)
            .rev()
            .find_map(|n| vocab.phrases.get(&words[i..i + n]).map(|t| (t.clone(), n)));
        let (term, used) = match phrase {
            Some(hit) => hit,
            None => (Term::new(&words[i]).expect("tokens are non-empty"), 1),
        };
        if seen.insert(term.clone()) {
            terms.push(term);
        }
        i += used;
    }
    Ok(Query {
        raw: raw.to_owned(),
        terms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupMember {
    pub term: Term,
    pub weight: f64,
    pub origin: Origin,
}

/// One original query term and the synonyms that may stand in for it.
#[derive(Debug, Clone, PartialEq)]
pub struct TermGroup {
    pub original: Term,
    /// The original first (weight 1.0), then synonyms in expansion order.
    pub members: Vec<GroupMember>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedQuery {
    pub groups: Vec<TermGroup>,
    pub options: ExpansionOptions,
}

pub fn expand_query(
    query: &Query,
    table: &SynonymTable,
    opts: &ExpansionOptions,
    synonym_weight: f64,
) -> ExpandedQuery {
    let mut groups: Vec<TermGroup> = query
        .terms
        .iter()
        .map(|t| TermGroup {
            original: t.clone(),
            members: vec![GroupMember {
                term: t.clone(),
                weight: 1.0,
                origin: Origin::Original,
            }],
        })
        .collect();
    let slot: HashMap<Term, usize> = query
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    for (term, origin) in expand_terms(table, &query.terms, opts) {
        let Origin::SynonymOf(root) = &origin else {
            continue;
        };
        let group = &mut groups[slot[root]];
        if group.members.iter().all(|m| m.term != term) {
            group.members.push(GroupMember {
                term,
                weight: synonym_weight,
                origin,
            });
        }
    }
    ExpandedQuery {
        groups,
        options: *opts,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankParams {
    pub k1: f64,
    pub b: f64,
    /// Weight applied to matches on a synonym rather than the original term.
    pub synonym_weight: f64,
    /// Share of the final score taken by link popularity.
    pub popularity_blend: f64,
}

impl Default for RankParams {
    fn default() -> Self {
        Self {
            k1: 1.2,
            b: 0.75,
            synonym_weight: 0.7,
            popularity_blend: 0.2,
        }
    }
}

impl RankParams {
    pub fn validate(&self) -> Result<(), QueryError> {
        let bad = |m: &str| Err(QueryError::BadParams(m.to_owned()));
        if self.k1.is_nan() || self.k1 <= 0.0 {
            return bad("k1 must be positive");
        }
        if !(0.0..=1.0).contains(&self.b) {
            return bad("b must lie in [0, 1]");
        }
        if !(f64::MIN_POSITIVE..=1.0).contains(&self.synonym_weight) {
            return bad("synonym_weight must lie in (0, 1]");
        }
        if !(0.0..1.0).contains(&self.popularity_blend) {
            return bad("popularity_blend must lie in [0, 1)");
        }
        Ok(())
    }
}

/// Link popularity per document; documents without an entry score 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Popularity(BTreeMap<DocId, f64>);

impl Popularity {
    pub fn new(scores: BTreeMap<DocId, f64>) -> Self {
        Self(scores)
    }

    /// Matches rank entries to documents by URL.
    pub fn from_url_scores(index: &InvertedIndex, scores: &HashMap<String, f64>) -> Self {
        Self(
            index
                .docs()
                .filter_map(|(id, m)| scores.get(&m.source).map(|s| (id, *s)))
                .collect(),
        )
    }

    pub fn from_rank_vector(index: &InvertedIndex, graph: &LinkGraph, ranks: &RankVector) -> Self {
        let by_url: HashMap<String, f64> = graph
            .nodes()
            .iter()
            .cloned()
            .zip(ranks.scores.iter().copied())
            .collect();
        Self::from_url_scores(index, &by_url)
    }

    pub fn get(&self, doc: DocId) -> f64 {
        self.0.get(&doc).copied().unwrap_or(0.0)
    }

    /// Multiplies every score by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|(d, s)| (*d, s * factor)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedTerm {
    /// Original query term of the group this match belongs to.
    pub group: String,
    pub term: String,
    pub synonym: bool,
    pub term_freq: u32,
    /// Weighted BM25 of this member in the document.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc_id: DocId,
    pub final_score: f64,
    pub relevancy_score: f64,
    pub popularity_score: f64,
    /// Every member that matched, in group then member order.
    pub matched_terms: Vec<MatchedTerm>,
}

pub fn bm25(idf: f64, tf: f64, doc_len: f64, avg_len: f64, params: &RankParams) -> f64 {
    let norm = 1.0 - params.b + params.b * doc_len / avg_len;
    idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
}

/// Scores every document that matches at least one member of one group.
///
/// A group contributes the best weighted BM25 among its members, so a document
/// holding both a keyword and its synonym is not counted twice. With
/// popularity, relevancy and popularity are each divided by their maximum over
/// the candidates and blended.
pub fn score_documents(
    index: &InvertedIndex,
    query: &ExpandedQuery,
    popularity: Option<&Popularity>,
    params: &RankParams,
) -> Vec<ScoredDoc> {
    let n = index.doc_count();
    let avg_len = index.avg_doc_length();
    // doc -> per-group best contribution, plus matches
    let mut acc: BTreeMap<DocId, (Vec<f64>, Vec<MatchedTerm>)> = BTreeMap::new();
    let groups = query.groups.len();
    for (g, group) in query.groups.iter().enumerate() {
        for member in &group.members {
            let postings = index.term_postings(&member.term);
            if postings.is_empty() {
                continue;
            }
            let idf = idf_from(n, postings.len());
            for p in &postings {
                let len = f64::from(index.doc_length(p.doc_id).unwrap_or(0));
                let s = member.weight * bm25(idf, f64::from(p.term_freq), len, avg_len, params);
                let (best, matched) = acc
                    .entry(p.doc_id)
                    .or_insert_with(|| (vec![0.0; groups], Vec::new()));
                best[g] = best[g].max(s);
                matched.push(MatchedTerm {
                    group: group.original.to_string(),
                    term: member.term.to_string(),
                    synonym: member.origin != Origin::Original,
                    term_freq: p.term_freq,
                    score: s,
                });
            }
        }
    }

    let mut scored: Vec<ScoredDoc> = acc
        .into_iter()
        .map(|(doc_id, (best, mut matched))| {
            let g_of = |m: &MatchedTerm| query.groups.iter().position(|g| g.original.as_str() == m.group);
            matched.sort_by_key(|m| g_of(m));
            ScoredDoc {
                doc_id,
                relevancy_score: best.iter().sum(),
                popularity_score: popularity.map_or(0.0, |p| p.get(doc_id)),
                final_score: 0.0,
                matched_terms: matched,
            }
        })
        .collect();

    match popularity {
        Some(_) => {
            let alpha = params.popularity_blend;
            let r_max = scored.iter().map(|d| d.relevancy_score).fold(0.0, f64::max);
            let p_max = scored.iter().map(|d| d.popularity_score).fold(0.0, f64::max);
            for d in &mut scored {
                let rel = if r_max > 0.0 { d.relevancy_score / r_max } else { d.relevancy_score };
                let pop = if p_max > 0.0 { d.popularity_score / p_max } else { d.popularity_score };
                d.final_score = (1.0 - alpha) * rel + alpha * pop;
            }
        }
        None => {
            for d in &mut scored {
                d.final_score = d.relevancy_score;
            }
        }
    }
    sort_ranked(&mut scored);
    scored
}

/// Highest score first; equal scores by ascending doc id.
pub fn sort_ranked(docs: &mut [ScoredDoc]) {
    docs.sort_by(|a, b| {
        b.final_score
            .total_cmp(&a.final_score)
            .then(a.doc_id.cmp(&b.doc_id))
    });
}

#[derive(Debug, Clone, PartialEq)]
pub struct Serp {
    pub page_number: usize,
    pub page_size: usize,
    pub total_hits: usize,
    /// 1-based rank of the first result on this page.
    pub first_rank: usize,
    pub results: Vec<ScoredDoc>,
}

impl Serp {
    pub fn last_page(&self) -> usize {
        self.total_hits.div_ceil(self.page_size)
    }
}

pub fn paginate(scored: &[ScoredDoc], page: usize, page_size: usize) -> Result<Serp, QueryError> {
    if page == 0 {
        return Err(QueryError::BadPage);
    }
    if page_size == 0 {
        return Err(QueryError::BadPageSize);
    }
    let start = (page - 1).saturating_mul(page_size).min(scored.len());
    let end = start.saturating_add(page_size).min(scored.len());
    Ok(Serp {
        page_number: page,
        page_size,
        total_hits: scored.len(),
        first_rank: start + 1,
        results: scored[start..end].to_vec(),
    })
}

/// An index, a synonym table and optional popularity, ready to answer queries.
pub struct SearchEngine<'a> {
    pub index: &'a InvertedIndex,
    pub table: &'a SynonymTable,
    pub popularity: Option<&'a Popularity>,
    pub params: RankParams,
    pub expansion: ExpansionOptions,
    vocab: PhraseVocabulary,
}

impl<'a> SearchEngine<'a> {
    pub fn new(index: &'a InvertedIndex, table: &'a SynonymTable) -> Self {
        Self {
            index,
            table,
            popularity: None,
            params: RankParams::default(),
            expansion: ExpansionOptions::default(),
            vocab: PhraseVocabulary::from_table(table),
        }
    }

    pub fn with_popularity(mut self, popularity: Option<&'a Popularity>) -> Self {
        self.popularity = popularity;
        self
    }

    pub fn with_params(mut self, params: RankParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_expansion(mut self, expansion: ExpansionOptions) -> Self {
        self.expansion = expansion;
        self
    }

    pub fn expand(&self, raw: &str, expand: bool) -> Result<ExpandedQuery, QueryError> {
        let query = parse_query_with(raw, &self.vocab)?;
        let opts = if expand {
            self.expansion
        } else {
            ExpansionOptions::disabled()
        };
        Ok(expand_query(&query, self.table, &opts, self.params.synonym_weight))
    }

    /// Full ranking for `raw`; `expand = false` searches the literal terms only.
    pub fn rank(&self, raw: &str, expand: bool) -> Result<Vec<ScoredDoc>, QueryError> {
        self.params.validate()?;
        let eq = self.expand(raw, expand)?;
        Ok(score_documents(self.index, &eq, self.popularity, &self.params))
    }

    pub fn search(
        &self,
        raw: &str,
        expand: bool,
        page: usize,
        page_size: usize,
    ) -> Result<Serp, QueryError> {
        let ranked = self.rank(raw, expand)?;
        paginate(&ranked, page, page_size)
    }
}

#[derive(Debug, Serialize)]
struct SerpRecord<'a> {
    rank: usize,
    score: f64,
    relevancy: f64,
    popularity: f64,
    url: &'a str,
    title: &'a str,
    matched_terms: &'a [MatchedTerm],
}

/// One JSON object per result line.
pub fn render_jsonl(serp: &Serp, index: &InvertedIndex) -> String {
    let mut out = String::new();
    for (i, d) in serp.results.iter().enumerate() {
        let meta = index.doc(d.doc_id);
        let rec = SerpRecord {
            rank: serp.first_rank + i,
            score: d.final_score,
            relevancy: d.relevancy_score,
            popularity: d.popularity_score,
            url: meta.map_or("", |m| m.source.as_str()),
            title: meta.map_or("", |m| m.title.as_str()),
            matched_terms: &d.matched_terms,
        };
        out.push_str(&serde_json::to_string(&rec).expect("plain data serializes"));
        out.push('\n');
    }
    out
}

pub fn render_table(serp: &Serp, index: &InvertedIndex, explain: Option<&ExpandedQuery>) -> String {
    let mut out = String::new();
    if let Some(eq) = explain {
        for g in &eq.groups {
            let members: Vec<String> = g
                .members
                .iter()
                .map(|m| format!("{} ({:.2})", m.term, m.weight))
                .collect();
            let _ = writeln!(out, "group {:?}: {}", g.original.as_str(), members.join(", "));
        }
        out.push('\n');
    }
    if serp.results.is_empty() {
        if serp.total_hits == 0 {
            out.push_str("no results\n");
        } else {
            let _ = writeln!(
                out,
                "no results on this page ({} hits over {} pages)",
                serp.total_hits,
                serp.last_page()
            );
        }
        return out;
    }
    let _ = writeln!(
        out,
        "{} hits, page {} of {}",
        serp.total_hits,
        serp.page_number,
        serp.last_page()
    );
    let _ = writeln!(out, "{:>4}  {:>8}  {:>8}  {:>8}  url / title", "rank", "score", "relev", "pop");
    for (i, d) in serp.results.iter().enumerate() {
        let (url, title) = index
            .doc(d.doc_id)
            .map_or(("", ""), |m| (m.source.as_str(), m.title.as_str()));
        let _ = writeln!(
            out,
            "{:>4}  {:>8.4}  {:>8.4}  {:>8.4}  {url}",
            serp.first_rank + i,
            d.final_score,
            d.relevancy_score,
            d.popularity_score
        );
        if !title.is_empty() {
            let _ = writeln!(out, "{:>38}{title}", "");
        }
        if explain.is_some() {
            for m in &d.matched_terms {
                let _ = writeln!(
                    out,
                    "{:>38}[{}] {}{} tf={} score={:.4}",
                    "",
                    m.group,
                    m.term,
                    if m.synonym { " (synonym)" } else { "" },
                    m.term_freq,
                    m.score
                );
            }
        }
    }
    out
}
